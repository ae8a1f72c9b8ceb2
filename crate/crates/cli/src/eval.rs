//! `vaani eval`: score hypothesis audio and transcripts against a reference
//! manifest, then emit grouped, per-utterance, and long-format CSV reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use vaani::audio_io::{read_wav, resample, AudioBuffer};
use vaani::dsp::{mel_spectrogram, mfcc, stft, DEFAULT_FRAME_LEN, DEFAULT_HOP, DEFAULT_N_MELS, DEFAULT_N_MFCC};
use vaani::manifest::{audio_path, load_manifest, UtteranceRecord};
use vaani::metrics::{
    build_report, long_format_csv, mcd, spectral_features, stoi, utterance_csv, wer, Tokenizer,
    UtteranceMetrics,
};

use crate::GlobalArgs;

#[derive(Args)]
pub struct EvalArgs {
    /// Reference manifest (ground truth audio + transcripts).
    #[arg(long)]
    pub ref_manifest: PathBuf,
    /// Hypothesis manifest.
    #[arg(long, conflicts_with = "hyp_audio_dir", required_unless_present = "hyp_audio_dir")]
    pub hyp_manifest: Option<PathBuf>,
    /// Hypothesis audio directory (`<id>.wav` per reference id); reference
    /// transcripts are reused, so WER is 0 by construction.
    #[arg(long)]
    pub hyp_audio_dir: Option<PathBuf>,
    /// Reports are written as `<prefix>.csv`, `<prefix>_utterances.csv`,
    /// and `<prefix>_long.csv`.
    #[arg(long)]
    pub out_prefix: PathBuf,
    /// Externally supplied scores, a CSV with header `id,pesq`.
    #[arg(long)]
    pub external_csv: Option<PathBuf>,
}

fn load_external_pesq(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "id,pesq" => {}
        other => bail!("external CSV must start with header 'id,pesq', got {other:?}"),
    }
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, value) = line
            .split_once(',')
            .with_context(|| format!("external CSV line {}", idx + 2))?;
        out.insert(id.to_string(), value.trim().parse::<f64>()?);
    }
    Ok(out)
}

struct HypSource {
    /// id → (audio path, transcription)
    entries: BTreeMap<String, (PathBuf, String)>,
}

fn hyp_source(args: &EvalArgs, refs: &[UtteranceRecord]) -> Result<HypSource> {
    let mut entries = BTreeMap::new();
    if let Some(manifest) = &args.hyp_manifest {
        let hyps = load_manifest(manifest)?;
        let ref_ids: std::collections::BTreeSet<&str> =
            refs.iter().map(|r| r.id.as_str()).collect();
        for hyp in &hyps {
            if !ref_ids.contains(hyp.id.as_str()) {
                bail!("id {:?} present in hypothesis manifest only", hyp.id);
            }
            entries.insert(
                hyp.id.clone(),
                (audio_path(manifest, hyp), hyp.transcription.clone()),
            );
        }
        for r in refs {
            if !entries.contains_key(&r.id) {
                bail!("id {:?} present in reference manifest only", r.id);
            }
        }
    } else {
        let dir = args.hyp_audio_dir.as_ref().expect("clap group");
        for r in refs {
            let path = dir.join(format!("{}.wav", r.id));
            if !path.is_file() {
                bail!("id {:?} present in reference manifest only (no {})", r.id, path.display());
            }
            entries.insert(r.id.clone(), (path, r.transcription.clone()));
        }
    }
    Ok(HypSource { entries })
}

fn cepstra_of(buf: &AudioBuffer) -> Result<vaani::dsp::MelCepstra> {
    let spec = stft(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)?;
    let mel = mel_spectrogram(&spec, DEFAULT_N_MELS, 0.0, buf.sample_rate as f64 / 2.0);
    Ok(mfcc(&mel, DEFAULT_N_MFCC, buf.sample_rate, DEFAULT_HOP))
}

pub fn run(_global: &GlobalArgs, args: EvalArgs) -> Result<()> {
    let refs = load_manifest(&args.ref_manifest)?;
    let hyp = hyp_source(&args, &refs)?;
    let external = match &args.external_csv {
        Some(path) => load_external_pesq(path)?,
        None => BTreeMap::new(),
    };

    let results: Vec<(String, Result<UtteranceMetrics>)> = refs
        .par_iter()
        .map(|record| {
            let metrics = (|| -> Result<UtteranceMetrics> {
                let (hyp_path, hyp_text) = &hyp.entries[&record.id];
                let ref_buf = read_wav(audio_path(&args.ref_manifest, record))?;
                let hyp_buf = {
                    let raw = read_wav(hyp_path)?;
                    resample(&raw, ref_buf.sample_rate)
                };
                let word_error = wer(&record.transcription, hyp_text, Tokenizer::Word)?;
                let distortion = mcd(&cepstra_of(&ref_buf)?, &cepstra_of(&hyp_buf)?, true)?;
                let intelligibility = stoi(&ref_buf, &hyp_buf)?;
                Ok(UtteranceMetrics {
                    wer: word_error,
                    mcd_db: distortion,
                    stoi: intelligibility,
                    pesq: external.get(&record.id).copied(),
                    features: spectral_features(&hyp_buf)?,
                })
            })();
            (record.id.clone(), metrics)
        })
        .collect();

    let mut metrics: BTreeMap<String, UtteranceMetrics> = BTreeMap::new();
    let mut failures = 0usize;
    for (id, result) in results {
        match result {
            Ok(m) => {
                metrics.insert(id, m);
            }
            Err(err) => {
                failures += 1;
                eprintln!("failed: {id}: {err:#}");
            }
        }
    }
    if failures > 0 {
        bail!("{failures} record(s) failed evaluation");
    }

    let report = build_report(&refs, &metrics)?;
    print!("{}", report.to_text());

    let group_path = args.out_prefix.with_extension("csv");
    if let Some(parent) = group_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&group_path, report.to_csv())?;
    let stem = args.out_prefix.to_string_lossy();
    std::fs::write(
        format!("{stem}_utterances.csv"),
        utterance_csv(&refs, &metrics)?,
    )?;
    std::fs::write(format!("{stem}_long.csv"), long_format_csv(&refs, &metrics)?)?;
    println!(
        "wrote {}, {stem}_utterances.csv, {stem}_long.csv",
        group_path.display()
    );
    Ok(())
}

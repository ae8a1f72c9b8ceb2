//! `vaani ingest`: WAV directory + sidecar transcripts → resampled,
//! peak-normalized audio and a validated manifest.
//!
//! Each `<stem>.wav` needs a sidecar: either `<stem>.json` with
//! `{"transcription", "language"?, "emotion"?, "speaker"?}` or a plain
//! `<stem>.txt` holding the transcription. A missing language is inferred
//! from the scripts present; emotion defaults to `default`, speaker to
//! `unknown`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;

use vaani::audio_io::{peak_normalize, read_wav, resample, write_wav};
use vaani::manifest::{validate_pairing, write_manifest, Language, UtteranceRecord};
use vaani::tagging::EmotionLabel;
use vaani::translit::{segment_scripts, Script};

use crate::GlobalArgs;

#[derive(Args)]
pub struct IngestArgs {
    /// Directory of WAV files with sidecar transcripts.
    #[arg(long)]
    pub input_dir: PathBuf,
    /// Manifest to write (JSONL).
    #[arg(long)]
    pub out_manifest: PathBuf,
    /// Where processed audio goes; default: `audio/` next to the manifest.
    #[arg(long)]
    pub audio_dir: Option<PathBuf>,
    /// Output sample rate in Hz.
    #[arg(long, default_value_t = 44_100)]
    pub target_rate: u32,
    /// Peak-normalization target.
    #[arg(long, default_value_t = 0.95)]
    pub peak: f32,
}

#[derive(Deserialize)]
struct Sidecar {
    transcription: String,
    #[serde(default)]
    language: Option<String>,
    #[serde(default)]
    emotion: Option<String>,
    #[serde(default)]
    speaker: Option<String>,
}

fn infer_language(text: &str) -> Result<Language> {
    let spans = segment_scripts(text);
    let has_deva = spans.iter().any(|s| s.script == Script::Devanagari);
    let has_latin = spans.iter().any(|s| s.script == Script::Latin);
    match (has_deva, has_latin) {
        (true, true) => Ok(Language::Mixed),
        (true, false) => Ok(Language::Hindi),
        (false, true) => Ok(Language::English),
        (false, false) => bail!("transcription has neither Devanagari nor Latin letters"),
    }
}

fn parse_language(s: &str) -> Result<Language> {
    match s {
        "hindi" => Ok(Language::Hindi),
        "english" => Ok(Language::English),
        "mixed" => Ok(Language::Mixed),
        other => bail!("unknown language {other:?} (expected hindi, english, or mixed)"),
    }
}

fn load_sidecar(wav: &Path) -> Result<Sidecar> {
    let json = wav.with_extension("json");
    if json.is_file() {
        let text = std::fs::read_to_string(&json)?;
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", json.display()));
    }
    let txt = wav.with_extension("txt");
    if txt.is_file() {
        return Ok(Sidecar {
            transcription: std::fs::read_to_string(&txt)?.trim().to_string(),
            language: None,
            emotion: None,
            speaker: None,
        });
    }
    bail!("no sidecar transcript ({} or .txt)", json.display())
}

struct FileOutcome {
    id: String,
    record: Result<UtteranceRecord>,
    warnings: Vec<String>,
}

pub fn run(global: &GlobalArgs, args: IngestArgs) -> Result<()> {
    let manifest_root = args
        .out_manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&manifest_root)?;
    let audio_dir = args
        .audio_dir
        .clone()
        .unwrap_or_else(|| manifest_root.join("audio"));
    std::fs::create_dir_all(&audio_dir)?;
    let audio_rel = audio_dir
        .strip_prefix(&manifest_root)
        .map(Path::to_path_buf)
        .with_context(|| "audio dir must live under the manifest directory")?;

    let mut wavs: Vec<PathBuf> = std::fs::read_dir(&args.input_dir)
        .with_context(|| format!("reading {}", args.input_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
        .collect();
    wavs.sort();

    let strict = global.strict;
    let outcomes: Vec<FileOutcome> = wavs
        .par_iter()
        .map(|wav| {
            let id = wav
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let mut warnings = Vec::new();
            let record = (|| -> Result<UtteranceRecord> {
                let sidecar = load_sidecar(wav)?;
                if sidecar.transcription.trim().is_empty() {
                    bail!("sidecar transcription is empty");
                }
                let language = match &sidecar.language {
                    Some(s) => parse_language(s)?,
                    None => infer_language(&sidecar.transcription)?,
                };
                let emotion: EmotionLabel = sidecar
                    .emotion
                    .as_deref()
                    .unwrap_or("default")
                    .parse()
                    .map_err(|e: String| anyhow::anyhow!(e))?;
                let speaker = sidecar.speaker.unwrap_or_else(|| "unknown".to_string());

                let raw = read_wav(wav)?;
                let buf = peak_normalize(&resample(&raw, args.target_rate), args.peak);
                let out_path = audio_dir.join(format!("{id}.wav"));
                write_wav(&buf, &out_path)?;

                let record = UtteranceRecord {
                    id: id.clone(),
                    audio_path: audio_rel.join(format!("{id}.wav")).to_string_lossy().into_owned(),
                    transcription: sidecar.transcription,
                    language,
                    emotion,
                    speaker,
                    tags: None,
                    description: None,
                };
                for flag in validate_pairing(&record, &buf) {
                    warnings.push(flag.to_string());
                }
                if strict && !warnings.is_empty() {
                    bail!("diagnostics under --strict: {}", warnings.join("; "));
                }
                Ok(record)
            })();
            FileOutcome { id, record, warnings }
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = 0usize;
    for outcome in outcomes {
        match outcome.record {
            Ok(record) => {
                for w in &outcome.warnings {
                    eprintln!("warning: {}: {w}", outcome.id);
                }
                println!("ingested {}", outcome.id);
                records.push(record);
            }
            Err(err) => {
                failures += 1;
                eprintln!("failed: {}: {err:#}", outcome.id);
            }
        }
    }
    write_manifest(&records, &args.out_manifest)?;
    println!(
        "wrote {} record(s) to {} ({failures} failure(s))",
        records.len(),
        args.out_manifest.display()
    );
    if failures > 0 {
        bail!("{failures} file(s) failed ingest");
    }
    Ok(())
}

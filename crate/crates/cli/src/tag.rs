//! `vaani tag`: fill every record's feature tags and text-bin labels.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use vaani::audio_io::read_wav;
use vaani::manifest::{audio_path, load_manifest, write_manifest, UtteranceRecord};
use vaani::tagging::{tag_utterance, BinEdges, FeatureTags};

use crate::GlobalArgs;

#[derive(Args)]
pub struct TagArgs {
    /// Input manifest (JSONL).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Tagged manifest to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Bin-edges JSON; the built-in table when omitted.
    #[arg(long)]
    pub bin_edges: Option<PathBuf>,
}

pub fn run(_global: &GlobalArgs, args: TagArgs) -> Result<()> {
    // Edges load before any audio is touched.
    let edges = match &args.bin_edges {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading bin edges {}", path.display()))?;
            BinEdges::from_json(&text)?
        }
        None => BinEdges::builtin(),
    };

    let records = load_manifest(&args.manifest)?;
    let results: Vec<(String, Result<FeatureTags>)> = records
        .par_iter()
        .map(|record| {
            let tags = (|| -> Result<FeatureTags> {
                let buf = read_wav(audio_path(&args.manifest, record))?;
                Ok(tag_utterance(
                    &record.transcription,
                    record.language.phoneme_language(),
                    &buf,
                    &edges,
                )?)
            })();
            (record.id.clone(), tags)
        })
        .collect();

    let mut failures = 0usize;
    let mut tagged: Vec<UtteranceRecord> = Vec::with_capacity(records.len());
    for (record, (id, tags)) in records.into_iter().zip(results) {
        match tags {
            Ok(tags) => {
                println!(
                    "{id}: rate {:.1} ph/s, snr {:.1} dB, reverb {:.0} ms, monotony {:.2} st, energy {:.3}, {:.2} s",
                    tags.speaking_rate,
                    tags.snr_db,
                    tags.reverb_rt_ms,
                    tags.monotony_semitones,
                    tags.mean_energy,
                    tags.duration_s
                );
                let labels: Vec<String> = tags
                    .labels
                    .iter()
                    .map(|(k, v)| format!("{k}={v:?}"))
                    .collect();
                println!("  {}", labels.join(", "));
                tagged.push(UtteranceRecord {
                    tags: Some(tags),
                    ..record
                });
            }
            Err(err) => {
                failures += 1;
                eprintln!("failed: {id}: {err:#}");
            }
        }
    }
    if failures > 0 {
        bail!("{failures} record(s) failed tagging; no manifest written");
    }
    write_manifest(&tagged, &args.out)?;
    println!("wrote {} tagged record(s) to {}", tagged.len(), args.out.display());
    Ok(())
}

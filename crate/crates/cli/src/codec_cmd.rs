//! `vaani codec`: train the RVQ on a corpus's mel frames, encode manifests
//! to discrete codes, and decode codes back to mel frames.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use vaani::audio_io::read_wav;
use vaani::codec::{
    codebook_stats, decode, encode, level_mse, read_codebook, train_rvq, write_codebook,
    CodeSequence,
};
use vaani::dsp::{mel_spectrogram, stft, DEFAULT_FRAME_LEN, DEFAULT_HOP, DEFAULT_N_MELS};
use vaani::manifest::{audio_path, load_manifest, UtteranceRecord};

use crate::GlobalArgs;

#[derive(Subcommand)]
pub enum CodecCommand {
    /// Train residual codebooks on the manifest's mel frames.
    Train(TrainArgs),
    /// Encode each record's mel frames to code tuples (JSONL).
    Encode(EncodeArgs),
    /// Decode code tuples back to mel frames (JSONL).
    Decode(DecodeArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_codebook: PathBuf,
    /// Residual quantization levels.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Centroids per level.
    #[arg(long, default_value_t = 64)]
    pub codebook_size: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
}

#[derive(Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub codebook: PathBuf,
    /// Output JSONL: one `{"id", "codes"}` object per record.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct DecodeArgs {
    /// JSONL of `{"id", "codes"}` objects, as written by `codec encode`.
    #[arg(long)]
    pub codes: PathBuf,
    #[arg(long)]
    pub codebook: PathBuf,
    /// Output JSONL: one `{"id", "frames"}` object per record.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CodesLine {
    id: String,
    codes: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct FramesLine {
    id: String,
    frames: Vec<Vec<f32>>,
}

fn mel_frames(manifest: &PathBuf, record: &UtteranceRecord) -> Result<Vec<Vec<f32>>> {
    let buf = read_wav(audio_path(manifest, record))?;
    let spec = stft(&buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)
        .with_context(|| format!("record {}", record.id))?;
    Ok(mel_spectrogram(
        &spec,
        DEFAULT_N_MELS,
        0.0,
        buf.sample_rate as f64 / 2.0,
    ))
}

pub fn run(global: &GlobalArgs, cmd: CodecCommand) -> Result<()> {
    match cmd {
        CodecCommand::Train(args) => {
            let records = load_manifest(&args.manifest)?;
            if records.is_empty() {
                bail!("manifest is empty; nothing to train on");
            }
            let mut frames = Vec::new();
            for record in &records {
                frames.extend(mel_frames(&args.manifest, record)?);
            }
            println!(
                "training on {} mel frames from {} record(s)",
                frames.len(),
                records.len()
            );
            let cb = train_rvq(
                &frames,
                args.levels,
                args.codebook_size,
                args.max_iters,
                global.seed,
            )?;
            let mse = level_mse(&frames, &cb)?;
            let codes = encode(&frames, &cb)?;
            let stats = codebook_stats(&codes, &cb)?;
            println!("level  residual_mse  perplexity  dead_codes");
            println!("    0  {:>12.6}           -           -", mse[0]);
            for level in 0..cb.n_levels() {
                println!(
                    "{:>5}  {:>12.6}  {:>10.2}  {:>10}",
                    level + 1,
                    mse[level + 1],
                    stats.perplexity[level],
                    stats.dead_codes[level]
                );
            }
            write_codebook(&cb, &args.out_codebook)?;
            println!("wrote codebook to {}", args.out_codebook.display());
            Ok(())
        }
        CodecCommand::Encode(args) => {
            let records = load_manifest(&args.manifest)?;
            let cb = read_codebook(&args.codebook)?;
            let mut out = std::fs::File::create(&args.out)?;
            for record in &records {
                let frames = mel_frames(&args.manifest, record)?;
                let codes = encode(&frames, &cb)?;
                let line = CodesLine {
                    id: record.id.clone(),
                    codes: codes.codes,
                };
                writeln!(out, "{}", serde_json::to_string(&line)?)?;
            }
            println!("encoded {} record(s) to {}", records.len(), args.out.display());
            Ok(())
        }
        CodecCommand::Decode(args) => {
            let cb = read_codebook(&args.codebook)?;
            let text = std::fs::read_to_string(&args.codes)?;
            let mut out = std::fs::File::create(&args.out)?;
            let mut n = 0usize;
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: CodesLine = serde_json::from_str(line)
                    .with_context(|| format!("line {}", idx + 1))?;
                let seq = CodeSequence {
                    n_levels: cb.n_levels(),
                    codes: parsed.codes,
                };
                let frames = decode(&seq, &cb)?;
                let line = FramesLine {
                    id: parsed.id,
                    frames,
                };
                writeln!(out, "{}", serde_json::to_string(&line)?)?;
                n += 1;
            }
            println!("decoded {n} record(s) to {}", args.out.display());
            Ok(())
        }
    }
}

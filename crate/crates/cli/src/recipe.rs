//! `vaani recipe`: the three fine-tuning stages' hyperparameters as
//! machine-readable configs. Configs only; this tool never trains.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::GlobalArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Accent,
    Hindi,
    Emotion,
}

/// One stage's training configuration. Exactly one of `steps`/`epochs` is
/// set per stage.
#[derive(Debug, Clone, Serialize)]
pub struct RecipeConfig {
    pub stage: &'static str,
    pub optimizer: &'static str,
    pub learning_rate: f64,
    pub batch_size: u32,
    pub grad_accum: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<u32>,
    pub warmup_steps: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheduler: Option<&'static str>,
    pub loss_terms: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_final_loss: Option<f64>,
}

pub fn stage_config(stage: Stage) -> RecipeConfig {
    match stage {
        Stage::Accent => RecipeConfig {
            stage: "accent",
            optimizer: "AdamW",
            learning_rate: 1e-4,
            batch_size: 32,
            grad_accum: 1,
            steps: Some(100_000),
            epochs: None,
            warmup_steps: 0,
            clip_norm: Some(1.0),
            scheduler: Some("linear-decay-to-zero"),
            loss_terms: vec!["mel_reconstruction", "duration", "pitch"],
            reference_final_loss: None,
        },
        Stage::Hindi => RecipeConfig {
            stage: "hindi",
            optimizer: "Adam",
            learning_rate: 5e-5,
            batch_size: 32,
            grad_accum: 1,
            steps: None,
            epochs: Some(2),
            warmup_steps: 0,
            clip_norm: None,
            scheduler: None,
            loss_terms: vec!["cross_entropy"],
            reference_final_loss: None,
        },
        Stage::Emotion => RecipeConfig {
            stage: "emotion",
            optimizer: "Adam",
            learning_rate: 8e-5,
            batch_size: 1,
            grad_accum: 18,
            steps: None,
            epochs: Some(10),
            warmup_steps: 50,
            clip_norm: None,
            scheduler: Some("constant-with-warmup"),
            loss_terms: vec!["cross_entropy"],
            reference_final_loss: Some(3.27),
        },
    }
}

/// Render a stage config exactly as the CLI emits it.
pub fn render(stage: Stage) -> String {
    let config = stage_config(stage);
    let mut text = serde_json::to_string_pretty(&config).expect("config serializes");
    text.push('\n');
    text
}

#[derive(Args)]
pub struct RecipeArgs {
    /// Fine-tuning stage.
    #[arg(long, value_enum)]
    pub stage: Stage,
    /// Write the config here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(_global: &GlobalArgs, args: RecipeArgs) -> Result<()> {
    let text = render(args.stage);
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

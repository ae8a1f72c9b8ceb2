//! `vaani describe`: render deterministic descriptions for tagged records.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use vaani::describe::{describe_corpus, DescriptionTemplate};
use vaani::manifest::{load_manifest, write_manifest};

use crate::GlobalArgs;

#[derive(Args)]
pub struct DescribeArgs {
    /// Tagged manifest (JSONL).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Described manifest to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Template JSON; the built-in template when omitted.
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Single-speaker mode: force this name into every description.
    #[arg(long)]
    pub speaker_name: Option<String>,
}

pub fn run(global: &GlobalArgs, args: DescribeArgs) -> Result<()> {
    let template = match &args.template {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading template {}", path.display()))?;
            DescriptionTemplate::from_json(&text)?
        }
        None => DescriptionTemplate::builtin(),
    };
    let records = load_manifest(&args.manifest)?;
    let described = describe_corpus(
        &records,
        &template,
        global.seed,
        args.speaker_name.as_deref(),
    )?;
    for record in &described {
        println!("{}: {}", record.id, record.description.as_deref().unwrap_or(""));
    }
    write_manifest(&described, &args.out)?;
    println!(
        "wrote {} described record(s) to {}",
        described.len(),
        args.out.display()
    );
    Ok(())
}

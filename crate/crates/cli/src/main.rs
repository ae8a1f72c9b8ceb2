//! `vaani`: corpus curation and evaluation pipeline as composable
//! subcommands over JSONL manifests.
//!
//! Exit codes: 0 success, 1 data errors, 2 usage errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod codec_cmd;
mod describe_cmd;
mod eval;
mod ingest;
mod recipe;
mod tag;
mod translit_cmd;

#[derive(Parser)]
#[command(name = "vaani", version, about = "Speech corpus curation and evaluation toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Worker threads (0 = one per core). Outputs are identical at any
    /// parallelism.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for every randomized choice (descriptions, codec training).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Promote pairing diagnostics to hard failures.
    #[arg(long, global = true, default_value_t = false)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Resample and normalize a directory of WAVs into a validated manifest.
    Ingest(ingest::IngestArgs),
    /// Compute feature tags and text-bin labels for every record.
    Tag(tag::TagArgs),
    /// Render natural-language descriptions from tags.
    Describe(describe_cmd::DescribeArgs),
    /// Transliterate, segment, or round-trip check text.
    Translit(translit_cmd::TranslitArgs),
    /// Train or apply the residual vector quantizer.
    #[command(subcommand)]
    Codec(codec_cmd::CodecCommand),
    /// Score hypothesis audio/transcripts against a reference manifest.
    Eval(eval::EvalArgs),
    /// Emit a fine-tuning recipe config.
    Recipe(recipe::RecipeArgs),
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes, like any unix filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if cli.global.jobs > 0 {
        // Ignore the error if a pool already exists (repeated in-process use).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.jobs)
            .build_global();
    }
    let result = match cli.command {
        Command::Ingest(args) => ingest::run(&cli.global, args),
        Command::Tag(args) => tag::run(&cli.global, args),
        Command::Describe(args) => describe_cmd::run(&cli.global, args),
        Command::Translit(args) => translit_cmd::run(&cli.global, args),
        Command::Codec(cmd) => codec_cmd::run(&cli.global, cmd),
        Command::Eval(args) => eval::run(&cli.global, args),
        Command::Recipe(args) => recipe::run(&cli.global, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

//! `vaani translit`: transliterate, segment, or round-trip check text.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use vaani::translit::{deva_to_latin, latin_to_deva, segment_scripts, Script, TranslitScheme};

use crate::GlobalArgs;

#[derive(Args)]
pub struct TranslitArgs {
    /// Text to process.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub text: Option<String>,
    /// File to process (UTF-8).
    #[arg(long)]
    pub file: Option<PathBuf>,

    /// Devanagari → Latin.
    #[arg(long, group = "mode", required_unless_present_any = ["to_deva", "segment", "round_trip"])]
    pub to_latin: bool,
    /// Latin → Devanagari.
    #[arg(long, group = "mode")]
    pub to_deva: bool,
    /// Print script spans instead of transliterating.
    #[arg(long, group = "mode")]
    pub segment: bool,
    /// Check latin_to_deva(deva_to_latin(line)) == line per input line.
    #[arg(long, group = "mode")]
    pub round_trip: bool,

    /// Alternative scheme JSON; the built-in scheme when omitted.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn script_name(script: Script) -> &'static str {
    match script {
        Script::Latin => "latin",
        Script::Devanagari => "devanagari",
        Script::Neutral => "neutral",
    }
}

pub fn run(_global: &GlobalArgs, args: TranslitArgs) -> Result<()> {
    let scheme = match &args.scheme {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading scheme {}", path.display()))?;
            TranslitScheme::from_json(&text)?
        }
        None => TranslitScheme::builtin(),
    };
    let input = match (&args.text, &args.file) {
        (Some(text), None) => text.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        _ => bail!("provide exactly one of --text or --file"),
    };

    let output = if args.segment {
        let mut out = String::new();
        for span in segment_scripts(&input) {
            out.push_str(&format!(
                "{}\t{}..{}\t{:?}\n",
                script_name(span.script),
                span.start,
                span.end,
                span.text
            ));
        }
        out
    } else if args.round_trip {
        let lines: Vec<&str> = input.lines().filter(|l| !l.trim().is_empty()).collect();
        let mut identical = 0usize;
        let mut mismatches: Vec<usize> = Vec::new();
        for (idx, line) in lines.iter().enumerate() {
            let latin = deva_to_latin(line, &scheme)
                .with_context(|| format!("line {}", idx + 1))?;
            let back = latin_to_deva(&latin, &scheme)
                .with_context(|| format!("line {}", idx + 1))?;
            if back == *line {
                identical += 1;
            } else {
                mismatches.push(idx + 1);
            }
        }
        let total = lines.len().max(1);
        let pct = 100.0 * identical as f64 / total as f64;
        let mut out = format!("round-trip identity: {pct:.1}% ({identical}/{})\n", lines.len());
        for line in mismatches.iter().take(10) {
            out.push_str(&format!("mismatch at line {line}\n"));
        }
        if identical != lines.len() {
            print!("{out}");
            bail!("round trip failed for {} line(s)", lines.len() - identical);
        }
        out
    } else if args.to_deva {
        latin_to_deva(&input, &scheme)? + "\n"
    } else {
        deva_to_latin(&input, &scheme)? + "\n"
    };

    match &args.out {
        Some(path) => std::fs::write(path, output)?,
        None => print!("{output}"),
    }
    Ok(())
}

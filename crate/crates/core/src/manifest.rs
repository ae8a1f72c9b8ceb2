//! The corpus data model: one JSON record per line, UTF-8, with validation
//! that binds audio, transcripts, tags, and descriptions together.
//!
//! Field order in the file is fixed (struct order), floats use the shortest
//! representation that parses back to the identical value, and
//! `load_manifest(write_manifest(r)) == r` field for field.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::AudioBuffer;
use crate::tagging::{EmotionLabel, FeatureTags};
use crate::translit::{segment_scripts, PhonemeLanguage, Script};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("line {line}: parse error: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: audio path {path:?} does not resolve under the manifest root")]
    DanglingAudioPath { line: usize, path: String },
    #[error("line {line}: record {id:?} claims language {language} but its transcription scripts disagree")]
    ScriptMismatch {
        line: usize,
        id: String,
        language: Language,
    },
    #[error("line {line}: record {id:?} has an empty transcription")]
    EmptyTranscription { line: usize, id: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Declared utterance language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Hindi,
    English,
    Mixed,
}

impl Language {
    pub fn as_str(&self) -> &'static str {
        match self {
            Language::Hindi => "hindi",
            Language::English => "english",
            Language::Mixed => "mixed",
        }
    }

    pub fn phoneme_language(&self) -> PhonemeLanguage {
        match self {
            Language::Hindi => PhonemeLanguage::Hindi,
            Language::English => PhonemeLanguage::English,
            Language::Mixed => PhonemeLanguage::Mixed,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub audio_path: String,
    pub transcription: String,
    pub language: Language,
    pub emotion: EmotionLabel,
    pub speaker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<FeatureTags>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

fn language_matches_scripts(language: Language, transcription: &str) -> bool {
    let spans = segment_scripts(transcription);
    let has_deva = spans.iter().any(|s| s.script == Script::Devanagari);
    let has_latin = spans.iter().any(|s| s.script == Script::Latin);
    match language {
        Language::Hindi => has_deva,
        Language::English => has_latin && !has_deva,
        Language::Mixed => has_deva && has_latin,
    }
}

/// Path must be relative and stay inside the manifest root.
fn resolves_under_root(root: &Path, rel: &str) -> Option<PathBuf> {
    let rel_path = Path::new(rel);
    if rel_path.is_absolute()
        || rel_path
            .components()
            .any(|c| matches!(c, Component::ParentDir))
    {
        return None;
    }
    let full = root.join(rel_path);
    full.is_file().then_some(full)
}

fn validate_record(
    record: &UtteranceRecord,
    line: usize,
    root: &Path,
    seen: &mut HashSet<String>,
) -> Result<(), ManifestError> {
    if !seen.insert(record.id.clone()) {
        return Err(ManifestError::DuplicateId {
            line,
            id: record.id.clone(),
        });
    }
    if record.transcription.trim().is_empty() {
        return Err(ManifestError::EmptyTranscription {
            line,
            id: record.id.clone(),
        });
    }
    if resolves_under_root(root, &record.audio_path).is_none() {
        return Err(ManifestError::DanglingAudioPath {
            line,
            path: record.audio_path.clone(),
        });
    }
    if !language_matches_scripts(record.language, &record.transcription) {
        return Err(ManifestError::ScriptMismatch {
            line,
            id: record.id.clone(),
            language: record.language,
        });
    }
    Ok(())
}

/// Load and validate a JSONL manifest. Every error carries its line number.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<UtteranceRecord>, ManifestError> {
    let path = path.as_ref();
    let root = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let record: UtteranceRecord =
            serde_json::from_str(&text).map_err(|e| ManifestError::ParseError {
                line: line_no,
                message: e.to_string(),
            })?;
        validate_record(&record, line_no, &root, &mut seen)?;
        records.push(record);
    }
    Ok(records)
}

/// Resolve a record's audio path against the manifest location.
pub fn audio_path(manifest_path: impl AsRef<Path>, record: &UtteranceRecord) -> PathBuf {
    let root = manifest_path
        .as_ref()
        .parent()
        .unwrap_or_else(|| Path::new("."));
    root.join(&record.audio_path)
}

/// Write records as JSONL with deterministic field order.
pub fn write_manifest(
    records: &[UtteranceRecord],
    path: impl AsRef<Path>,
) -> Result<(), ManifestError> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Non-fatal consistency findings from [`validate_pairing`]. A CLI switch
/// promotes these to failures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PairingFlag {
    DurationOutOfRange { duration_s: f64 },
    ImplausibleSpeakingRate { phonemes_per_s: f64 },
    Clipping { clipped_fraction: f64 },
    Silent,
}

impl fmt::Display for PairingFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingFlag::DurationOutOfRange { duration_s } => {
                write!(f, "duration {duration_s:.3} s outside [0.3, 60]")
            }
            PairingFlag::ImplausibleSpeakingRate { phonemes_per_s } => {
                write!(
                    f,
                    "speaking rate {phonemes_per_s:.1} phonemes/s outside [1, 30]"
                )
            }
            PairingFlag::Clipping { clipped_fraction } => {
                write!(f, "{:.3}% of samples clipped", clipped_fraction * 100.0)
            }
            PairingFlag::Silent => write!(f, "audio is silent"),
        }
    }
}

/// Check that spoken material and text plausibly belong together.
///
/// Diagnostics, not failures: flags duration outside `[0.3 s, 60 s]`,
/// speaking rate outside `[1, 30]` phonemes/s, clipping (≥0.1% of samples at
/// full scale), and silence.
pub fn validate_pairing(record: &UtteranceRecord, buf: &AudioBuffer) -> Vec<PairingFlag> {
    let mut flags = Vec::new();
    let duration_s = buf.duration_seconds();
    if !(0.3..=60.0).contains(&duration_s) {
        flags.push(PairingFlag::DurationOutOfRange { duration_s });
    }
    if duration_s > 0.0 {
        if let Ok(rate) = crate::tagging::speaking_rate(
            &record.transcription,
            duration_s,
            record.language.phoneme_language(),
        ) {
            if !(1.0..=30.0).contains(&rate) {
                flags.push(PairingFlag::ImplausibleSpeakingRate {
                    phonemes_per_s: rate,
                });
            }
        }
    }
    let clipped = buf.samples.iter().filter(|s| s.abs() >= 1.0).count();
    let clipped_fraction = clipped as f64 / buf.len().max(1) as f64;
    if clipped_fraction >= 0.001 {
        flags.push(PairingFlag::Clipping { clipped_fraction });
    }
    if matches!(
        crate::tagging::estimate_snr(buf),
        Err(crate::tagging::TaggingError::AllSilent)
    ) {
        flags.push(PairingFlag::Silent);
    }
    flags
}

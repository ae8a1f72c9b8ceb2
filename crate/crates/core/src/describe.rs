//! Deterministic natural-language utterance descriptions rendered from
//! feature tags and a speaker name through a template grammar.
//!
//! A template is an ordered list of clauses; each clause offers several
//! variants containing `{slot}` placeholders. A slot is either `speaker` or
//! the name of a bin label in `FeatureTags.labels`. Variant choice is driven
//! only by the seed, so rendering is bit-identical for identical inputs, and
//! per-record seeds are derived order-free from the record id.

use serde::Deserialize;
use thiserror::Error;

use crate::manifest::UtteranceRecord;
use crate::tagging::FeatureTags;

#[derive(Debug, Error)]
pub enum DescribeError {
    #[error("template references slot {slot:?} absent from the tags{}", record_context(.record_id))]
    MissingSlot {
        slot: String,
        record_id: Option<String>,
    },
    #[error("record {id:?} has no tags; run the tagging stage first")]
    UntaggedRecord { id: String },
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
}

fn record_context(record_id: &Option<String>) -> String {
    match record_id {
        Some(id) => format!(" (record {id:?})"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Clause {
    pub variants: Vec<String>,
}

/// Ordered clauses with seed-selected variants, joined by a connector.
#[derive(Debug, Clone, Deserialize)]
pub struct DescriptionTemplate {
    pub name: String,
    #[serde(default = "default_connector")]
    pub connector: String,
    pub clauses: Vec<Clause>,
}

fn default_connector() -> String {
    " ".to_string()
}

impl DescriptionTemplate {
    /// The template shipped with the crate, shaped like
    /// "In a very expressive voice, Akshansh speaks slowly with a quite
    /// noisy background and some echo."
    pub fn builtin() -> Self {
        Self::from_json(include_str!("../assets/template.default.v1.json"))
            .expect("built-in template must validate")
    }

    pub fn from_json(json: &str) -> Result<Self, DescribeError> {
        let template: DescriptionTemplate = serde_json::from_str(json)
            .map_err(|e| DescribeError::InvalidTemplate(e.to_string()))?;
        if template.clauses.is_empty() {
            return Err(DescribeError::InvalidTemplate("no clauses".into()));
        }
        if template.clauses.iter().any(|c| c.variants.is_empty()) {
            return Err(DescribeError::InvalidTemplate(
                "every clause needs at least one variant".into(),
            ));
        }
        Ok(template)
    }
}

/// SplitMix64: a tiny, stable stream of seed-derived values.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the record id: a stable, platform-independent hash for
/// per-record seeding.
pub fn stable_hash(text: &str) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for byte in text.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

fn substitute(
    pattern: &str,
    tags: &FeatureTags,
    speaker: &str,
    record_id: Option<&str>,
) -> Result<String, DescribeError> {
    let mut out = String::with_capacity(pattern.len());
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let Some(close) = rest[open..].find('}') else {
            return Err(DescribeError::InvalidTemplate(format!(
                "unclosed placeholder in {pattern:?}"
            )));
        };
        let slot = &rest[open + 1..open + close];
        if slot == "speaker" {
            out.push_str(speaker);
        } else {
            match tags.labels.get(slot) {
                Some(label) => out.push_str(label),
                None => {
                    return Err(DescribeError::MissingSlot {
                        slot: slot.to_string(),
                        record_id: record_id.map(str::to_string),
                    })
                }
            }
        }
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Render one description. Every referenced bin label appears verbatim in
/// the output; the same seed and inputs give the identical string.
pub fn render_description(
    tags: &FeatureTags,
    speaker: &str,
    template: &DescriptionTemplate,
    seed: u64,
) -> Result<String, DescribeError> {
    render_with_record(tags, speaker, template, seed, None)
}

fn render_with_record(
    tags: &FeatureTags,
    speaker: &str,
    template: &DescriptionTemplate,
    seed: u64,
    record_id: Option<&str>,
) -> Result<String, DescribeError> {
    let mut parts = Vec::with_capacity(template.clauses.len());
    for (idx, clause) in template.clauses.iter().enumerate() {
        let mut state = seed ^ (idx as u64).wrapping_mul(0xA076_1D64_78BD_642F);
        let pick = (splitmix64(&mut state) % clause.variants.len() as u64) as usize;
        parts.push(substitute(&clause.variants[pick], tags, speaker, record_id)?);
    }
    Ok(parts.join(&template.connector))
}

/// Render descriptions for a whole manifest.
///
/// Each record's seed is `base_seed XOR stable_hash(id)`, so outputs do not
/// depend on manifest order. `single_speaker` forces one name for every
/// record; otherwise the record's own speaker is used.
pub fn describe_corpus(
    records: &[UtteranceRecord],
    template: &DescriptionTemplate,
    base_seed: u64,
    single_speaker: Option<&str>,
) -> Result<Vec<UtteranceRecord>, DescribeError> {
    records
        .iter()
        .map(|record| {
            let tags = record.tags.as_ref().ok_or_else(|| DescribeError::UntaggedRecord {
                id: record.id.clone(),
            })?;
            let speaker = single_speaker.unwrap_or(&record.speaker);
            let seed = base_seed ^ stable_hash(&record.id);
            let description =
                render_with_record(tags, speaker, template, seed, Some(&record.id))?;
            let mut out = record.clone();
            out.description = Some(description);
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::Language;
    use crate::tagging::EmotionLabel;
    use std::collections::BTreeMap;

    fn exemplar_tags() -> FeatureTags {
        let labels: BTreeMap<String, String> = [
            ("monotony", "very expressive"),
            ("rate", "slowly"),
            ("snr", "some background noise"),
            ("reverb", "echo"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        FeatureTags {
            speaking_rate: 9.0,
            snr_db: 22.0,
            reverb_rt_ms: 420.0,
            monotony_semitones: 3.4,
            mean_energy: 0.2,
            duration_s: 2.2,
            labels,
        }
    }

    fn exemplar_template() -> DescriptionTemplate {
        DescriptionTemplate::from_json(
            r#"{
                "name": "exemplar",
                "connector": " ",
                "clauses": [
                    {"variants": ["In a {monotony} voice,", "With a {monotony} delivery,", "Keeping a {monotony} tone,"]},
                    {"variants": ["{speaker} speaks {rate}", "{speaker} talks {rate}", "{speaker} reads the line {rate}"]},
                    {"variants": ["with {snr}", "over {snr}", "against {snr}"]},
                    {"variants": ["and {reverb}.", "plus {reverb}.", "and a touch of {reverb}."]}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn render_contains_speaker_and_all_labels() {
        let tags = exemplar_tags();
        let template = exemplar_template();
        let text = render_description(&tags, "Akshansh", &template, 0).unwrap();
        assert!(text.contains("Akshansh"), "{text}");
        for label in tags.labels.values() {
            assert!(text.contains(label), "{text} missing {label}");
        }
    }

    #[test]
    fn render_is_deterministic() {
        let tags = exemplar_tags();
        let template = exemplar_template();
        let a = render_description(&tags, "Akshansh", &template, 7).unwrap();
        let b = render_description(&tags, "Akshansh", &template, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_select_different_variants() {
        let tags = exemplar_tags();
        let template = exemplar_template();
        let outputs: std::collections::HashSet<String> = (0..16)
            .map(|seed| render_description(&tags, "Akshansh", &template, seed).unwrap())
            .collect();
        assert!(outputs.len() > 1, "seeds should reach several variants");
    }

    #[test]
    fn missing_slot_is_an_error() {
        let tags = exemplar_tags();
        let template = DescriptionTemplate::from_json(
            r#"{"name": "bad", "clauses": [{"variants": ["{pitch} voice"]}]}"#,
        )
        .unwrap();
        match render_description(&tags, "A", &template, 0) {
            Err(DescribeError::MissingSlot { slot, .. }) => assert_eq!(slot, "pitch"),
            other => panic!("expected MissingSlot, got {other:?}"),
        }
    }

    fn tagged_record(id: &str) -> UtteranceRecord {
        UtteranceRecord {
            id: id.into(),
            audio_path: format!("{id}.wav"),
            transcription: "hello world".into(),
            language: Language::English,
            emotion: EmotionLabel::Default,
            speaker: format!("speaker-{id}"),
            tags: Some(exemplar_tags()),
            description: None,
        }
    }

    #[test]
    fn corpus_descriptions_are_order_free() {
        let template = exemplar_template();
        let records = vec![tagged_record("u1"), tagged_record("u2"), tagged_record("u3")];
        let forward = describe_corpus(&records, &template, 42, None).unwrap();
        let mut reversed: Vec<UtteranceRecord> = records.clone();
        reversed.reverse();
        let backward = describe_corpus(&reversed, &template, 42, None).unwrap();
        for record in &forward {
            let mirrored = backward.iter().find(|r| r.id == record.id).unwrap();
            assert_eq!(record.description, mirrored.description);
        }
        assert_eq!(forward.len(), 3);
        assert!(forward.iter().all(|r| r.description.is_some()));
    }

    #[test]
    fn single_speaker_mode_forces_name() {
        let template = exemplar_template();
        let records = vec![tagged_record("u1"), tagged_record("u2")];
        let described = describe_corpus(&records, &template, 0, Some("Akshansh")).unwrap();
        for r in described {
            assert!(r.description.unwrap().contains("Akshansh"));
        }
    }

    #[test]
    fn untagged_record_is_named() {
        let template = exemplar_template();
        let mut record = tagged_record("u9");
        record.tags = None;
        match describe_corpus(&[record], &template, 0, None) {
            Err(DescribeError::UntaggedRecord { id }) => assert_eq!(id, "u9"),
            other => panic!("expected UntaggedRecord, got {other:?}"),
        }
    }

    #[test]
    fn builtin_template_renders_builtin_labels() {
        let edges = crate::tagging::BinEdges::builtin();
        let mut tags = exemplar_tags();
        tags.labels = [
            ("speaking_rate", "slowly"),
            ("snr_db", "quite noisy"),
            ("reverberation", "some echo"),
            ("monotony", "very expressive"),
            ("energy", "soft"),
            ("duration", "short"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        // Every label key set by tagging exists in the built-in bin edges.
        for key in tags.labels.keys() {
            assert!(edges.features.contains_key(key));
        }
        let template = DescriptionTemplate::builtin();
        let text = render_description(&tags, "Akshansh", &template, 0).unwrap();
        assert!(text.contains("Akshansh"));
        assert!(text.contains("very expressive"));
        assert!(text.contains("slowly"));
        assert!(text.contains("quite noisy"));
        assert!(text.contains("some echo"));
    }
}

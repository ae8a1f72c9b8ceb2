//! Utterance-level feature tagging: speaking rate, SNR, reverberation,
//! monotony, energy, and duration, plus the mapping from continuous values
//! to text-bin labels through a bin-edges file.
//!
//! Emotion labels are a closed set and always come from the manifest; they
//! are never inferred from audio.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::AudioBuffer;
use crate::dsp::{self, DspError, PitchTrack, DEFAULT_FRAME_LEN, DEFAULT_HOP};
use crate::translit::{count_phonemes, PhonemeLanguage, TranslitError, TranslitScheme};

/// Frame powers below this are treated as digital silence.
const SILENCE_DBFS: f64 = -80.0;
/// SNR analysis frame length in seconds.
const SNR_FRAME_S: f64 = 0.025;
/// Clamp range for the blind SNR estimate.
const SNR_RANGE_DB: (f64, f64) = (0.0, 60.0);
/// Minimum voiced frames for a monotony estimate.
const MIN_VOICED_FRAMES: usize = 5;

#[derive(Debug, Error)]
pub enum TaggingError {
    #[error("empty transcript")]
    EmptyTranscript,
    #[error("duration must be positive, got {0}")]
    NonpositiveDuration(f64),
    #[error("signal too short: need at least {needed_s} s, got {got_s} s")]
    SignalTooShort { needed_s: f64, got_s: f64 },
    #[error("every frame is below {SILENCE_DBFS} dBFS")]
    AllSilent,
    #[error("only {voiced} voiced frames; monotony needs at least {MIN_VOICED_FRAMES}")]
    InsufficientVoicing { voiced: usize },
    #[error("feature {0:?} not present in bin edges")]
    UnknownFeature(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Translit(#[from] TranslitError),
    #[error("invalid bin edges: {0}")]
    InvalidBinEdges(String),
}

/// The eight manually-assigned emotion labels. Parsing any other string is
/// an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Whisper,
    Enunciation,
    Sad,
    Default,
    Laughing,
    Confused,
    Happy,
    Emphasis,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 8] = [
        EmotionLabel::Whisper,
        EmotionLabel::Enunciation,
        EmotionLabel::Sad,
        EmotionLabel::Default,
        EmotionLabel::Laughing,
        EmotionLabel::Confused,
        EmotionLabel::Happy,
        EmotionLabel::Emphasis,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EmotionLabel::Whisper => "whisper",
            EmotionLabel::Enunciation => "enunciation",
            EmotionLabel::Sad => "sad",
            EmotionLabel::Default => "default",
            EmotionLabel::Laughing => "laughing",
            EmotionLabel::Confused => "confused",
            EmotionLabel::Happy => "happy",
            EmotionLabel::Emphasis => "emphasis",
        }
    }
}

impl FromStr for EmotionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmotionLabel::ALL
            .iter()
            .find(|e| e.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown emotion label {s:?}"))
    }
}

impl std::fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Continuous utterance-level features plus their discrete text-bin labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTags {
    pub speaking_rate: f64,
    pub snr_db: f64,
    pub reverb_rt_ms: f64,
    pub monotony_semitones: f64,
    pub mean_energy: f64,
    pub duration_s: f64,
    pub labels: BTreeMap<String, String>,
}

/// The feature names a bin-edges file can bin, in report order.
pub const BINNABLE_FEATURES: [&str; 6] = [
    "speaking_rate",
    "snr_db",
    "reverberation",
    "monotony",
    "energy",
    "duration",
];

impl FeatureTags {
    /// Numeric value for a binnable feature name.
    pub fn value_of(&self, feature: &str) -> Option<f64> {
        match feature {
            "speaking_rate" => Some(self.speaking_rate),
            "snr_db" => Some(self.snr_db),
            "reverberation" => Some(self.reverb_rt_ms),
            "monotony" => Some(self.monotony_semitones),
            "energy" => Some(self.mean_energy),
            "duration" => Some(self.duration_s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureBins {
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
}

/// Per-feature bin edges and label vocabulary, loaded from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinEdges {
    pub version: String,
    pub features: BTreeMap<String, FeatureBins>,
}

impl BinEdges {
    /// The bin-edges table shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(include_str!("../assets/bin_edges.v1.json"))
            .expect("built-in bin edges must validate")
    }

    pub fn from_json(json: &str) -> Result<Self, TaggingError> {
        let edges: BinEdges = serde_json::from_str(json)
            .map_err(|e| TaggingError::InvalidBinEdges(e.to_string()))?;
        edges.validate()?;
        Ok(edges)
    }

    fn validate(&self) -> Result<(), TaggingError> {
        for (name, bins) in &self.features {
            if bins.labels.len() != bins.edges.len() + 1 {
                return Err(TaggingError::InvalidBinEdges(format!(
                    "feature {name:?}: {} labels for {} edges (need edges + 1)",
                    bins.labels.len(),
                    bins.edges.len()
                )));
            }
            if bins.edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(TaggingError::InvalidBinEdges(format!(
                    "feature {name:?}: edges must be strictly increasing"
                )));
            }
        }
        Ok(())
    }
}

fn builtin_scheme() -> &'static TranslitScheme {
    static SCHEME: OnceLock<TranslitScheme> = OnceLock::new();
    SCHEME.get_or_init(TranslitScheme::builtin)
}

/// Phonemes per second, with phoneme counting delegated to the
/// transliteration rule tables.
pub fn speaking_rate(
    transcription: &str,
    duration_s: f64,
    language: PhonemeLanguage,
) -> Result<f64, TaggingError> {
    if transcription.trim().is_empty() {
        return Err(TaggingError::EmptyTranscript);
    }
    if duration_s <= 0.0 {
        return Err(TaggingError::NonpositiveDuration(duration_s));
    }
    let phones = count_phonemes(transcription, language, builtin_scheme())?;
    Ok(phones as f64 / duration_s)
}

fn frame_powers(buf: &AudioBuffer, frame_s: f64) -> Vec<f64> {
    let frame_len = ((buf.sample_rate as f64 * frame_s).round() as usize).max(1);
    buf.samples
        .chunks(frame_len)
        .filter(|c| c.len() == frame_len)
        .map(|c| c.iter().map(|&s| s as f64 * s as f64).sum::<f64>() / frame_len as f64)
        .collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Blind SNR estimate from the spread of 25 ms frame powers.
///
/// P90 of the frame powers tracks speech-plus-noise power and P10 the noise
/// floor; the estimate is `10·log10((P90 − P10) / P10)` clamped to
/// `[0, 60]` dB, so it is exact on duty-cycled mixtures with known powers and
/// invariant to global gain.
pub fn estimate_snr(buf: &AudioBuffer) -> Result<f64, TaggingError> {
    let duration = buf.duration_seconds();
    if duration < 0.5 {
        return Err(TaggingError::SignalTooShort {
            needed_s: 0.5,
            got_s: duration,
        });
    }
    let powers = frame_powers(buf, SNR_FRAME_S);
    let silence_power = 10f64.powf(SILENCE_DBFS / 10.0);
    if powers.iter().all(|&p| p < silence_power) {
        return Err(TaggingError::AllSilent);
    }
    let mut sorted = powers;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p10 = percentile(&sorted, 0.10);
    let p90 = percentile(&sorted, 0.90);
    if p10 <= 0.0 {
        return Ok(SNR_RANGE_DB.1);
    }
    let ratio = (p90 - p10).max(f64::MIN_POSITIVE) / p10;
    Ok((10.0 * ratio.log10()).clamp(SNR_RANGE_DB.0, SNR_RANGE_DB.1))
}

/// Blind reverberation-time proxy in milliseconds.
///
/// Energy offsets (a drop of at least 20 dB from a local peak) are located on
/// a 20 ms / 10 ms frame grid; the log-energy slope over each decay region is
/// fit by least squares and extrapolated to a 60 dB decay time. The fastest
/// observed decay is reported, since the room tail bounds every offset from
/// below; 0 when no decay region exists.
pub fn estimate_reverb(buf: &AudioBuffer) -> Result<f64, TaggingError> {
    let duration = buf.duration_seconds();
    if duration < 0.5 {
        return Err(TaggingError::SignalTooShort {
            needed_s: 0.5,
            got_s: duration,
        });
    }
    let fs = buf.sample_rate as f64;
    let frame_len = (fs * 0.020).round() as usize;
    let hop = (fs * 0.010).round() as usize;
    let hop_s = hop as f64 / fs;
    if buf.len() < frame_len {
        return Ok(0.0);
    }
    let n_frames = (buf.len() - frame_len) / hop + 1;
    let energies_db: Vec<f64> = (0..n_frames)
        .map(|f| {
            let frame = &buf.samples[f * hop..f * hop + frame_len];
            let p = frame.iter().map(|&s| s as f64 * s as f64).sum::<f64>() / frame_len as f64;
            10.0 * (p + 1e-12).log10()
        })
        .collect();

    let scan_cap = (1.0 / hop_s).round() as usize;
    let mut estimates: Vec<f64> = Vec::new();
    for i in 0..n_frames {
        let e0 = energies_db[i];
        if e0 <= -60.0 {
            continue;
        }
        let is_peak = (i == 0 || energies_db[i - 1] <= e0)
            && (i + 1 >= n_frames || energies_db[i + 1] <= e0);
        if !is_peak {
            continue;
        }
        // Follow the decay until it reaches -20 dB or re-onsets.
        let mut end = None;
        for j in i + 1..n_frames.min(i + 1 + scan_cap) {
            if energies_db[j] > energies_db[j - 1] + 3.0 {
                break; // next onset
            }
            if energies_db[j] <= e0 - 20.0 {
                end = Some(j);
                break;
            }
        }
        let Some(j) = end else { continue };
        // Least-squares slope of energy (dB) against time over the region.
        let pts: Vec<(f64, f64)> = (i..=j)
            .map(|k| ((k - i) as f64 * hop_s, energies_db[k]))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-12 {
            continue;
        }
        let slope = (n * sxy - sx * sy) / denom;
        if slope < -1e-9 {
            estimates.push(60.0 / (-slope) * 1000.0);
        }
    }

    Ok(estimates.into_iter().fold(0.0f64, |acc, v| {
        if acc == 0.0 {
            v
        } else {
            acc.min(v)
        }
    }))
}

/// Standard deviation of voiced F0 in semitones about the geometric median
/// (`exp` of the mean log F0), so the result is exactly invariant to global
/// pitch transposition.
pub fn monotony(track: &PitchTrack) -> Result<f64, TaggingError> {
    let voiced = track.voiced_values();
    if voiced.len() < MIN_VOICED_FRAMES {
        return Err(TaggingError::InsufficientVoicing {
            voiced: voiced.len(),
        });
    }
    let mean_log2: f64 = voiced.iter().map(|f| f.log2()).sum::<f64>() / voiced.len() as f64;
    let var: f64 = voiced
        .iter()
        .map(|f| {
            let d = 12.0 * (f.log2() - mean_log2);
            d * d
        })
        .sum::<f64>()
        / voiced.len() as f64;
    Ok(var.sqrt())
}

/// Map a continuous value to its text-bin label.
///
/// The label index is the number of edges at or below the value, so a value
/// equal to an edge falls in the upper bin.
pub fn bin_feature(value: f64, feature_name: &str, edges: &BinEdges) -> Result<String, TaggingError> {
    let bins = edges
        .features
        .get(feature_name)
        .ok_or_else(|| TaggingError::UnknownFeature(feature_name.to_string()))?;
    let idx = bins.edges.iter().filter(|&&e| e <= value).count();
    Ok(bins.labels[idx].clone())
}

/// Compute every feature tag for one utterance and bin all features present
/// in the edges file. Partial results are never returned: any component
/// error propagates.
pub fn tag_utterance(
    transcription: &str,
    language: PhonemeLanguage,
    buf: &AudioBuffer,
    edges: &BinEdges,
) -> Result<FeatureTags, TaggingError> {
    let duration_s = buf.duration_seconds();
    let speaking_rate = speaking_rate(transcription, duration_s, language)?;
    let snr_db = estimate_snr(buf)?;
    let reverb_rt_ms = estimate_reverb(buf)?;
    let track = dsp::estimate_f0(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)?;
    let monotony_semitones = monotony(&track)?;
    let energies = dsp::rms_energy(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)?;
    let mean_energy = energies.iter().sum::<f64>() / energies.len() as f64;

    let mut tags = FeatureTags {
        speaking_rate,
        snr_db,
        reverb_rt_ms,
        monotony_semitones,
        mean_energy,
        duration_s,
        labels: BTreeMap::new(),
    };
    for feature in BINNABLE_FEATURES {
        if edges.features.contains_key(feature) {
            let value = tags.value_of(feature).expect("known feature");
            tags.labels
                .insert(feature.to_string(), bin_feature(value, feature, edges)?);
        }
    }
    Ok(tags)
}

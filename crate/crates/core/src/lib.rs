//! Corpus curation and objective evaluation for Hindi / Indian English speech data.
//!
//! The crate is organized as a pipeline over line-delimited JSON manifests:
//!
//! 1. [`audio_io`]: WAV read/write, windowed-sinc resampling, peak normalization
//! 2. [`dsp`]: STFT, mel spectrogram, MFCC, F0, ZCR, energy, spectral centroid
//! 3. [`translit`]: reversible Devanagari↔Latin romanization, script
//!    segmentation of code-mixed text, rule-based phoneme counting
//! 4. [`tagging`]: utterance-level feature tags (speaking rate, SNR,
//!    reverberation, monotony, energy, duration) and text-bin labels
//! 5. [`manifest`]: the corpus data model and JSONL persistence
//! 6. [`describe`]: deterministic natural-language descriptions from tags
//! 7. [`codec`]: k-means residual vector quantization of mel frames
//! 8. [`metrics`]: WER, DTW-aligned MCD, STOI, and grouped feature reports

pub mod audio_io;
pub mod codec;
#[cfg(test)]
pub(crate) mod test_signals;
pub mod describe;
pub mod dsp;
pub mod manifest;
pub mod metrics;
pub mod tagging;
pub mod translit;

pub use audio_io::AudioBuffer;
pub use codec::{CodeSequence, RvqCodebook};
pub use describe::DescriptionTemplate;
pub use dsp::{MelCepstra, PitchTrack, Spectrogram};
pub use manifest::{Language, UtteranceRecord};
pub use metrics::EvalReport;
pub use tagging::{BinEdges, EmotionLabel, FeatureTags};
pub use translit::{ScriptSpan, TranslitScheme};

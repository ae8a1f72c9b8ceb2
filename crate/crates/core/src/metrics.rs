//! Objective evaluation: Levenshtein word/character error rate, DTW-aligned
//! mel-cepstral distortion, STOI intelligibility, and per-configuration
//! feature reports with CSV emission.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::audio_io::{resample, AudioBuffer};
use crate::dsp::{self, DspError, MelCepstra, DEFAULT_FRAME_LEN, DEFAULT_HOP, DEFAULT_N_MELS, DEFAULT_N_MFCC};
use crate::manifest::UtteranceRecord;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("reference is empty after normalization")]
    EmptyReference,
    #[error("coefficient count mismatch: {a} vs {b}")]
    CoeffMismatch { a: usize, b: usize },
    #[error("frame count mismatch without DTW: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("sample rate mismatch: {a} Hz vs {b} Hz")]
    RateMismatch { a: u32, b: u32 },
    #[error("signal too short: need at least {needed_s} s, got {got_s} s")]
    SignalTooShort { needed_s: f64, got_s: f64 },
    #[error("missing metric for utterance {id:?}")]
    MissingMetric { id: String },
    #[error(transparent)]
    Dsp(#[from] DspError),
}

/// Levenshtein alignment counts at uniform cost 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditCounts {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl EditCounts {
    pub fn total(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Minimal-edit alignment; backtrace ties prefer substitution over insertion
/// over deletion.
pub fn edit_distance<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> EditCounts {
    let n = reference.len();
    let m = hypothesis.len();
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let ins = dp[i][j - 1] + 1;
            let del = dp[i - 1][j] + 1;
            dp[i][j] = sub.min(ins).min(del);
        }
    }

    let mut counts = EditCounts {
        substitutions: 0,
        insertions: 0,
        deletions: 0,
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let cost = usize::from(reference[i - 1] != hypothesis[j - 1]);
            if dp[i][j] == dp[i - 1][j - 1] + cost {
                if cost == 1 {
                    counts.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && dp[i][j] == dp[i][j - 1] + 1 {
            counts.insertions += 1;
            j -= 1;
        } else {
            counts.deletions += 1;
            i -= 1;
        }
    }
    counts
}

/// WER text normalization: lowercase, keep letters/digits/Devanagari and
/// in-word apostrophes, map all other punctuation to spaces, collapse
/// whitespace.
pub fn normalize_for_wer(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_space = true;
    for c in text.chars() {
        let devanagari = ('\u{0900}'..='\u{097F}').contains(&c) && c != '।' && c != '॥';
        let keep = c.is_alphanumeric() || devanagari || c == '\'';
        if keep {
            out.extend(c.to_lowercase());
            last_space = false;
        } else if !last_space {
            out.push(' ');
            last_space = true;
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tokenizer {
    Word,
    Char,
}

fn tokenize(normalized: &str, tokenizer: Tokenizer) -> Vec<String> {
    match tokenizer {
        Tokenizer::Word => normalized.split_whitespace().map(str::to_string).collect(),
        Tokenizer::Char => normalized
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect(),
    }
}

/// `(S + I + D) / len(reference tokens)`. May exceed 1 when the hypothesis is
/// much longer than the reference.
pub fn wer(reference: &str, hypothesis: &str, tokenizer: Tokenizer) -> Result<f64, MetricsError> {
    let ref_tokens = tokenize(&normalize_for_wer(reference), tokenizer);
    let hyp_tokens = tokenize(&normalize_for_wer(hypothesis), tokenizer);
    if ref_tokens.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let counts = edit_distance(&ref_tokens, &hyp_tokens);
    Ok(counts.total() as f64 / ref_tokens.len() as f64)
}

/// Relative improvement of `system` over `baseline` for a lower-is-better
/// metric, as a fraction of the baseline.
pub fn relative_improvement(baseline: f64, system: f64) -> f64 {
    (baseline - system) / baseline
}

/// Monotone minimum-cost path through `cost` from `(0,0)` to `(n-1,m-1)`
/// with steps down/right/diagonal; ties prefer the diagonal, then the
/// vertical step.
pub fn dtw_align(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = cost.len();
    assert!(n >= 1, "cost matrix must be non-empty");
    let m = cost[0].len();
    assert!(m >= 1 && cost.iter().all(|r| r.len() == m), "ragged cost matrix");

    let mut acc = vec![vec![f64::INFINITY; m]; n];
    acc[0][0] = cost[0][0];
    for i in 0..n {
        for j in 0..m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            if i > 0 && j > 0 {
                best = best.min(acc[i - 1][j - 1]);
            }
            if i > 0 {
                best = best.min(acc[i - 1][j]);
            }
            if j > 0 {
                best = best.min(acc[i][j - 1]);
            }
            acc[i][j] = cost[i][j] + best;
        }
    }

    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && acc[i][j] == cost[i][j] + acc[i - 1][j - 1] {
            i -= 1;
            j -= 1;
        } else if i > 0 && acc[i][j] == cost[i][j] + acc[i - 1][j] {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }
    path.reverse();
    path
}

/// Mel-cepstral distortion in dB (Kubichek convention, coefficient 0
/// excluded): per aligned frame pair `(10/ln 10)·sqrt(2·Σ(c_i − c'_i)²)`,
/// averaged over the DTW path (or frame by frame when `use_dtw` is false).
pub fn mcd(reference: &MelCepstra, synthesized: &MelCepstra, use_dtw: bool) -> Result<f64, MetricsError> {
    if reference.n_coeffs != synthesized.n_coeffs {
        return Err(MetricsError::CoeffMismatch {
            a: reference.n_coeffs,
            b: synthesized.n_coeffs,
        });
    }
    let n = reference.coeffs.len();
    let m = synthesized.coeffs.len();
    if n == 0 || m == 0 || (!use_dtw && n != m) {
        return Err(MetricsError::LengthMismatch { a: n, b: m });
    }

    let frame_distance = |a: &[f64], b: &[f64]| -> f64 {
        a[1..]
            .iter()
            .zip(&b[1..])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let scale = 10.0 / std::f64::consts::LN_10 * std::f64::consts::SQRT_2;

    let pairs: Vec<(usize, usize)> = if use_dtw {
        let cost: Vec<Vec<f64>> = reference
            .coeffs
            .iter()
            .map(|a| {
                synthesized
                    .coeffs
                    .iter()
                    .map(|b| frame_distance(a, b))
                    .collect()
            })
            .collect();
        dtw_align(&cost)
    } else {
        (0..n).map(|i| (i, i)).collect()
    };

    let total: f64 = pairs
        .iter()
        .map(|&(i, j)| scale * frame_distance(&reference.coeffs[i], &synthesized.coeffs[j]))
        .sum();
    Ok(total / pairs.len() as f64)
}

// STOI constants: 10 kHz analysis, 256-sample frames zero-padded to 512,
// 15 one-third octave bands from 150 Hz, 30-frame (384 ms) segments,
// -15 dB clipping bound, 40 dB silent-frame dynamic range.
const STOI_RATE: u32 = 10_000;
const STOI_FRAME: usize = 256;
const STOI_FFT: usize = 512;
const STOI_HOP: usize = 128;
const STOI_BANDS: usize = 15;
const STOI_LOWEST_CF: f64 = 150.0;
const STOI_SEGMENT: usize = 30;
const STOI_BETA_DB: f64 = -15.0;
const STOI_DYN_RANGE_DB: f64 = 40.0;

fn stoi_window() -> Vec<f64> {
    // Symmetric Hann with the endpoint zeros trimmed.
    (1..=STOI_FRAME)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / (STOI_FRAME + 1) as f64).cos())
        .collect()
}

fn frame_starts(len: usize) -> Vec<usize> {
    if len < STOI_FRAME {
        return Vec::new();
    }
    (0..=(len - STOI_FRAME) / STOI_HOP)
        .map(|f| f * STOI_HOP)
        .collect()
}

/// Drop frames more than 40 dB below the loudest clean frame, then
/// overlap-add the survivors of both signals back together.
fn remove_silent_frames(clean: &[f64], degraded: &[f64], window: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let starts = frame_starts(clean.len());
    let energies: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let e: f64 = (0..STOI_FRAME)
                .map(|n| {
                    let v = clean[s + n] * window[n];
                    v * v
                })
                .sum();
            20.0 * (e.sqrt() + f64::MIN_POSITIVE).log10()
        })
        .collect();
    let max_db = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energies)
        .filter(|(_, &e)| e > max_db - STOI_DYN_RANGE_DB)
        .map(|(&s, _)| s)
        .collect();

    let out_len = if kept.is_empty() {
        0
    } else {
        (kept.len() - 1) * STOI_HOP + STOI_FRAME
    };
    let mut out_clean = vec![0.0f64; out_len];
    let mut out_degraded = vec![0.0f64; out_len];
    for (k, &s) in kept.iter().enumerate() {
        let dst = k * STOI_HOP;
        for n in 0..STOI_FRAME {
            out_clean[dst + n] += clean[s + n] * window[n];
            out_degraded[dst + n] += degraded[s + n] * window[n];
        }
    }
    (out_clean, out_degraded)
}

/// One-third octave band energies per frame: `[n_frames][STOI_BANDS]`.
fn third_octave_bands(signal: &[f64], window: &[f64]) -> Vec<Vec<f64>> {
    use rustfft::num_complex::Complex;
    let mut planner = rustfft::FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(STOI_FFT);

    // Band edges on the 512-point grid.
    let bin_hz = STOI_RATE as f64 / STOI_FFT as f64;
    let bands: Vec<(f64, f64)> = (0..STOI_BANDS)
        .map(|k| {
            let cf = STOI_LOWEST_CF * 2f64.powf(k as f64 / 3.0);
            (cf * 2f64.powf(-1.0 / 6.0), cf * 2f64.powf(1.0 / 6.0))
        })
        .collect();

    frame_starts(signal.len())
        .iter()
        .map(|&s| {
            let mut buf = vec![Complex::new(0.0, 0.0); STOI_FFT];
            for n in 0..STOI_FRAME {
                buf[n] = Complex::new(signal[s + n] * window[n], 0.0);
            }
            fft.process(&mut buf);
            bands
                .iter()
                .map(|&(lo, hi)| {
                    let mut acc = 0.0f64;
                    for (bin, c) in buf[..STOI_FFT / 2 + 1].iter().enumerate() {
                        let f = bin as f64 * bin_hz;
                        if f >= lo && f < hi {
                            acc += c.norm_sqr();
                        }
                    }
                    acc.sqrt()
                })
                .collect()
        })
        .collect()
}

/// Short-time objective intelligibility of `degraded` against `clean`,
/// clamped to `[0, 1]` for reporting.
pub fn stoi(clean: &AudioBuffer, degraded: &AudioBuffer) -> Result<f64, MetricsError> {
    if clean.sample_rate != degraded.sample_rate {
        return Err(MetricsError::RateMismatch {
            a: clean.sample_rate,
            b: degraded.sample_rate,
        });
    }
    let duration = clean.duration_seconds().min(degraded.duration_seconds());
    if duration < 1.0 {
        return Err(MetricsError::SignalTooShort {
            needed_s: 1.0,
            got_s: duration,
        });
    }

    let clean10 = resample(clean, STOI_RATE);
    let degraded10 = resample(degraded, STOI_RATE);
    let len = clean10.len().min(degraded10.len());
    let clean_samples: Vec<f64> = clean10.samples[..len].iter().map(|&v| v as f64).collect();
    let degraded_samples: Vec<f64> = degraded10.samples[..len].iter().map(|&v| v as f64).collect();

    let window = stoi_window();
    let (clean_active, degraded_active) =
        remove_silent_frames(&clean_samples, &degraded_samples, &window);

    let x_bands = third_octave_bands(&clean_active, &window);
    let y_bands = third_octave_bands(&degraded_active, &window);
    let n_frames = x_bands.len().min(y_bands.len());
    if n_frames < STOI_SEGMENT {
        return Err(MetricsError::SignalTooShort {
            needed_s: 1.0,
            got_s: n_frames as f64 * STOI_HOP as f64 / STOI_RATE as f64,
        });
    }

    let clip = 10f64.powf(-STOI_BETA_DB / 20.0); // ≈ 5.62
    let mut total = 0.0f64;
    let mut cells = 0usize;
    for end in STOI_SEGMENT..=n_frames {
        let seg = end - STOI_SEGMENT..end;
        for band in 0..STOI_BANDS {
            let x: Vec<f64> = seg.clone().map(|f| x_bands[f][band]).collect();
            let y: Vec<f64> = seg.clone().map(|f| y_bands[f][band]).collect();
            let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if y_norm <= f64::MIN_POSITIVE {
                continue;
            }
            let alpha = x_norm / y_norm;
            let y_clipped: Vec<f64> = x
                .iter()
                .zip(&y)
                .map(|(&xv, &yv)| (alpha * yv).min(xv * (1.0 + clip)))
                .collect();

            let x_mean = x.iter().sum::<f64>() / x.len() as f64;
            let y_mean = y_clipped.iter().sum::<f64>() / y_clipped.len() as f64;
            let mut num = 0.0;
            let mut xx = 0.0;
            let mut yy = 0.0;
            for (xv, yv) in x.iter().zip(&y_clipped) {
                let dx = xv - x_mean;
                let dy = yv - y_mean;
                num += dx * dy;
                xx += dx * dx;
                yy += dy * dy;
            }
            if xx <= 1e-20 || yy <= 1e-20 {
                continue; // flat envelope carries no intelligibility signal
            }
            total += num / (xx * yy).sqrt();
            cells += 1;
        }
    }
    if cells == 0 {
        return Ok(0.0);
    }
    Ok((total / cells as f64).clamp(0.0, 1.0))
}

/// The spectral feature summary reported per configuration: mean spectral
/// centroid, pooled std of MFCC coefficients 1..C-1, mean ZCR, mean RMS
/// energy, and duration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralFeatures {
    pub mean_spectral_centroid_hz: f64,
    pub mfcc_std: f64,
    pub mean_zcr: f64,
    pub mean_energy: f64,
    pub duration_s: f64,
}

/// Pooled population std over coefficients 1..C-1 of all frames.
pub fn mfcc_std(cepstra: &MelCepstra) -> f64 {
    let values: Vec<f64> = cepstra
        .coeffs
        .iter()
        .flat_map(|row| row[1..].iter().copied())
        .collect();
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Compute the Fig.-style spectral features of one utterance with the
/// default analysis parameters.
pub fn spectral_features(buf: &AudioBuffer) -> Result<SpectralFeatures, MetricsError> {
    let spec = dsp::stft(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)?;
    let centroids = dsp::spectral_centroid(&spec);
    let mel = dsp::mel_spectrogram(&spec, DEFAULT_N_MELS, 0.0, buf.sample_rate as f64 / 2.0);
    let cepstra = dsp::mfcc(&mel, DEFAULT_N_MFCC, buf.sample_rate, DEFAULT_HOP);
    let zcr = dsp::zero_crossing_rate(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)?;
    let energy = dsp::rms_energy(buf, DEFAULT_FRAME_LEN, DEFAULT_HOP)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    Ok(SpectralFeatures {
        mean_spectral_centroid_hz: mean(&centroids),
        mfcc_std: mfcc_std(&cepstra),
        mean_zcr: mean(&zcr),
        mean_energy: mean(&energy),
        duration_s: buf.duration_seconds(),
    })
}

/// Everything the report needs for one utterance. PESQ is never computed
/// here; it is an externally supplied column.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UtteranceMetrics {
    pub wer: f64,
    pub mcd_db: f64,
    pub stoi: f64,
    pub pesq: Option<f64>,
    pub features: SpectralFeatures,
}

/// One (language, emotion) configuration row of arithmetic means.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub language: String,
    pub emotion: String,
    pub n_utterances: usize,
    pub wer: f64,
    pub mcd_db: f64,
    pub stoi: f64,
    pub pesq: Option<f64>,
    pub mean_spectral_centroid_hz: f64,
    pub mfcc_std: f64,
    pub mean_zcr: f64,
    pub mean_energy: f64,
    pub mean_duration_s: f64,
}

/// Grouped metric table, rows ordered language then emotion, lexicographic.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

/// Fixed column order for the grouped CSV.
pub const REPORT_COLUMNS: [&str; 12] = [
    "language",
    "emotion",
    "n_utterances",
    "wer",
    "mcd_db",
    "stoi",
    "pesq",
    "mean_spectral_centroid_hz",
    "mfcc_std",
    "mean_zcr",
    "mean_energy",
    "mean_duration_s",
];

/// Group per-utterance metrics into the per-configuration report.
pub fn build_report(
    records: &[UtteranceRecord],
    metrics: &BTreeMap<String, UtteranceMetrics>,
) -> Result<EvalReport, MetricsError> {
    let mut groups: BTreeMap<(String, String), Vec<&UtteranceMetrics>> = BTreeMap::new();
    for record in records {
        let m = metrics
            .get(&record.id)
            .ok_or_else(|| MetricsError::MissingMetric {
                id: record.id.clone(),
            })?;
        groups
            .entry((
                record.language.as_str().to_string(),
                record.emotion.as_str().to_string(),
            ))
            .or_default()
            .push(m);
    }

    let rows = groups
        .into_iter()
        .map(|((language, emotion), ms)| {
            let n = ms.len() as f64;
            let mean = |f: &dyn Fn(&UtteranceMetrics) -> f64| ms.iter().map(|m| f(m)).sum::<f64>() / n;
            let pesq_values: Vec<f64> = ms.iter().filter_map(|m| m.pesq).collect();
            ReportRow {
                language,
                emotion,
                n_utterances: ms.len(),
                wer: mean(&|m| m.wer),
                mcd_db: mean(&|m| m.mcd_db),
                stoi: mean(&|m| m.stoi),
                pesq: if pesq_values.is_empty() {
                    None
                } else {
                    Some(pesq_values.iter().sum::<f64>() / pesq_values.len() as f64)
                },
                mean_spectral_centroid_hz: mean(&|m| m.features.mean_spectral_centroid_hz),
                mfcc_std: mean(&|m| m.features.mfcc_std),
                mean_zcr: mean(&|m| m.features.mean_zcr),
                mean_energy: mean(&|m| m.features.mean_energy),
                mean_duration_s: mean(&|m| m.features.duration_s),
            }
        })
        .collect();
    Ok(EvalReport { rows })
}

fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn opt_f64(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

impl EvalReport {
    /// Grouped CSV with the documented column order.
    pub fn to_csv(&self) -> String {
        let mut out = REPORT_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                csv_field(&r.language),
                csv_field(&r.emotion),
                r.n_utterances,
                r.wer,
                r.mcd_db,
                r.stoi,
                opt_f64(r.pesq),
                r.mean_spectral_centroid_hz,
                r.mfcc_std,
                r.mean_zcr,
                r.mean_energy,
                r.mean_duration_s
            ));
        }
        out
    }

    /// Plain table for terminal output, one row per group.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<10} {:<12} {:>3} {:>8} {:>8} {:>6} {:>10} {:>8} {:>7} {:>8} {:>7}\n",
            "language", "emotion", "n", "wer", "mcd_db", "stoi", "centroid", "mfccstd", "zcr", "energy", "dur_s"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:<12} {:>3} {:>8.4} {:>8.3} {:>6.3} {:>10.1} {:>8.3} {:>7.4} {:>8.4} {:>7.2}\n",
                r.language,
                r.emotion,
                r.n_utterances,
                r.wer,
                r.mcd_db,
                r.stoi,
                r.mean_spectral_centroid_hz,
                r.mfcc_std,
                r.mean_zcr,
                r.mean_energy,
                r.mean_duration_s
            ));
        }
        out
    }
}

/// Long-format CSV (`utterance_id,language,emotion,metric,value`) for
/// external plotting.
pub fn long_format_csv(
    records: &[UtteranceRecord],
    metrics: &BTreeMap<String, UtteranceMetrics>,
) -> Result<String, MetricsError> {
    let mut out = String::from("utterance_id,language,emotion,metric,value\n");
    for record in records {
        let m = metrics
            .get(&record.id)
            .ok_or_else(|| MetricsError::MissingMetric {
                id: record.id.clone(),
            })?;
        let mut rows: Vec<(&str, f64)> = vec![
            ("wer", m.wer),
            ("mcd_db", m.mcd_db),
            ("stoi", m.stoi),
            ("mean_spectral_centroid_hz", m.features.mean_spectral_centroid_hz),
            ("mfcc_std", m.features.mfcc_std),
            ("mean_zcr", m.features.mean_zcr),
            ("mean_energy", m.features.mean_energy),
            ("duration_s", m.features.duration_s),
        ];
        if let Some(p) = m.pesq {
            rows.push(("pesq", p));
        }
        for (metric, value) in rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&record.id),
                record.language.as_str(),
                record.emotion.as_str(),
                metric,
                value
            ));
        }
    }
    Ok(out)
}

/// Per-utterance wide CSV.
pub fn utterance_csv(
    records: &[UtteranceRecord],
    metrics: &BTreeMap<String, UtteranceMetrics>,
) -> Result<String, MetricsError> {
    let mut out = String::from(
        "utterance_id,language,emotion,wer,mcd_db,stoi,pesq,mean_spectral_centroid_hz,mfcc_std,mean_zcr,mean_energy,duration_s\n",
    );
    for record in records {
        let m = metrics
            .get(&record.id)
            .ok_or_else(|| MetricsError::MissingMetric {
                id: record.id.clone(),
            })?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&record.id),
            record.language.as_str(),
            record.emotion.as_str(),
            m.wer,
            m.mcd_db,
            m.stoi,
            opt_f64(m.pesq),
            m.features.mean_spectral_centroid_hz,
            m.features.mfcc_std,
            m.features.mean_zcr,
            m.features.mean_energy,
            m.features.duration_s
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::Language;
    use crate::tagging::EmotionLabel;
    use crate::test_signals;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edit_distance_basics() {
        let a = ["a", "b", "c"];
        assert_eq!(
            edit_distance(&a, &a),
            EditCounts {
                substitutions: 0,
                insertions: 0,
                deletions: 0
            }
        );
        let counts = edit_distance(&a, &["a", "x", "c"]);
        assert_eq!(
            counts,
            EditCounts {
                substitutions: 1,
                insertions: 0,
                deletions: 0
            }
        );
        // Prefer substitutions over insertion+deletion pairs on ties.
        let counts = edit_distance(&["a", "b"], &["b", "a"]);
        assert_eq!(counts.substitutions, 2);
        assert_eq!(counts.total(), 2);
    }

    /// Enumerate every monotone alignment, then select the minimal-cost one
    /// the backtrace preference (diag > ins > del, read from the end) picks.
    pub(crate) fn edit_distance_oracle(reference: &[u8], hypothesis: &[u8]) -> EditCounts {
        #[derive(Clone)]
        struct Path {
            steps: Vec<u8>, // 0 diag, 1 ins, 2 del
            cost: usize,
            counts: EditCounts,
        }
        let mut complete: Vec<Path> = Vec::new();
        let mut stack = vec![(
            0usize,
            0usize,
            Path {
                steps: vec![],
                cost: 0,
                counts: EditCounts {
                    substitutions: 0,
                    insertions: 0,
                    deletions: 0,
                },
            },
        )];
        while let Some((i, j, path)) = stack.pop() {
            if i == reference.len() && j == hypothesis.len() {
                complete.push(path);
                continue;
            }
            if i < reference.len() && j < hypothesis.len() {
                let mut p = path.clone();
                p.steps.push(0);
                if reference[i] != hypothesis[j] {
                    p.cost += 1;
                    p.counts.substitutions += 1;
                }
                stack.push((i + 1, j + 1, p));
            }
            if j < hypothesis.len() {
                let mut p = path.clone();
                p.steps.push(1);
                p.cost += 1;
                p.counts.insertions += 1;
                stack.push((i, j + 1, p));
            }
            if i < reference.len() {
                let mut p = path.clone();
                p.steps.push(2);
                p.cost += 1;
                p.counts.deletions += 1;
                stack.push((i + 1, j, p));
            }
        }
        let min_cost = complete.iter().map(|p| p.cost).min().unwrap();
        complete
            .into_iter()
            .filter(|p| p.cost == min_cost)
            .min_by_key(|p| {
                let mut rev = p.steps.clone();
                rev.reverse();
                rev
            })
            .map(|p| p.counts)
            .unwrap()
    }

    #[test]
    fn edit_distance_matches_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..60 {
            let n = rng.random_range(0..=7);
            let m = rng.random_range(0..=7);
            let reference: Vec<u8> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let hypothesis: Vec<u8> = (0..m).map(|_| rng.random_range(0..3)).collect();
            let got = edit_distance(&reference, &hypothesis);
            let want = edit_distance_oracle(&reference, &hypothesis);
            assert_eq!(got, want, "ref {reference:?} hyp {hypothesis:?}");
        }
    }

    #[test]
    fn edit_distance_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let gen = |rng: &mut ChaCha8Rng| -> Vec<u8> {
                let n = rng.random_range(0..=6);
                (0..n).map(|_| rng.random_range(0..3)).collect()
            };
            let (a, b, c) = (gen(&mut rng), gen(&mut rng), gen(&mut rng));
            let ac = edit_distance(&a, &c).total();
            let ab = edit_distance(&a, &b).total();
            let bc = edit_distance(&b, &c).total();
            assert!(ac <= ab + bc);
        }
    }

    #[test]
    fn wer_cases() {
        assert_eq!(wer("Hello, World!", "hello world", Tokenizer::Word).unwrap(), 0.0);
        let w = wer("one two three", "one 2 three", Tokenizer::Word).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            wer("...", "something", Tokenizer::Word),
            Err(MetricsError::EmptyReference)
        ));
        // Empty hypothesis: everything deleted.
        assert_eq!(wer("one two", "", Tokenizer::Word).unwrap(), 1.0);
        // Hypothesis much longer than reference: WER may exceed 1.
        assert!(wer("one", "a b c d", Tokenizer::Word).unwrap() > 1.0);
        // Devanagari splits on whitespace only.
        let w = wer("नमस्ते दुनिया", "नमस्ते संसार", Tokenizer::Word).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
        // Char tokenizer.
        let w = wer("abc", "abd", Tokenizer::Char).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn wer_invariant_under_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let gen = |rng: &mut ChaCha8Rng, n: usize| -> Vec<String> {
                (0..n)
                    .map(|_| ["aa", "bb", "cc"][rng.random_range(0..3)].to_string())
                    .collect()
            };
            let r = gen(&mut rng, 5);
            let h = gen(&mut rng, 6);
            let map = |t: &str| match t {
                "aa" => "xx",
                "bb" => "yy",
                _ => "zz",
            };
            let r2: Vec<String> = r.iter().map(|t| map(t).to_string()).collect();
            let h2: Vec<String> = h.iter().map(|t| map(t).to_string()).collect();
            assert_eq!(
                edit_distance(&r, &h).total(),
                edit_distance(&r2, &h2).total()
            );
        }
    }

    #[test]
    fn paper_wer_improvement_arithmetic() {
        // The report computes relative improvement from its own inputs:
        // (15.4 − 11.8) / 15.4 ≈ 23.4%, not the abstract's 23.7%.
        let improvement = relative_improvement(15.4, 11.8);
        assert!((improvement - 0.2337662337662338).abs() < 1e-12);
    }

    #[test]
    fn dtw_basics() {
        assert_eq!(dtw_align(&[vec![1.0]]), vec![(0, 0)]);

        let n = 5;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        let path = dtw_align(&cost);
        assert_eq!(path, (0..n).map(|i| (i, i)).collect::<Vec<_>>());
    }

    /// Every monotone path from (0,0) to (n-1,m-1), minimal total cost.
    pub(crate) fn dtw_oracle(cost: &[Vec<f64>]) -> (f64, Vec<(usize, usize)>) {
        let n = cost.len();
        let m = cost[0].len();
        let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
        let mut stack = vec![(0usize, 0usize, cost[0][0], vec![(0usize, 0usize)])];
        while let Some((i, j, c, path)) = stack.pop() {
            if i == n - 1 && j == m - 1 {
                if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                    best = Some((c, path));
                }
                continue;
            }
            if i + 1 < n && j + 1 < m {
                let mut p = path.clone();
                p.push((i + 1, j + 1));
                stack.push((i + 1, j + 1, c + cost[i + 1][j + 1], p));
            }
            if i + 1 < n {
                let mut p = path.clone();
                p.push((i + 1, j));
                stack.push((i + 1, j, c + cost[i + 1][j], p));
            }
            if j + 1 < m {
                let mut p = path.clone();
                p.push((i, j + 1));
                stack.push((i, j + 1, c + cost[i][j + 1], p));
            }
        }
        best.unwrap()
    }

    #[test]
    fn dtw_matches_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let n = rng.random_range(1..=5);
            let m = rng.random_range(1..=7);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect();
            let path = dtw_align(&cost);
            let path_cost: f64 = path.iter().map(|&(i, j)| cost[i][j]).sum();
            let (oracle_cost, oracle_path) = dtw_oracle(&cost);
            assert_eq!(path, oracle_path);
            assert!((path_cost - oracle_cost).abs() < 1e-12);
        }
    }

    #[test]
    fn dtw_path_cost_at_most_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 6;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let path = dtw_align(&cost);
        let path_cost: f64 = path.iter().map(|&(i, j)| cost[i][j]).sum();
        let diag_cost: f64 = (0..n).map(|i| cost[i][i]).sum();
        assert!(path_cost <= diag_cost + 1e-12);
    }

    fn cepstra(rows: Vec<Vec<f64>>) -> MelCepstra {
        MelCepstra {
            n_coeffs: rows[0].len(),
            coeffs: rows,
            sample_rate: 44100,
            hop: 512,
        }
    }

    #[test]
    fn mcd_cases() {
        let a = cepstra(vec![vec![1.0, 0.5, -0.2], vec![0.8, 0.1, 0.3]]);
        assert_eq!(mcd(&a, &a, false).unwrap(), 0.0);
        assert_eq!(mcd(&a, &a, true).unwrap(), 0.0);

        // Single frame differing only in c1 by delta.
        let delta = 0.37;
        let x = cepstra(vec![vec![1.0, 0.5, -0.2]]);
        let y = cepstra(vec![vec![1.0, 0.5 + delta, -0.2]]);
        let expected = 10.0 / std::f64::consts::LN_10 * std::f64::consts::SQRT_2 * delta;
        assert!((mcd(&x, &y, false).unwrap() - expected).abs() < 1e-12);

        // Duplicated frames align away under DTW.
        let stretched = cepstra(vec![
            vec![1.0, 0.5, -0.2],
            vec![1.0, 0.5, -0.2],
            vec![0.8, 0.1, 0.3],
            vec![0.8, 0.1, 0.3],
        ]);
        assert_eq!(mcd(&a, &stretched, true).unwrap(), 0.0);
        assert!(matches!(
            mcd(&a, &stretched, false),
            Err(MetricsError::LengthMismatch { a: 2, b: 4 })
        ));

        let narrow = cepstra(vec![vec![1.0, 0.5]]);
        assert!(matches!(
            mcd(&a, &narrow, true),
            Err(MetricsError::CoeffMismatch { a: 3, b: 2 })
        ));
    }

    #[test]
    fn mcd_symmetric_without_dtw() {
        let a = cepstra(vec![vec![1.0, 0.5, -0.2], vec![0.8, 0.1, 0.3]]);
        let b = cepstra(vec![vec![0.9, 0.4, 0.0], vec![0.7, 0.2, 0.1]]);
        assert!((mcd(&a, &b, false).unwrap() - mcd(&b, &a, false).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn stoi_self_is_near_one() {
        let buf = test_signals::voiced_utterance(2);
        let score = stoi(&buf, &buf).unwrap();
        assert!(score >= 0.99, "self STOI {score}");
    }

    #[test]
    fn stoi_noise_vs_structure_is_low() {
        let clean = test_signals::tone_complex(16000, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = AudioBuffer::new(
            (0..clean.len())
                .map(|_| rng.random_range(-0.5..0.5))
                .collect(),
            clean.sample_rate,
        );
        let score = stoi(&clean, &noise).unwrap();
        assert!(score <= 0.3, "noise STOI {score}");
    }

    #[test]
    fn stoi_decreases_with_snr() {
        let clean = test_signals::voiced_utterance(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise: Vec<f64> = (0..clean.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let signal_power: f64 = clean
            .samples
            .iter()
            .map(|&s| s as f64 * s as f64)
            .sum::<f64>()
            / clean.len() as f64;
        let noise_power = noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64;

        let mut scores = Vec::new();
        for snr_db in [20.0, 10.0, 0.0] {
            let target = signal_power / 10f64.powf(snr_db / 10.0);
            let gain = (target / noise_power).sqrt();
            let degraded = AudioBuffer::new(
                clean
                    .samples
                    .iter()
                    .zip(&noise)
                    .map(|(&s, &n)| s + (n * gain) as f32)
                    .collect(),
                clean.sample_rate,
            );
            scores.push(stoi(&clean, &degraded).unwrap());
        }
        assert!(
            scores[0] > scores[1] && scores[1] > scores[2],
            "scores not strictly decreasing: {scores:?}"
        );
    }

    #[test]
    fn stoi_invariant_to_shared_gain() {
        let clean = test_signals::voiced_utterance(5);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let degraded = AudioBuffer::new(
            clean
                .samples
                .iter()
                .map(|&s| s + rng.random_range(-0.05..0.05))
                .collect(),
            clean.sample_rate,
        );
        let a = stoi(&clean, &degraded).unwrap();
        let scale = |b: &AudioBuffer| AudioBuffer {
            samples: b.samples.iter().map(|&s| s * 0.25).collect(),
            sample_rate: b.sample_rate,
            source_id: None,
        };
        let b = stoi(&scale(&clean), &scale(&degraded)).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn stoi_preconditions() {
        let a = AudioBuffer::new(vec![0.1; 44100], 44100);
        let b = AudioBuffer::new(vec![0.1; 22050], 22050);
        assert!(matches!(stoi(&a, &b), Err(MetricsError::RateMismatch { .. })));
        let short = AudioBuffer::new(vec![0.1; 8000], 44100);
        assert!(matches!(
            stoi(&short, &short),
            Err(MetricsError::SignalTooShort { .. })
        ));
    }

    fn dummy_metrics(energy: f64) -> UtteranceMetrics {
        UtteranceMetrics {
            wer: 0.1,
            mcd_db: 4.0,
            stoi: 0.9,
            pesq: None,
            features: SpectralFeatures {
                mean_spectral_centroid_hz: 1500.0,
                mfcc_std: 1.1,
                mean_zcr: 0.05,
                mean_energy: energy,
                duration_s: 2.0,
            },
        }
    }

    fn record(id: &str, language: Language, emotion: EmotionLabel) -> UtteranceRecord {
        UtteranceRecord {
            id: id.into(),
            audio_path: format!("{id}.wav"),
            transcription: "text".into(),
            language,
            emotion,
            speaker: "s".into(),
            tags: None,
            description: None,
        }
    }

    #[test]
    fn report_grouping_and_means() {
        let records = vec![
            record("u1", Language::Hindi, EmotionLabel::Default),
            record("u2", Language::Hindi, EmotionLabel::Default),
        ];
        let mut metrics = BTreeMap::new();
        metrics.insert("u1".to_string(), dummy_metrics(0.2));
        metrics.insert("u2".to_string(), dummy_metrics(0.4));
        let report = build_report(&records, &metrics).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].n_utterances, 2);
        assert!((report.rows[0].mean_energy - 0.3).abs() < 1e-12);
    }

    #[test]
    fn report_four_configurations() {
        // The four Fig.-style configurations: two languages × two emotions.
        let records = vec![
            record("u1", Language::Hindi, EmotionLabel::Default),
            record("u2", Language::Hindi, EmotionLabel::Happy),
            record("u3", Language::English, EmotionLabel::Default),
            record("u4", Language::English, EmotionLabel::Enunciation),
        ];
        let metrics: BTreeMap<String, UtteranceMetrics> = records
            .iter()
            .map(|r| (r.id.clone(), dummy_metrics(0.25)))
            .collect();
        let report = build_report(&records, &metrics).unwrap();
        assert_eq!(report.rows.len(), 4);
        // Deterministic order: language then emotion, lexicographic.
        let keys: Vec<(String, String)> = report
            .rows
            .iter()
            .map(|r| (r.language.clone(), r.emotion.clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);

        let csv = report.to_csv();
        assert!(csv.starts_with(&REPORT_COLUMNS.join(",")));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn report_missing_metric_names_utterance() {
        let records = vec![record("u1", Language::Hindi, EmotionLabel::Default)];
        let metrics = BTreeMap::new();
        match build_report(&records, &metrics) {
            Err(MetricsError::MissingMetric { id }) => assert_eq!(id, "u1"),
            other => panic!("expected MissingMetric, got {other:?}"),
        }
    }

    #[test]
    fn long_format_lists_all_metrics() {
        let records = vec![record("u1", Language::Hindi, EmotionLabel::Default)];
        let mut metrics = BTreeMap::new();
        metrics.insert("u1".to_string(), dummy_metrics(0.2));
        let csv = long_format_csv(&records, &metrics).unwrap();
        assert_eq!(csv.lines().count(), 9); // header + 8 metrics (no pesq)
        assert!(csv.contains("u1,hindi,default,wer,0.1"));
    }
}

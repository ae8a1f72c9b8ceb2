//! Frame-level signal analysis: STFT, mel spectrogram, MFCC, F0 tracking,
//! zero-crossing rate, RMS energy, and spectral centroid.
//!
//! All functions are pure and deterministic: identical inputs give
//! bit-identical outputs. Frames are laid out `[n_frames][n_bins]`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::audio_io::AudioBuffer;

/// Analysis defaults: 46 ms / 11.6 ms at 44.1 kHz.
pub const DEFAULT_FRAME_LEN: usize = 2048;
pub const DEFAULT_HOP: usize = 512;
pub const DEFAULT_N_MELS: usize = 80;
pub const DEFAULT_N_MFCC: usize = 13;

/// F0 search range and voicing decision threshold.
pub const F0_MIN_HZ: f64 = 50.0;
pub const F0_MAX_HZ: f64 = 500.0;
pub const VOICING_THRESHOLD: f64 = 0.3;

/// Log floor applied before the cepstral DCT so silence stays finite.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("signal too short: need at least {needed} samples, got {got}")]
    SignalTooShort { needed: usize, got: usize },
}

/// Magnitude STFT. `n_bins == frame_len/2 + 1`.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub magnitudes: Vec<Vec<f32>>,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn n_bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    /// Center frequency of bin `k`.
    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate as f64 / self.frame_len as f64
    }
}

/// Mel-frequency cepstra. Coefficient 0 is the energy term.
#[derive(Debug, Clone)]
pub struct MelCepstra {
    pub coeffs: Vec<Vec<f64>>,
    pub n_coeffs: usize,
    pub sample_rate: u32,
    pub hop: usize,
}

/// Per-frame F0 estimates; unvoiced frames carry `f0_hz == 0.0`.
#[derive(Debug, Clone)]
pub struct PitchTrack {
    pub f0_hz: Vec<f64>,
    pub voicing: Vec<bool>,
    pub hop: usize,
    pub sample_rate: u32,
}

impl PitchTrack {
    pub fn voiced_values(&self) -> Vec<f64> {
        self.f0_hz
            .iter()
            .zip(&self.voicing)
            .filter(|(_, &v)| v)
            .map(|(&f, _)| f)
            .collect()
    }
}

fn frame_count(len: usize, frame_len: usize, hop: usize) -> Result<usize, DspError> {
    if len < frame_len {
        return Err(DspError::SignalTooShort {
            needed: frame_len,
            got: len,
        });
    }
    Ok((len - frame_len) / hop + 1)
}

/// Periodic Hann window.
fn hann(frame_len: usize) -> Vec<f64> {
    (0..frame_len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / frame_len as f64).cos())
        .collect()
}

/// Hann-windowed magnitude STFT.
///
/// `frame_len` must be a power of two ≥ 2 and `0 < hop ≤ frame_len`.
pub fn stft(buf: &AudioBuffer, frame_len: usize, hop: usize) -> Result<Spectrogram, DspError> {
    assert!(
        frame_len >= 2 && frame_len.is_power_of_two(),
        "frame_len must be a power of two >= 2"
    );
    assert!(hop > 0 && hop <= frame_len, "hop must be in (0, frame_len]");
    let n_frames = frame_count(buf.len(), frame_len, hop)?;

    let window = hann(frame_len);
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = planner.plan_fft_forward(frame_len);
    let n_bins = frame_len / 2 + 1;

    let mut magnitudes = Vec::with_capacity(n_frames);
    let mut scratch = vec![Complex::new(0.0, 0.0); frame_len];
    for f in 0..n_frames {
        let start = f * hop;
        for (n, c) in scratch.iter_mut().enumerate() {
            *c = Complex::new(buf.samples[start + n] as f64 * window[n], 0.0);
        }
        fft.process(&mut scratch);
        magnitudes.push(scratch[..n_bins].iter().map(|c| c.norm() as f32).collect());
    }

    Ok(Spectrogram {
        magnitudes,
        frame_len,
        hop,
        sample_rate: buf.sample_rate,
    })
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank weights, `[n_mels][n_bins]`, each filter
/// normalized to sum to 1.
pub fn mel_filterbank(
    n_mels: usize,
    n_bins: usize,
    frame_len: usize,
    sample_rate: u32,
    fmin: f64,
    fmax: f64,
) -> Vec<Vec<f32>> {
    assert!(n_mels >= 2, "need at least 2 mel bands");
    assert!(
        0.0 <= fmin && fmin < fmax && fmax <= sample_rate as f64 / 2.0,
        "need 0 <= fmin < fmax <= nyquist"
    );
    let mel_lo = hz_to_mel(fmin);
    let mel_hi = hz_to_mel(fmax);
    let centers: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
        .collect();

    let mut bank = vec![vec![0.0f32; n_bins]; n_mels];
    for m in 0..n_mels {
        let (lo, mid, hi) = (centers[m], centers[m + 1], centers[m + 2]);
        let mut sum = 0.0f64;
        let mut weights = vec![0.0f64; n_bins];
        for (k, w) in weights.iter_mut().enumerate() {
            let f = k as f64 * sample_rate as f64 / frame_len as f64;
            if f > lo && f < hi {
                *w = if f <= mid {
                    (f - lo) / (mid - lo)
                } else {
                    (hi - f) / (hi - mid)
                };
                sum += *w;
            }
        }
        if sum > 0.0 {
            for (k, w) in weights.iter().enumerate() {
                bank[m][k] = (w / sum) as f32;
            }
        }
    }
    bank
}

/// Apply a sum-normalized triangular mel filterbank to the power spectrum.
pub fn mel_spectrogram(spec: &Spectrogram, n_mels: usize, fmin: f64, fmax: f64) -> Vec<Vec<f32>> {
    let bank = mel_filterbank(
        n_mels,
        spec.n_bins(),
        spec.frame_len,
        spec.sample_rate,
        fmin,
        fmax,
    );
    spec.magnitudes
        .iter()
        .map(|frame| {
            bank.iter()
                .map(|filter| {
                    filter
                        .iter()
                        .zip(frame)
                        .map(|(&w, &m)| w as f64 * (m as f64 * m as f64))
                        .sum::<f64>() as f32
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II over `log(mel + 1e-10)`, keeping `n_coeffs` terms.
///
/// Inputs are clamped at zero first, so cepstra stay finite even for
/// reconstructed mel frames that dip slightly negative.
pub fn mfcc(mel: &[Vec<f32>], n_coeffs: usize, sample_rate: u32, hop: usize) -> MelCepstra {
    let n_mels = mel.first().map_or(0, |row| row.len());
    assert!(
        n_coeffs <= n_mels || mel.is_empty(),
        "n_coeffs must not exceed n_mels"
    );
    let coeffs = mel
        .iter()
        .map(|row| {
            let logs: Vec<f64> = row
                .iter()
                .map(|&v| ((v as f64).max(0.0) + LOG_FLOOR).ln())
                .collect();
            dct_ii_orthonormal(&logs, n_coeffs)
        })
        .collect();
    MelCepstra {
        coeffs,
        n_coeffs,
        sample_rate,
        hop,
    }
}

/// Orthonormal DCT-II of `input`, truncated to the first `n_out` terms.
pub fn dct_ii_orthonormal(input: &[f64], n_out: usize) -> Vec<f64> {
    let n = input.len();
    let mut out = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let mut acc = 0.0f64;
        for (i, &v) in input.iter().enumerate() {
            acc += v * (PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * n as f64)).cos();
        }
        let scale = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        out.push(acc * scale);
    }
    out
}

/// Per frame, the fraction of adjacent sample pairs with a strict sign change.
pub fn zero_crossing_rate(
    buf: &AudioBuffer,
    frame_len: usize,
    hop: usize,
) -> Result<Vec<f64>, DspError> {
    let n_frames = frame_count(buf.len(), frame_len, hop)?;
    let mut out = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * hop;
        let frame = &buf.samples[start..start + frame_len];
        let crossings = frame
            .windows(2)
            .filter(|w| (w[0] > 0.0 && w[1] < 0.0) || (w[0] < 0.0 && w[1] > 0.0))
            .count();
        out.push(crossings as f64 / (frame_len - 1) as f64);
    }
    Ok(out)
}

/// Per-frame root-mean-square amplitude.
pub fn rms_energy(buf: &AudioBuffer, frame_len: usize, hop: usize) -> Result<Vec<f64>, DspError> {
    let n_frames = frame_count(buf.len(), frame_len, hop)?;
    let mut out = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * hop;
        let frame = &buf.samples[start..start + frame_len];
        let mean_sq =
            frame.iter().map(|&s| s as f64 * s as f64).sum::<f64>() / frame_len as f64;
        out.push(mean_sq.sqrt());
    }
    Ok(out)
}

/// Magnitude-weighted mean frequency per frame; silent frames yield 0.
pub fn spectral_centroid(spec: &Spectrogram) -> Vec<f64> {
    spec.magnitudes
        .iter()
        .map(|frame| {
            let total: f64 = frame.iter().map(|&m| m as f64).sum();
            if total == 0.0 {
                0.0
            } else {
                frame
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| spec.bin_hz(k) * m as f64)
                    .sum::<f64>()
                    / total
            }
        })
        .collect()
}

/// Autocorrelation F0 tracking over the 50–500 Hz range.
///
/// A frame is voiced when the best peak in the lag search range reaches
/// [`VOICING_THRESHOLD`] of the zero-lag autocorrelation; the peak lag is
/// refined by parabolic interpolation.
pub fn estimate_f0(
    buf: &AudioBuffer,
    frame_len: usize,
    hop: usize,
) -> Result<PitchTrack, DspError> {
    assert!(
        buf.sample_rate >= 2000,
        "sample rate must be at least 2 kHz to resolve 50-500 Hz"
    );
    let fs = buf.sample_rate as f64;
    let lag_min = (fs / F0_MAX_HZ).floor() as usize;
    let lag_max = ((fs / F0_MIN_HZ).ceil() as usize).min(frame_len - 1);
    let n_frames = frame_count(buf.len(), frame_len, hop)?;

    let mut f0_hz = Vec::with_capacity(n_frames);
    let mut voicing = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * hop;
        let frame = &buf.samples[start..start + frame_len];
        let r0: f64 = frame.iter().map(|&s| s as f64 * s as f64).sum();
        if r0 <= 0.0 {
            f0_hz.push(0.0);
            voicing.push(false);
            continue;
        }

        let mut acf = vec![0.0f64; lag_max + 1];
        acf[0] = r0;
        for (lag, slot) in acf.iter_mut().enumerate().skip(lag_min.saturating_sub(1)) {
            let mut acc = 0.0f64;
            for n in 0..frame_len - lag {
                acc += frame[n] as f64 * frame[n + lag] as f64;
            }
            *slot = acc;
        }

        // Best value in the admissible lag range.
        let mut best_lag = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (lag, &v) in acf.iter().enumerate().take(lag_max + 1).skip(lag_min) {
            if v > best_val {
                best_val = v;
                best_lag = lag;
            }
        }

        if best_val / r0 >= VOICING_THRESHOLD {
            // Octave guard: prefer the earliest local maximum within 90% of
            // the best, so the period peak wins over its own multiples.
            for lag in lag_min..=lag_max {
                let rises = lag == 0 || acf[lag] >= acf[lag - 1];
                let falls = lag + 1 > lag_max || acf[lag] >= acf[lag + 1];
                if rises && falls && acf[lag] >= 0.9 * best_val {
                    best_lag = lag;
                    break;
                }
            }
            let mut lag = best_lag as f64;
            if best_lag > lag_min && best_lag < lag_max {
                let (ym1, y0, yp1) = (acf[best_lag - 1], acf[best_lag], acf[best_lag + 1]);
                let denom = ym1 - 2.0 * y0 + yp1;
                if denom.abs() > 1e-12 {
                    let delta = 0.5 * (ym1 - yp1) / denom;
                    if delta.abs() <= 1.0 {
                        lag += delta;
                    }
                }
            }
            let f0 = (fs / lag).clamp(F0_MIN_HZ, F0_MAX_HZ);
            f0_hz.push(f0);
            voicing.push(true);
        } else {
            f0_hz.push(0.0);
            voicing.push(false);
        }
    }

    Ok(PitchTrack {
        f0_hz,
        voicing,
        hop,
        sample_rate: buf.sample_rate,
    })
}

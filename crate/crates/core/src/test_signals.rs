//! Synthetic signals shared across unit tests.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio_io::AudioBuffer;

/// Tone bursts over a white noise floor with an exact segmental SNR: the
/// burst-region signal power relates to the ever-present noise power by
/// `snr_db`, both known from the construction.
pub(crate) fn burst_noise_mixture(snr_db: f64, seed: u64) -> AudioBuffer {
    let fs = 16000u32;
    let dur_s = 2.4;
    let n = (fs as f64 * dur_s) as usize;
    let amp = 0.3f64;
    // Harmonic burst: 200 + 400 + 600 Hz at equal amplitude.
    let signal_power = 3.0 * (amp * amp / 2.0);
    let noise_power = signal_power / 10f64.powf(snr_db / 10.0);
    let noise_amp = (3.0 * noise_power).sqrt(); // uniform [-a, a] has power a²/3
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f32> = (0..n)
        .map(|i| {
            let t = i as f64 / fs as f64;
            let on = ((t / 0.3) as usize).is_multiple_of(2);
            let tone = if on {
                amp * ((2.0 * PI * 200.0 * t).sin()
                    + (2.0 * PI * 400.0 * t).sin()
                    + (2.0 * PI * 600.0 * t).sin())
            } else {
                0.0
            };
            let noise = rng.random_range(-noise_amp..noise_amp);
            (tone + noise) as f32
        })
        .collect();
    AudioBuffer::new(samples, fs)
}

/// Click train convolved with an exponential impulse response of the given
/// RT60 (0 for dry clicks with no tail).
pub(crate) fn click_train(rt60_ms: f64) -> AudioBuffer {
    let fs = 16000u32;
    let n = (fs as f64 * 2.0) as usize;
    let mut samples = vec![0.0f32; n];
    let clicks = [0.1f64, 0.6, 1.1, 1.6];
    for &t0 in &clicks {
        let start = (t0 * fs as f64) as usize;
        if rt60_ms <= 0.0 {
            samples[start] = 0.9;
        } else {
            // 60 dB amplitude decay over rt60: a(t) = exp(-6.9078 t / tau).
            let tau = rt60_ms / 1000.0;
            let span = (fs as f64 * tau * 1.2) as usize;
            for k in 0..span.min(n - start) {
                let t = k as f64 / fs as f64;
                samples[start + k] += (0.9 * (-6.907755 * t / tau).exp()) as f32;
            }
        }
    }
    AudioBuffer::new(samples, fs)
}

/// A speech-shaped tone complex: 150 Hz harmonics with a -6 dB/octave tilt
/// and moderate syllable-rate amplitude modulation.
pub(crate) fn tone_complex(fs: u32, dur_s: f64) -> AudioBuffer {
    let n = (fs as f64 * dur_s) as usize;
    let samples: Vec<f32> = (0..n)
        .map(|i| {
            let t = i as f64 / fs as f64;
            let envelope = 0.8 + 0.2 * (2.0 * PI * 4.0 * t).sin();
            let mut v = 0.0f64;
            for k in 1..=12 {
                v += (2.0 * PI * 150.0 * k as f64 * t).sin() / k as f64;
            }
            (0.25 * envelope * v) as f32
        })
        .collect();
    AudioBuffer::new(samples, fs)
}

/// Seeded clustered random frames, shaped like mel frames: draws around a
/// fixed set of centers with a tight spread.
pub(crate) fn clustered_frames(
    n: usize,
    dim: usize,
    n_centers: usize,
    spread: f32,
    seed: u64,
) -> Vec<Vec<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f32>> = (0..n_centers)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
        .collect();
    (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..n_centers)];
            c.iter().map(|&v| v + rng.random_range(-spread..spread)).collect()
        })
        .collect()
}

/// A voiced 2 s utterance with vibrato, syllable-rate amplitude modulation,
/// and a low noise floor; taggable end to end.
pub(crate) fn voiced_utterance(seed: u64) -> AudioBuffer {
    let fs = 44100u32;
    let n = fs as usize * 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phase = 0.0f64;
    let samples: Vec<f32> = (0..n)
        .map(|i| {
            let t = i as f64 / fs as f64;
            let f0 = 170.0 + 25.0 * (2.0 * PI * 1.3 * t).sin();
            phase += 2.0 * PI * f0 / fs as f64;
            let envelope = 0.55 + 0.45 * (2.0 * PI * 3.0 * t).sin();
            let voice = envelope
                * (0.5 * phase.sin() + 0.25 * (2.0 * phase).sin() + 0.12 * (3.0 * phase).sin());
            let noise = rng.random_range(-0.01..0.01);
            ((voice + noise) * 0.7) as f32
        })
        .collect();
    AudioBuffer::new(samples, fs)
}

//! Shared signal builders for the benchmarks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vaani::audio_io::AudioBuffer;

/// One second of a voiced harmonic signal with a noise floor.
pub fn voiced_signal(sample_rate: u32, seconds: f64, seed: u64) -> AudioBuffer {
    let n = (sample_rate as f64 * seconds) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phase = 0.0f64;
    let samples: Vec<f32> = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate as f64;
            let f0 = 160.0 + 30.0 * (2.0 * PI * 1.4 * t).sin();
            phase += 2.0 * PI * f0 / sample_rate as f64;
            let v = 0.5 * phase.sin() + 0.25 * (2.0 * phase).sin() + 0.12 * (3.0 * phase).sin();
            let envelope = 0.6 + 0.4 * (2.0 * PI * 3.0 * t).sin();
            (0.6 * envelope * v + rng.random_range(-0.01..0.01)) as f32
        })
        .collect();
    AudioBuffer::new(samples, sample_rate)
}

/// Clustered random frames shaped like mel frames.
pub fn clustered_frames(n: usize, dim: usize, seed: u64) -> Vec<Vec<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f32>> = (0..128)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
        .collect();
    (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..128)];
            c.iter().map(|&v| v + rng.random_range(-0.05f32..0.05)).collect()
        })
        .collect()
}

//! Regenerates the bundled mini corpus under `data/mini_corpus/`.
//!
//! Six short synthetic utterances (voiced harmonic "syllables" over a low
//! noise floor) at mixed sample rates and WAV encodings, each with a JSON
//! sidecar carrying the transcription, language, emotion, and speaker.
//!
//!     cargo run -p vaani --example synth_corpus

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vaani::audio_io::{peak_normalize, write_wav, AudioBuffer};

struct Spec {
    id: &'static str,
    transcription: &'static str,
    language: &'static str,
    emotion: &'static str,
    speaker: &'static str,
    sample_rate: u32,
    pcm16: bool,
    duration_s: f64,
    f0_lo: f64,
    f0_hi: f64,
    syllable_rate: f64,
    noise_floor: f64,
    seed: u64,
}

const SPECS: &[Spec] = &[
    Spec {
        id: "u01_hindi_default",
        transcription: "नमस्ते दुनिया यह परीक्षण वाक्य है",
        language: "hindi",
        emotion: "default",
        speaker: "Akshansh",
        sample_rate: 22050,
        pcm16: true,
        duration_s: 2.2,
        f0_lo: 130.0,
        f0_hi: 170.0,
        syllable_rate: 3.4,
        noise_floor: 0.004,
        seed: 101,
    },
    Spec {
        id: "u02_hindi_happy",
        transcription: "मौसम आज बहुत अच्छा है",
        language: "hindi",
        emotion: "happy",
        speaker: "Akshansh",
        sample_rate: 16000,
        pcm16: true,
        duration_s: 1.8,
        f0_lo: 200.0,
        f0_hi: 280.0,
        syllable_rate: 4.2,
        noise_floor: 0.006,
        seed: 102,
    },
    Spec {
        id: "u03_english_default",
        transcription: "the weather is pleasant today",
        language: "english",
        emotion: "default",
        speaker: "Isha",
        sample_rate: 44100,
        pcm16: false,
        duration_s: 2.0,
        f0_lo: 115.0,
        f0_hi: 135.0,
        syllable_rate: 3.0,
        noise_floor: 0.003,
        seed: 103,
    },
    Spec {
        id: "u04_english_sad",
        transcription: "i am feeling rather tired",
        language: "english",
        emotion: "sad",
        speaker: "Isha",
        sample_rate: 16000,
        pcm16: true,
        duration_s: 1.9,
        f0_lo: 95.0,
        f0_hi: 105.0,
        syllable_rate: 2.6,
        noise_floor: 0.02,
        seed: 104,
    },
    Spec {
        id: "u05_mixed_emphasis",
        transcription: "Namaste, let's talk about मौसम",
        language: "mixed",
        emotion: "emphasis",
        speaker: "Akshansh",
        sample_rate: 24000,
        pcm16: false,
        duration_s: 2.4,
        f0_lo: 140.0,
        f0_hi: 240.0,
        syllable_rate: 3.6,
        noise_floor: 0.005,
        seed: 105,
    },
    Spec {
        id: "u06_hindi_laughing",
        transcription: "धन्यवाद मित्र",
        language: "hindi",
        emotion: "laughing",
        speaker: "Rohan",
        sample_rate: 8000,
        pcm16: true,
        duration_s: 1.6,
        f0_lo: 160.0,
        f0_hi: 220.0,
        syllable_rate: 5.0,
        noise_floor: 0.03,
        seed: 106,
    },
];

fn synthesize(spec: &Spec) -> AudioBuffer {
    let fs = spec.sample_rate as f64;
    let n = (fs * spec.duration_s) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Syllable grid: voiced burst then a short gap, with a per-syllable
    // pitch offset so monotony registers.
    let syllable_len = 1.0 / spec.syllable_rate;
    let n_syllables = (spec.duration_s / syllable_len).ceil() as usize;
    let offsets: Vec<f64> = (0..n_syllables)
        .map(|_| rng.random_range(-0.5..0.5))
        .collect();

    let lead = 0.12;
    let voiced_end = spec.duration_s - 0.12;
    let noise_floor = spec.noise_floor;

    // Accumulated fundamental phase, so the instantaneous frequency really
    // is the f0 contour.
    let mut phase = 0.0f64;
    let mut samples: Vec<f32> = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fs;
        let noise = rng.random_range(-noise_floor..noise_floor);
        let idx = ((((t - lead).max(0.0)) / syllable_len) as usize).min(n_syllables - 1);
        let syl_phase = ((t - lead).max(0.0) % syllable_len) / syllable_len;
        let sweep = 0.5 + 0.5 * (2.0 * PI * 1.1 * t).sin();
        let f0 = spec.f0_lo
            + (spec.f0_hi - spec.f0_lo) * (sweep + offsets[idx] * 0.4).clamp(0.0, 1.0);
        phase += 2.0 * PI * f0 / fs;

        if t < lead || t >= voiced_end || syl_phase > 0.78 {
            samples.push(noise as f32); // lead/tail or inter-syllable gap
            continue;
        }
        let envelope = (PI * syl_phase / 0.78).sin().powf(0.7);
        let mut v = 0.0;
        for k in 1..=8usize {
            if f0 * (k as f64) < fs / 2.0 * 0.9 {
                v += (phase * k as f64).sin() / k as f64;
            }
        }
        samples.push((0.5 * envelope * v + noise) as f32);
    }

    peak_normalize(&AudioBuffer::new(samples, spec.sample_rate), 0.7)
}

fn write_pcm16(buf: &AudioBuffer, path: &Path) -> std::io::Result<()> {
    let data_len = buf.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36u32 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&buf.sample_rate.to_le_bytes());
    out.extend_from_slice(&(buf.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &buf.samples {
        let v = (s as f64 * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&out)
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini_corpus");
    std::fs::create_dir_all(&root).expect("create corpus dir");
    for spec in SPECS {
        let buf = synthesize(spec);
        let wav = root.join(format!("{}.wav", spec.id));
        if spec.pcm16 {
            write_pcm16(&buf, &wav).expect("write wav");
        } else {
            write_wav(&buf, &wav).expect("write wav");
        }
        let sidecar = serde_json::json!({
            "transcription": spec.transcription,
            "language": spec.language,
            "emotion": spec.emotion,
            "speaker": spec.speaker,
        });
        std::fs::write(
            root.join(format!("{}.json", spec.id)),
            serde_json::to_string_pretty(&sidecar).unwrap() + "\n",
        )
        .expect("write sidecar");
        println!(
            "{}: {} Hz, {:.1} s, {}",
            spec.id, spec.sample_rate, spec.duration_s, spec.transcription
        );
    }
}

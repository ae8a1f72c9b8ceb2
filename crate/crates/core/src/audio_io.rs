//! Audio ingestion: RIFF/WAVE read and write, band-limited resampling, and
//! peak normalization.
//!
//! Every downstream stage works on [`AudioBuffer`]: mono 32-bit float samples
//! in `[-1, 1]` plus a sample rate. The reader accepts PCM 16-bit and IEEE
//! float 32-bit files with one or two channels (stereo is averaged down); the
//! writer always emits mono float32 at the buffer's rate.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioIoError {
    /// Not a RIFF/WAVE file, or the header is truncated/inconsistent.
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    /// Recognizably WAV, but an encoding this reader does not support.
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    /// A well-formed file with zero audio frames.
    #[error("WAV file contains no audio frames")]
    EmptyAudio,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Mono audio: float samples in `[-1, 1]` at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
    pub source_id: Option<String>,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        AudioBuffer {
            samples,
            sample_rate,
            source_id: None,
        }
    }

    pub fn with_source(mut self, id: impl Into<String>) -> Self {
        self.source_id = Some(id.into());
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Derived, never stored: `len / sample_rate`.
    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }
}

const FMT_PCM: u16 = 1;
const FMT_IEEE_FLOAT: u16 = 3;

fn read_exact_or_header_err(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<(), AudioIoError> {
    r.read_exact(buf)
        .map_err(|_| AudioIoError::MalformedHeader(format!("truncated {what}")))
}

fn u16_le(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn u32_le(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Read a RIFF/WAVE file into a mono buffer.
///
/// PCM16 samples are scaled by `1/32768`; stereo files are averaged to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, AudioIoError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let file_len = file.metadata()?.len() as usize;
    let mut r = std::io::BufReader::new(file);

    let mut hdr = [0u8; 12];
    read_exact_or_header_err(&mut r, &mut hdr, "RIFF header")?;
    if &hdr[0..4] != b"RIFF" {
        return Err(AudioIoError::MalformedHeader("missing RIFF tag".into()));
    }
    if &hdr[8..12] != b"WAVE" {
        return Err(AudioIoError::MalformedHeader("missing WAVE tag".into()));
    }

    let mut format_tag = None;
    let mut channels = 0u16;
    let mut sample_rate = 0u32;
    let mut bits_per_sample = 0u16;
    let mut data: Option<Vec<u8>> = None;

    // Walk chunks; unknown chunks are skipped (word-aligned).
    loop {
        let mut chunk_hdr = [0u8; 8];
        match r.read_exact(&mut chunk_hdr) {
            Ok(()) => {}
            Err(_) => break,
        }
        let id = [chunk_hdr[0], chunk_hdr[1], chunk_hdr[2], chunk_hdr[3]];
        let size = u32_le(&chunk_hdr[4..8]) as usize;
        if size > file_len {
            return Err(AudioIoError::MalformedHeader(format!(
                "chunk size {size} exceeds file length {file_len}"
            )));
        }
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(AudioIoError::MalformedHeader("fmt chunk too small".into()));
                }
                let mut fmt = vec![0u8; size];
                read_exact_or_header_err(&mut r, &mut fmt, "fmt chunk")?;
                format_tag = Some(u16_le(&fmt[0..2]));
                channels = u16_le(&fmt[2..4]);
                sample_rate = u32_le(&fmt[4..8]);
                bits_per_sample = u16_le(&fmt[14..16]);
                if size % 2 == 1 {
                    let mut pad = [0u8; 1];
                    let _ = r.read_exact(&mut pad);
                }
            }
            b"data" => {
                let mut bytes = vec![0u8; size];
                read_exact_or_header_err(&mut r, &mut bytes, "data chunk")?;
                data = Some(bytes);
                if size % 2 == 1 {
                    let mut pad = [0u8; 1];
                    let _ = r.read_exact(&mut pad);
                }
            }
            _ => {
                let skip = size + (size % 2);
                let mut remaining = skip;
                let mut scratch = [0u8; 4096];
                while remaining > 0 {
                    let n = remaining.min(scratch.len());
                    read_exact_or_header_err(&mut r, &mut scratch[..n], "chunk body")?;
                    remaining -= n;
                }
            }
        }
        if format_tag.is_some() && data.is_some() {
            break;
        }
    }

    let format_tag =
        format_tag.ok_or_else(|| AudioIoError::MalformedHeader("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioIoError::MalformedHeader("missing data chunk".into()))?;

    if sample_rate == 0 {
        return Err(AudioIoError::MalformedHeader("sample rate is zero".into()));
    }
    if channels != 1 && channels != 2 {
        return Err(AudioIoError::UnsupportedEncoding(format!(
            "{channels} channels (only mono/stereo supported)"
        )));
    }

    let interleaved: Vec<f32> = match (format_tag, bits_per_sample) {
        (FMT_PCM, 16) => data
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]) as f32 / 32768.0)
            .collect(),
        (FMT_IEEE_FLOAT, 32) => data
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect(),
        (tag, bits) => {
            return Err(AudioIoError::UnsupportedEncoding(format!(
                "format tag {tag} at {bits} bits (PCM16 and float32 supported)"
            )))
        }
    };

    let samples: Vec<f32> = if channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|lr| (lr[0] + lr[1]) * 0.5)
            .collect()
    } else {
        interleaved
    };

    if samples.is_empty() {
        return Err(AudioIoError::EmptyAudio);
    }

    Ok(AudioBuffer::new(samples, sample_rate)
        .with_source(path.to_string_lossy().into_owned()))
}

/// Write a buffer as mono IEEE float32 WAV at the buffer's rate.
pub fn write_wav(buf: &AudioBuffer, path: impl AsRef<Path>) -> Result<(), AudioIoError> {
    let data_len = buf.samples.len() * 4;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36u32 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FMT_IEEE_FLOAT.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&buf.sample_rate.to_le_bytes());
    out.extend_from_slice(&(buf.sample_rate * 4).to_le_bytes()); // byte rate
    out.extend_from_slice(&4u16.to_le_bytes()); // block align
    out.extend_from_slice(&32u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for s in &buf.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Kaiser window shape parameter and sinc half-width for [`resample`].
const KAISER_BETA: f64 = 8.6;
const SINC_ZERO_CROSSINGS: usize = 32;

fn bessel_i0(x: f64) -> f64 {
    // Power series; converges quickly for the argument range we use.
    let mut sum = 1.0;
    let mut term = 1.0;
    let half_x = x / 2.0;
    for k in 1..64 {
        term *= (half_x / k as f64) * (half_x / k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Band-limited sample-rate conversion with a Kaiser-windowed sinc kernel.
///
/// Output length is `round(len * target / source)`. Same-rate input is
/// returned unchanged.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> AudioBuffer {
    assert!(target_rate > 0, "target rate must be positive");
    if target_rate == buf.sample_rate {
        return buf.clone();
    }
    let src = buf.sample_rate as f64;
    let dst = target_rate as f64;
    let ratio = dst / src;
    let out_len = (buf.samples.len() as f64 * ratio).round() as usize;

    // When downsampling, scale the sinc cutoff to the new Nyquist and widen
    // the kernel so it still spans SINC_ZERO_CROSSINGS zeros per side.
    let cutoff = ratio.min(1.0);
    let half_width = SINC_ZERO_CROSSINGS as f64 / cutoff;
    let i0_beta = bessel_i0(KAISER_BETA);

    let x = &buf.samples;
    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let center = m as f64 * src / dst;
        let lo = (center - half_width).ceil() as i64;
        let hi = (center + half_width).floor() as i64;
        let mut acc = 0.0f64;
        for n in lo..=hi {
            if n < 0 || n as usize >= x.len() {
                continue;
            }
            let t = n as f64 - center;
            let w_arg = t / half_width;
            let window = bessel_i0(KAISER_BETA * (1.0 - w_arg * w_arg).max(0.0).sqrt()) / i0_beta;
            acc += x[n as usize] as f64 * sinc(t * cutoff) * cutoff * window;
        }
        out.push(acc as f32);
    }

    AudioBuffer {
        samples: out,
        sample_rate: target_rate,
        source_id: buf.source_id.clone(),
    }
}

/// Scale so the peak magnitude equals `target_peak`. All-zero input is
/// returned unchanged; silence is a legal (if degenerate) utterance.
///
/// The gain is applied in f64, which lands the peak sample exactly on the
/// target and makes a second application the bit-identical no-op.
pub fn peak_normalize(buf: &AudioBuffer, target_peak: f32) -> AudioBuffer {
    assert!(
        target_peak > 0.0 && target_peak <= 1.0,
        "target peak must be in (0, 1]"
    );
    let peak = buf.peak();
    if peak == 0.0 || peak == target_peak {
        return buf.clone();
    }
    let gain = target_peak as f64 / peak as f64;
    AudioBuffer {
        samples: buf
            .samples
            .iter()
            .map(|&s| (s as f64 * gain) as f32)
            .collect(),
        sample_rate: buf.sample_rate,
        source_id: buf.source_id.clone(),
    }
}

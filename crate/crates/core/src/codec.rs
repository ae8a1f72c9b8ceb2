//! Residual vector quantization of mel frames: per-level k-means codebooks
//! trained on successive residuals, exposing the discrete-token interface of
//! a neural VQ at desk scale.
//!
//! Training is seed-deterministic at any parallelism: assignment steps may
//! run on many threads, but every floating-point reduction accumulates
//! sequentially in frame-index order.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Lloyd stops once no centroid moves farther than this.
const CONVERGENCE_SHIFT: f64 = 1e-6;

const MAGIC: &[u8; 4] = b"RVQ1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("too few frames: {n} frames for K = {k}")]
    TooFewFrames { n: usize, k: usize },
    #[error("degenerate training data: all frames identical but K > 1")]
    DegenerateData,
    #[error("dimension mismatch: codebook dim {expected}, frames dim {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("code index {index} out of range for K = {k} at level {level}")]
    IndexOutOfRange {
        level: usize,
        index: u32,
        k: usize,
    },
    #[error("empty code sequence")]
    EmptyCodes,
    #[error("malformed codebook file: {0}")]
    MalformedCodebook(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Multi-level residual codebooks plus the standardization recorded at
/// training time. All levels share `dim` and `codebook_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct RvqCodebook {
    pub levels: Vec<Vec<Vec<f64>>>,
    pub dim: usize,
    pub codebook_size: usize,
    pub train_seed: u64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl RvqCodebook {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    fn standardize(&self, frame: &[f32]) -> Vec<f64> {
        frame
            .iter()
            .enumerate()
            .map(|(d, &v)| (v as f64 - self.mean[d]) / self.std[d])
            .collect()
    }
}

/// Per-frame code tuples, `[n_frames][n_levels]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSequence {
    pub codes: Vec<Vec<u32>>,
    pub n_levels: usize,
}

impl CodeSequence {
    pub fn n_frames(&self) -> usize {
        self.codes.len()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Nearest centroid with ties broken by lowest index.
fn nearest_centroid(frame: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (k, c) in centroids.iter().enumerate() {
        let d = squared_distance(frame, c);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    (best, best_d)
}

/// k-means++ seeding, deterministic for a given rng state.
fn kmeans_pp_init(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    centroids.push(data[first].clone());

    let mut dist2: Vec<f64> = data
        .par_iter()
        .map(|x| squared_distance(x, &centroids[0]))
        .collect();
    while centroids.len() < k {
        // Sequential scan in index order keeps the draw deterministic.
        let total: f64 = dist2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // Only duplicated points remain; fall back to a uniform draw.
            rng.random_range(0..n)
        };
        let new_centroid = data[pick].clone();
        dist2
            .par_iter_mut()
            .zip(data.par_iter())
            .for_each(|(d, x)| {
                let nd = squared_distance(x, &new_centroid);
                if nd < *d {
                    *d = nd;
                }
            });
        centroids.push(new_centroid);
    }
    centroids
}

/// One k-means fit: k-means++ init then Lloyd iterations.
fn lloyd(data: &[Vec<f64>], k: usize, max_iters: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let dim = data[0].len();
    let mut centroids = kmeans_pp_init(data, k, rng);

    for _ in 0..max_iters {
        let assignments: Vec<usize> = data
            .par_iter()
            .map(|x| nearest_centroid(x, &centroids).0)
            .collect();

        // Deterministic accumulation in frame-index order.
        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &a) in data.iter().zip(&assignments) {
            counts[a] += 1;
            for (d, &v) in x.iter().enumerate() {
                sums[a][d] += v;
            }
        }

        let mut next: Vec<Vec<f64>> = Vec::with_capacity(k);
        for c in 0..k {
            if counts[c] > 0 {
                next.push(sums[c].iter().map(|s| s / counts[c] as f64).collect());
            } else {
                next.push(centroids[c].clone()); // repaired below
            }
        }

        // Empty-cluster repair: hand each empty cluster the point farthest
        // from its assigned centroid, in cluster index order, one distinct
        // point per empty cluster.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut point_dist: Vec<f64> = data
                .par_iter()
                .zip(assignments.par_iter())
                .map(|(x, &a)| squared_distance(x, &next[a]))
                .collect();
            for c in empties {
                let mut far = 0usize;
                let mut far_d = -1.0f64;
                for (i, &d) in point_dist.iter().enumerate() {
                    if d > far_d {
                        far_d = d;
                        far = i;
                    }
                }
                next[c] = data[far].clone();
                point_dist[far] = -1.0;
            }
        }

        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0f64, f64::max);
        centroids = next;
        if shift < CONVERGENCE_SHIFT {
            break;
        }
    }
    centroids
}

/// Sum of per-frame squared distances to the nearest centroid; the reduction
/// runs in frame-index order.
fn objective(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> f64 {
    let dists: Vec<f64> = data
        .par_iter()
        .map(|x| nearest_centroid(x, centroids).1)
        .collect();
    dists.iter().sum()
}

/// Train a residual codebook stack.
///
/// Frames are standardized by their per-dimension mean and std (zero-variance
/// dimensions get std 1); level `l` is a k-means fit (k-means++ seeded by
/// `seed + l`, Lloyd until the centroid shift falls below 1e-6 or
/// `max_iters`) on the residuals left by the previous levels. After each fit
/// the centroid nearest the residual mean is snapped onto that mean whenever
/// this does not worsen the fit; either way the per-level residual MSE is
/// non-increasing, and an exact clustering stays exact.
pub fn train_rvq(
    frames: &[Vec<f32>],
    n_levels: usize,
    k: usize,
    max_iters: usize,
    seed: u64,
) -> Result<RvqCodebook, CodecError> {
    assert!(n_levels >= 1, "need at least one level");
    assert!(max_iters >= 1, "need at least one iteration");
    let n = frames.len();
    if n < k {
        return Err(CodecError::TooFewFrames { n, k });
    }
    let dim = frames[0].len();
    assert!(frames.iter().all(|f| f.len() == dim), "ragged frame matrix");

    if k > 1 && frames.iter().all(|f| f == &frames[0]) {
        return Err(CodecError::DegenerateData);
    }

    // Per-dimension standardization, recorded in the codebook.
    let mut mean = vec![0.0f64; dim];
    for f in frames {
        for (d, &v) in f.iter().enumerate() {
            mean[d] += v as f64;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0f64; dim];
    for f in frames {
        for (d, &v) in f.iter().enumerate() {
            let diff = v as f64 - mean[d];
            var[d] += diff * diff;
        }
    }
    let std: Vec<f64> = var
        .iter()
        .map(|&v| {
            let s = (v / n as f64).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();

    let mut residuals: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| {
            f.iter()
                .enumerate()
                .map(|(d, &v)| (v as f64 - mean[d]) / std[d])
                .collect()
        })
        .collect();

    let mut levels = Vec::with_capacity(n_levels);
    for level in 0..n_levels {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(level as u64));
        let fitted = lloyd(&residuals, k, max_iters, &mut rng);

        // Mean of this level's input residuals.
        let mut mu = vec![0.0f64; dim];
        for r in &residuals {
            for (d, &v) in r.iter().enumerate() {
                mu[d] += v;
            }
        }
        for m in &mut mu {
            *m /= n as f64;
        }
        let (nearest, _) = nearest_centroid(&mu, &fitted);
        let mut snapped = fitted.clone();
        snapped[nearest] = mu;

        let chosen = if objective(&residuals, &snapped) <= objective(&residuals, &fitted) {
            snapped
        } else {
            fitted
        };

        // Subtract this level's reconstruction before fitting the next.
        let assignments: Vec<usize> = residuals
            .par_iter()
            .map(|r| nearest_centroid(r, &chosen).0)
            .collect();
        for (r, &a) in residuals.iter_mut().zip(&assignments) {
            for (d, v) in r.iter_mut().enumerate() {
                *v -= chosen[a][d];
            }
        }
        levels.push(chosen);
    }

    Ok(RvqCodebook {
        levels,
        dim,
        codebook_size: k,
        train_seed: seed,
        mean,
        std,
    })
}

/// Greedy per-level nearest-centroid encoding on successive residuals; ties
/// break toward the lowest index.
pub fn encode(frames: &[Vec<f32>], cb: &RvqCodebook) -> Result<CodeSequence, CodecError> {
    if let Some(frame) = frames.first() {
        if frame.len() != cb.dim {
            return Err(CodecError::DimensionMismatch {
                expected: cb.dim,
                got: frame.len(),
            });
        }
    }
    let codes: Vec<Vec<u32>> = frames
        .par_iter()
        .map(|frame| {
            let mut residual = cb.standardize(frame);
            let mut tuple = Vec::with_capacity(cb.n_levels());
            for level in &cb.levels {
                let (index, _) = nearest_centroid(&residual, level);
                for (d, v) in residual.iter_mut().enumerate() {
                    *v -= level[index][d];
                }
                tuple.push(index as u32);
            }
            tuple
        })
        .collect();
    Ok(CodeSequence {
        codes,
        n_levels: cb.n_levels(),
    })
}

/// Sum the selected centroids across levels, then de-standardize.
pub fn decode(codes: &CodeSequence, cb: &RvqCodebook) -> Result<Vec<Vec<f32>>, CodecError> {
    for tuple in &codes.codes {
        for (level, &index) in tuple.iter().enumerate() {
            if level >= cb.n_levels() || index as usize >= cb.codebook_size {
                return Err(CodecError::IndexOutOfRange {
                    level,
                    index,
                    k: cb.codebook_size,
                });
            }
        }
    }
    Ok(codes
        .codes
        .par_iter()
        .map(|tuple| {
            let mut acc = vec![0.0f64; cb.dim];
            for (level, &index) in tuple.iter().enumerate() {
                for (d, v) in acc.iter_mut().enumerate() {
                    *v += cb.levels[level][index as usize][d];
                }
            }
            acc.iter()
                .enumerate()
                .map(|(d, &v)| (v * cb.std[d] + cb.mean[d]) as f32)
                .collect()
        })
        .collect())
}

/// Mean squared residual (standardized space) before quantization and after
/// each level; entry 0 is the unquantized baseline, entry `l` the MSE once
/// levels `1..=l` are applied.
pub fn level_mse(frames: &[Vec<f32>], cb: &RvqCodebook) -> Result<Vec<f64>, CodecError> {
    if frames.is_empty() {
        return Err(CodecError::EmptyCodes);
    }
    if frames[0].len() != cb.dim {
        return Err(CodecError::DimensionMismatch {
            expected: cb.dim,
            got: frames[0].len(),
        });
    }
    let mut residuals: Vec<Vec<f64>> = frames.iter().map(|f| cb.standardize(f)).collect();
    let n = residuals.len() as f64;
    let mut out = Vec::with_capacity(cb.n_levels() + 1);
    let mse = |rs: &[Vec<f64>]| {
        rs.iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            / n
    };
    out.push(mse(&residuals));
    for level in &cb.levels {
        let assignments: Vec<usize> = residuals
            .par_iter()
            .map(|r| nearest_centroid(r, level).0)
            .collect();
        for (r, &a) in residuals.iter_mut().zip(&assignments) {
            for (d, v) in r.iter_mut().enumerate() {
                *v -= level[a][d];
            }
        }
        out.push(mse(&residuals));
    }
    Ok(out)
}

/// Per-level usage report: index histogram, perplexity (`exp` of the usage
/// entropy), and dead-code count.
#[derive(Debug, Clone)]
pub struct UsageReport {
    pub histograms: Vec<Vec<usize>>,
    pub perplexity: Vec<f64>,
    pub dead_codes: Vec<usize>,
}

pub fn codebook_stats(codes: &CodeSequence, cb: &RvqCodebook) -> Result<UsageReport, CodecError> {
    if codes.codes.is_empty() {
        return Err(CodecError::EmptyCodes);
    }
    let n = codes.codes.len() as f64;
    let mut histograms = vec![vec![0usize; cb.codebook_size]; cb.n_levels()];
    for tuple in &codes.codes {
        for (level, &index) in tuple.iter().enumerate() {
            if level >= cb.n_levels() || index as usize >= cb.codebook_size {
                return Err(CodecError::IndexOutOfRange {
                    level,
                    index,
                    k: cb.codebook_size,
                });
            }
            histograms[level][index as usize] += 1;
        }
    }
    let perplexity = histograms
        .iter()
        .map(|h| {
            let entropy: f64 = h
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    -p * p.ln()
                })
                .sum();
            entropy.exp()
        })
        .collect();
    let dead_codes = histograms
        .iter()
        .map(|h| h.iter().filter(|&&c| c == 0).count())
        .collect();
    Ok(UsageReport {
        histograms,
        perplexity,
        dead_codes,
    })
}

/// Write the codebook in its versioned binary layout:
///
/// ```text
/// magic "RVQ1" | version u32 | dim u32 | K u32 | n_levels u32 | seed u64
/// | mean f64×dim | std f64×dim | centroids f64×(n_levels·K·dim)
/// ```
///
/// all little-endian, centroids ordered level-major then index-major.
pub fn write_codebook(cb: &RvqCodebook, path: impl AsRef<Path>) -> Result<(), CodecError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(cb.dim as u32).to_le_bytes());
    out.extend_from_slice(&(cb.codebook_size as u32).to_le_bytes());
    out.extend_from_slice(&(cb.n_levels() as u32).to_le_bytes());
    out.extend_from_slice(&cb.train_seed.to_le_bytes());
    for v in cb.mean.iter().chain(cb.std.iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for level in &cb.levels {
        for centroid in level {
            for v in centroid {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_codebook(path: impl AsRef<Path>) -> Result<RvqCodebook, CodecError> {
    let mut file = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], CodecError> {
        if *pos + n > bytes.len() {
            return Err(CodecError::MalformedCodebook("truncated file".into()));
        }
        let slice = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(slice)
    };

    if take(&mut pos, 4)? != MAGIC {
        return Err(CodecError::MalformedCodebook("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(CodecError::MalformedCodebook(format!(
            "unsupported version {version}"
        )));
    }
    let dim = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let k = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let n_levels = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let train_seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    if dim == 0 || k == 0 || n_levels == 0 {
        return Err(CodecError::MalformedCodebook("zero dimension".into()));
    }

    let read_f64s = |pos: &mut usize, n: usize| -> Result<Vec<f64>, CodecError> {
        let slice = take(pos, n * 8)?;
        Ok(slice
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect())
    };
    let mean = read_f64s(&mut pos, dim)?;
    let std = read_f64s(&mut pos, dim)?;
    if std.iter().any(|&s| !s.is_finite() || s <= 0.0) {
        return Err(CodecError::MalformedCodebook("non-positive std".into()));
    }
    let mut levels = Vec::with_capacity(n_levels);
    for _ in 0..n_levels {
        let mut level = Vec::with_capacity(k);
        for _ in 0..k {
            let centroid = read_f64s(&mut pos, dim)?;
            if centroid.iter().any(|v| !v.is_finite()) {
                return Err(CodecError::MalformedCodebook("non-finite centroid".into()));
            }
            level.push(centroid);
        }
        levels.push(level);
    }
    if pos != bytes.len() {
        return Err(CodecError::MalformedCodebook("trailing bytes".into()));
    }
    Ok(RvqCodebook {
        levels,
        dim,
        codebook_size: k,
        train_seed,
        mean,
        std,
    })
}

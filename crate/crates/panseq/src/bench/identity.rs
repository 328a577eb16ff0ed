//! Pairwise sequence identity via global alignment.
//!
//! Needleman-Wunsch with match +1, mismatch 0, linear gap penalty -1;
//! identity = matches / alignment length. Traceback ties prefer
//! diagonal, then up, then left, so identities are deterministic.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MATCH: f64 = 1.0;
const MISMATCH: f64 = 0.0;
const GAP: f64 = -1.0;

/// Identity of the optimal global alignment of `a` and `b`, in [0, 1].
pub fn pairwise_identity(a: &str, b: &str) -> f64 {
    let a = a.as_bytes();
    let b = b.as_bytes();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let rows = a.len() + 1;
    let cols = b.len() + 1;
    let mut score = vec![0.0f64; rows * cols];
    // 0 = diagonal, 1 = up (gap in b), 2 = left (gap in a)
    let mut step = vec![0u8; rows * cols];
    for i in 1..rows {
        score[i * cols] = i as f64 * GAP;
        step[i * cols] = 1;
    }
    for j in 1..cols {
        score[j] = j as f64 * GAP;
        step[j] = 2;
    }
    for i in 1..rows {
        for j in 1..cols {
            let diag = score[(i - 1) * cols + (j - 1)]
                + if a[i - 1] == b[j - 1] { MATCH } else { MISMATCH };
            let up = score[(i - 1) * cols + j] + GAP;
            let left = score[i * cols + (j - 1)] + GAP;
            let (best, dir) = if diag >= up && diag >= left {
                (diag, 0)
            } else if up >= left {
                (up, 1)
            } else {
                (left, 2)
            };
            score[i * cols + j] = best;
            step[i * cols + j] = dir;
        }
    }
    // Traceback: count matches and alignment columns.
    let mut i = a.len();
    let mut j = b.len();
    let mut matches = 0usize;
    let mut columns = 0usize;
    while i > 0 || j > 0 {
        columns += 1;
        match step[i * cols + j] {
            0 => {
                if a[i - 1] == b[j - 1] {
                    matches += 1;
                }
                i -= 1;
                j -= 1;
            }
            1 => i -= 1,
            _ => j -= 1,
        }
    }
    matches as f64 / columns as f64
}

/// Histogram over [0, 1] with 1% bins (identity 1.0 lands in the last
/// bin) for all n(n-1)/2 pairs.
pub fn identity_histogram(seqs: &[String]) -> Result<[u64; 100]> {
    if seqs.len() < 2 {
        return Err(Error::Evaluation(
            "identity distribution needs at least 2 sequences".to_string(),
        ));
    }
    let mut bins = [0u64; 100];
    for i in 0..seqs.len() {
        for j in i + 1..seqs.len() {
            let id = pairwise_identity(&seqs[i], &seqs[j]);
            let bin = ((id * 100.0).floor() as usize).min(99);
            bins[bin] += 1;
        }
    }
    Ok(bins)
}

/// Identity histogram over a seeded random sample of up to `sample_size`
/// unique sequences (the whole set when it is small enough).
pub fn sample_identity_histogram(
    seqs: &[String],
    sample_size: usize,
    seed: u64,
) -> Result<[u64; 100]> {
    if seqs.len() <= sample_size {
        return identity_histogram(seqs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..seqs.len()).collect();
    indices.shuffle(&mut rng);
    let sample: Vec<String> = indices[..sample_size]
        .iter()
        .map(|&i| seqs[i].clone())
        .collect();
    identity_histogram(&sample)
}

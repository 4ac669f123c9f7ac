use std::path::Path;

use fermishadow::combinat::format_rational;
use fermishadow::fock::FermionState;
use fermishadow::shadows::{
    avg_shadow_norm_sq, collect_shadows, q_value, shadow_rng, variance_bound_exact, DenseEstimator,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, STATE_STREAM};
use crate::estimate::write_rows;
use crate::{CliError, Result};

/// Parameter grid of a variance sweep; every `(n, η, k)` with `k ≤ η ≤ n`
/// drawn from the lists is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRanges {
    pub n: Vec<usize>,
    pub eta: Vec<usize>,
    pub k: Vec<usize>,
    /// Shadows per row for the empirical column; 0 skips it.
    pub samples: usize,
    pub seed: u64,
}

/// Parse `4`, `2..6` (inclusive) or `2,4,8`.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = |e: String| CliError::Config(format!("range {s:?}: {e}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| bad(e.to_string()));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad("empty range".into()));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

/// One row of the sweep. Exact columns are rendered as rationals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub eta: usize,
    pub k: usize,
    pub q_exact: String,
    pub avg_shadow_norm_sq: String,
    pub variance_bound: String,
    pub empirical_avg_variance: Option<f64>,
    pub samples: usize,
}

/// Mean over all `(p, q)` of the single-shot sample variance `|x − x̄|²`,
/// with the `N − 1` normalization.
pub fn empirical_avg_variance(state: &FermionState, k: usize, samples: usize, seed: u64) -> Result<f64> {
    if samples < 2 {
        return Err(CliError::Config("the empirical variance needs at least 2 samples".into()));
    }
    let (n, eta) = (state.n(), state.eta());
    let est = DenseEstimator::new(n, eta, k)?;
    let dim = fermishadow::combinat::choose(n, k);
    let mut sum = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut sumsq = vec![0.0; dim * dim];
    let mut start = 0;
    while start < samples {
        let count = 1024.min(samples - start);
        let shadows = collect_shadows(state, seed, start as u64, count)?;
        let ops = shadows
            .par_iter()
            .map(|s| est.estimation_operator(s))
            .collect::<fermishadow::Result<Vec<_>>>()?;
        for x in ops {
            for ((acc, acc2), v) in sum.iter_mut().zip(sumsq.iter_mut()).zip(x.data()) {
                *acc += v;
                *acc2 += v.norm_sqr();
            }
        }
        start += count;
    }
    let n_s = samples as f64;
    let total: f64 = sum
        .iter()
        .zip(&sumsq)
        .map(|(s, s2)| (s2 - s.norm_sqr() / n_s) / (n_s - 1.0))
        .sum();
    Ok(total / (dim * dim) as f64)
}

/// Evaluate the exact variance quantities, and optionally the empirical one,
/// on a random pure state per row.
pub fn variance_sweep(ranges: &SweepRanges) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &n in &ranges.n {
        for &eta in ranges.eta.iter().filter(|&&e| e <= n) {
            for &k in ranges.k.iter().filter(|&&k| k <= eta) {
                let empirical = if ranges.samples > 0 {
                    let mut rng = shadow_rng(ranges.seed, STATE_STREAM);
                    let state = FermionState::random_pure(n, eta, &mut rng)?;
                    Some(empirical_avg_variance(&state, k, ranges.samples, ranges.seed)?)
                } else {
                    None
                };
                rows.push(SweepRow {
                    n,
                    eta,
                    k,
                    q_exact: format_rational(&q_value(n, eta, k)?),
                    avg_shadow_norm_sq: format_rational(&avg_shadow_norm_sq(n, eta, k)?),
                    variance_bound: format_rational(&variance_bound_exact(n, eta, k)?),
                    empirical_avg_variance: empirical,
                    samples: ranges.samples,
                });
            }
        }
    }
    Ok(rows)
}

/// Run the sweep and write it to `out`.
pub fn cmd_variance_sweep(ranges: &SweepRanges, out: &Path, format: OutputFormat) -> Result<Vec<SweepRow>> {
    let rows = variance_sweep(ranges)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_rows(out, &rows, format)?;
    Ok(rows)
}

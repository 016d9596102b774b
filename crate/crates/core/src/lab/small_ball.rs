//! Monte Carlo small-ball frequencies `P(d(Z, x*) < ε)` with exact binomial intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::metrics::MetricSpec;
use crate::models::{derive_seed, ClassSampler};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallEstimate {
    pub eps: f64,
    pub hits: usize,
    pub n: usize,
    pub frequency: f64,
    /// 95% Clopper–Pearson interval.
    pub ci: (f64, f64),
}

/// Two-sided Clopper–Pearson interval at confidence `1 − alpha`.
pub fn clopper_pearson(hits: usize, n: usize, alpha: f64) -> Result<(f64, f64)> {
    if n == 0 || hits > n {
        return Err(Error::param("n", "need n >= 1 and hits <= n"));
    }
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::NonFinite(e.to_string()));
    let (k, n) = (hits as f64, n as f64);
    let lo = if hits == 0 { 0.0 } else { beta(k, n - k + 1.0)?.inverse_cdf(alpha / 2.0) };
    let hi = if hits as f64 == n { 1.0 } else { beta(k + 1.0, n - k)?.inverse_cdf(1.0 - alpha / 2.0) };
    Ok((lo, hi))
}

fn check_metric(sampler: &ClassSampler, target: &Trajectory, metric: &MetricSpec) -> Result<()> {
    if matches!(metric, MetricSpec::Qv { .. }) && (sampler.has_jumps() || !target.is_continuous()) {
        return Err(Error::JumpsNotAllowed("d_QV small balls need a continuous class"));
    }
    Ok(())
}

/// Distances `d(Z_i, x*)` for `i < n`, in seed order.
pub fn sample_distances(
    sampler: &ClassSampler,
    target: &Trajectory,
    metric: &MetricSpec,
    n: usize,
    root_seed: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    check_metric(sampler, target, metric)?;
    let grid: Grid = target.grid();
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let z = sampler.sample(grid, derive_seed(root_seed, i))?;
            metric.distance(&z, target)
        })
        .collect()
}

/// Hit count, frequency and interval for one radius.
pub fn small_ball_estimate(
    sampler: &ClassSampler,
    target: &Trajectory,
    metric: &MetricSpec,
    eps: f64,
    n: usize,
    root_seed: u64,
) -> Result<SmallBallEstimate> {
    let d = sample_distances(sampler, target, metric, n, root_seed)?;
    Ok(small_ball_sweep_from(&d, &[eps])?.remove(0))
}

/// Estimates for several radii from one shared set of samples, so frequencies are monotone in `ε`.
pub fn small_ball_sweep(
    sampler: &ClassSampler,
    target: &Trajectory,
    metric: &MetricSpec,
    eps: &[f64],
    n: usize,
    root_seed: u64,
) -> Result<Vec<SmallBallEstimate>> {
    let d = sample_distances(sampler, target, metric, n, root_seed)?;
    small_ball_sweep_from(&d, eps)
}

pub fn small_ball_sweep_from(distances: &[f64], eps: &[f64]) -> Result<Vec<SmallBallEstimate>> {
    eps.iter()
        .map(|&e| {
            if !(e > 0.0) {
                return Err(Error::param("eps", "must be > 0"));
            }
            let hits = distances.iter().filter(|&&d| d < e).count();
            Ok(SmallBallEstimate {
                eps: e,
                hits,
                n: distances.len(),
                frequency: hits as f64 / distances.len() as f64,
                ci: clopper_pearson(hits, distances.len(), 0.05)?,
            })
        })
        .collect()
}

/// Smallest radius in `eps` (ascending) whose frequency is positive but at most `cap`.
pub fn calibrate_radius(sweep: &[SmallBallEstimate], cap: f64) -> Option<f64> {
    sweep.iter().find(|e| e.hits > 0 && e.frequency <= cap).map(|e| e.eps)
}

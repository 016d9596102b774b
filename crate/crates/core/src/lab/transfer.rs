//! Evaluate an NP-portfolio pathwise on sampled paths, `Φ^Z(t, ω) = Φ(t, Z(ω))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lab::arbitrage::value_tolerance;
use crate::models::{derive_seed, ClassSampler};
use crate::portfolio::Portfolio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub sampler: String,
    pub n: usize,
    pub root_seed: u64,
    /// Mean of `V(T) − V_0`.
    pub mean: f64,
    pub se: f64,
    pub positive_fraction: f64,
    pub negative_fraction: f64,
    pub min: f64,
    pub max: f64,
    /// `None` when the sampler admits no martingale statement.
    pub martingale: Option<bool>,
    /// `|mean| ≤ 3 SE`; checked only for martingale samplers.
    pub mean_within_3se: Option<bool>,
    /// No path lost money while some path gained.
    pub arbitrage_pattern: bool,
    pub consistent: bool,
}

/// Terminal gains `V(T) − V_0` on `n` samples, in seed order.
pub fn terminal_gains(portfolio: &Portfolio, sampler: &ClassSampler, grid: Grid, level: u32, n: usize, root_seed: u64) -> Result<Vec<f64>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let x = sampler.sample(grid, derive_seed(root_seed, i))?;
            Ok(portfolio.terminal_value(&x, level)? - portfolio.v0())
        })
        .collect()
}

/// Mean and standard error, summed in order.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo consequences of the transfer theorem for `portfolio` under `sampler`.
pub fn transfer_experiment(
    portfolio: &Portfolio,
    sampler: &ClassSampler,
    grid: Grid,
    level: u32,
    n: usize,
    root_seed: u64,
) -> Result<TransferReport> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    sampler.validate()?;
    let martingale = sampler.is_martingale();
    if martingale == Some(false) {
        return Err(Error::MartingalePrecheck(format!("{} drift is not compensated", sampler.name())));
    }
    let gains = terminal_gains(portfolio, sampler, grid, level, n, root_seed)?;
    let (mean, se) = mean_se(&gains);
    let tol = value_tolerance(sampler.x0());
    let pos = gains.iter().filter(|&&g| g > tol).count();
    let neg = gains.iter().filter(|&&g| g < -tol).count();
    let mean_within_3se = martingale.map(|_| mean.abs() <= 3.0 * se + tol);
    let arbitrage_pattern = neg == 0 && pos > 0;
    Ok(TransferReport {
        sampler: sampler.name().to_string(),
        n,
        root_seed,
        mean,
        se,
        positive_fraction: pos as f64 / n as f64,
        negative_fraction: neg as f64 / n as f64,
        min: gains.iter().copied().fold(f64::INFINITY, f64::min),
        max: gains.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        martingale,
        mean_within_3se,
        arbitrage_pattern,
        consistent: !arbitrage_pattern && mean_within_3se.unwrap_or(true),
    })
}

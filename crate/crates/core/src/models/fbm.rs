//! Fractional Brownian motion by circulant embedding of the increment covariance.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{rng_for, stream};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::trajectory::GridPath;

/// `Cov(ΔY_j, ΔY_{j+k})` for increments of width `dt`.
pub fn fbm_increment_covariance(hurst: f64, k: usize, dt: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2)) * dt.powf(h2)
}

fn check_hurst(hurst: f64) -> Result<()> {
    if !(hurst > 0.5 && hurst <= 0.75) {
        return Err(Error::param("hurst", "must lie in (1/2, 3/4]"));
    }
    Ok(())
}

/// An fBm path with Hurst index `hurst` on `grid`, `Y(0) = 0`.
pub fn sample_fbm(hurst: f64, grid: Grid, seed: u64) -> Result<GridPath> {
    check_hurst(hurst)?;
    fbm_with_rng(hurst, grid, &mut rng_for(seed, stream::Y))
}

pub(crate) fn fbm_with_rng<R: Rng>(hurst: f64, grid: Grid, rng: &mut R) -> Result<GridPath> {
    let n = grid.steps();
    let m = 2 * n;
    let dt = grid.mesh();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);

    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let k = if j <= n { j } else { m - j };
            Complex::new(fbm_increment_covariance(hurst, k, dt), 0.0)
        })
        .collect();
    fft.process(&mut row);
    let scale = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let eig: Vec<f64> = row
        .iter()
        .map(|c| {
            if c.re < -1e-10 * scale {
                Err(Error::NonFinite("circulant embedding is not non-negative definite".into()))
            } else {
                Ok(c.re.max(0.0))
            }
        })
        .collect::<Result<_>>()?;

    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let mut w = vec![Complex::new(0.0, 0.0); m];
    w[0] = Complex::new(eig[0].sqrt() * normal(), 0.0);
    w[n] = Complex::new(eig[n].sqrt() * normal(), 0.0);
    for j in 1..n {
        let s = (eig[j] / 2.0).sqrt();
        let (a, b) = (normal(), normal());
        w[j] = Complex::new(s * a, s * b);
        w[m - j] = w[j].conj();
    }
    fft.process(&mut w);
    let norm = (m as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut y = 0.0;
    values.push(y);
    for c in &w[..n] {
        y += c.re / norm;
        values.push(y);
    }
    GridPath::new(grid, values)
}

//! Exponential paths with a fixed multiplicative jump: `x(t) = x_0 e^{μt} (1+a)^{n(t)}`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{rng_for, snap_free, snap_strict, stream};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::trajectory::{JumpMark, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonExpParams {
    pub x0: f64,
    pub mu: f64,
    pub a: f64,
}

impl PoissonExpParams {
    /// Parameters satisfying `μ·a < 0` and `1 + a > 0`.
    pub fn new(x0: f64, mu: f64, a: f64) -> Result<Self> {
        let p = Self::new_unchecked(x0, mu, a)?;
        p.validate()?;
        Ok(p)
    }

    /// Skip the sign condition `μ·a < 0`; used for deliberately broken control classes.
    pub fn new_unchecked(x0: f64, mu: f64, a: f64) -> Result<Self> {
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(Error::param("x0", "must be finite and > 0"));
        }
        if !mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        if !(1.0 + a > 0.0) || !a.is_finite() {
            return Err(Error::param("a", "need 1 + a > 0"));
        }
        Ok(Self { x0, mu, a })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu * self.a < 0.0) {
            return Err(Error::param("mu, a", "need mu * a < 0"));
        }
        Ok(())
    }

    fn value(&self, t: f64, n: i32) -> f64 {
        self.x0 * (self.mu * t).exp() * (1.0 + self.a).powi(n)
    }
}

/// Evaluate the formula on `grid` with jumps at `jump_times` (snapped to the nearest node).
pub fn gen_poisson_exp(p: &PoissonExpParams, jump_times: &[f64], grid: Grid) -> Result<Trajectory> {
    build(p, &snap_strict(grid, jump_times)?, grid)
}

pub(crate) fn build(p: &PoissonExpParams, idx: &[usize], grid: Grid) -> Result<Trajectory> {
    let mut values = Vec::with_capacity(grid.len());
    let mut marks = Vec::with_capacity(idx.len());
    let mut n = 0;
    for k in 0..grid.len() {
        let t = grid.time(k);
        if idx.get(n) == Some(&k) {
            marks.push(JumpMark {
                index: k,
                left: p.value(t, n as i32),
            });
            n += 1;
        }
        values.push(p.value(t, n as i32));
    }
    Trajectory::new(grid, values, marks)?.with_volatility(vec![0.0; grid.len()])
}

/// A member with Poisson(`rate`) jump times.
pub fn sample_poisson_exp(p: &PoissonExpParams, rate: f64, grid: Grid, seed: u64) -> Result<Trajectory> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::param("rate", "must be finite and >= 0"));
    }
    let mut rng = rng_for(seed, stream::JUMPS);
    let count = if rate > 0.0 {
        Poisson::new(rate * grid.horizon)
            .map_err(|e| Error::param("rate", e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut times: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * grid.horizon).collect();
    times.sort_by(f64::total_cmp);
    build(p, &snap_free(grid, &times), grid)
}

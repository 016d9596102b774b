//! Brownian drivers, the class `x(t) = x_0 e^{σ z(t)} ∏ (1 + a_i)` and the
//! exponential jump-diffusion process whose paths belong to it.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{rng_for, snap_free, stream};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::trajectory::{GridPath, JumpMark, Trajectory};

/// Standard Brownian motion on `grid`, `z(0) = 0`.
pub fn gen_brownian_z(grid: Grid, seed: u64) -> GridPath {
    brownian(grid, &mut rng_for(seed, stream::DRIVER))
}

pub(crate) fn brownian<R: Rng>(grid: Grid, rng: &mut R) -> GridPath {
    let sd = grid.mesh().sqrt();
    let mut values = Vec::with_capacity(grid.len());
    let mut z = 0.0;
    values.push(z);
    for _ in 0..grid.steps() {
        let e: f64 = rng.sample(StandardNormal);
        z += sd * e;
        values.push(z);
    }
    GridPath { grid, values }
}

/// The admissible jump factors `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorSet {
    Finite { values: Vec<f64> },
    Interval { lo: f64, hi: f64 },
}

impl FactorSet {
    pub fn contains(&self, a: f64) -> bool {
        match self {
            FactorSet::Finite { values } => values.iter().any(|&v| (v - a).abs() <= 1e-12 * (1.0 + v.abs())),
            FactorSet::Interval { lo, hi } => *lo <= a && a <= *hi,
        }
    }

    pub fn inf(&self) -> f64 {
        match self {
            FactorSet::Finite { values } => values.iter().copied().fold(f64::INFINITY, f64::min),
            FactorSet::Interval { lo, .. } => *lo,
        }
    }

    /// `inf_{c ∈ C} |c|`.
    pub fn inf_abs(&self) -> f64 {
        match self {
            FactorSet::Finite { values } => values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min),
            FactorSet::Interval { lo, hi } if *lo <= 0.0 && 0.0 <= *hi => 0.0,
            FactorSet::Interval { lo, hi } => lo.abs().min(hi.abs()),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            FactorSet::Finite { values } => values.is_empty(),
            FactorSet::Interval { lo, hi } => !(lo <= hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpDiffusionClassParams {
    pub x0: f64,
    pub sigma: f64,
    pub factors: FactorSet,
}

impl JumpDiffusionClassParams {
    pub fn new(x0: f64, sigma: f64, factors: FactorSet) -> Result<Self> {
        let p = Self { x0, sigma, factors };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return Err(Error::param("x0", "must be finite and > 0"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::param("sigma", "must be finite and > 0"));
        }
        if self.factors.is_empty() {
            return Err(Error::param("factors", "C must not be empty"));
        }
        if !(self.factors.inf() > -1.0) {
            return Err(Error::param("factors", "need inf C > -1"));
        }
        Ok(())
    }

    /// The separation `inf |c| > 0` required by ladder portfolios.
    pub fn require_separated(&self) -> Result<()> {
        if self.factors.inf_abs() > 0.0 {
            Ok(())
        } else {
            Err(Error::param("factors", "need inf |c| > 0"))
        }
    }
}

/// `x_0 e^{σ z(t)} ∏_{s_i ≤ t} (1 + a_i)` with jumps `(s_i, a_i)` on grid nodes.
pub fn gen_jump_diffusion_member(
    p: &JumpDiffusionClassParams,
    z: &GridPath,
    jumps: &[(f64, f64)],
) -> Result<Trajectory> {
    p.validate()?;
    let grid = z.grid;
    let mut idx = Vec::with_capacity(jumps.len());
    for &(t, a) in jumps {
        if !p.factors.contains(a) {
            return Err(Error::param("jump factor", format!("{a} is not in C")));
        }
        let k = grid.index_of(t)?;
        if k == 0 || idx.last().is_some_and(|&(j, _)| j >= k) {
            return Err(Error::param("jump times", "must be increasing nodes in (0, T]"));
        }
        idx.push((k, a));
    }
    member_from_indices(p, z, &idx)
}

pub(crate) fn member_from_indices(
    p: &JumpDiffusionClassParams,
    z: &GridPath,
    jumps: &[(usize, f64)],
) -> Result<Trajectory> {
    let grid = z.grid;
    let mut values = Vec::with_capacity(grid.len());
    let mut marks = Vec::with_capacity(jumps.len());
    let mut prod = 1.0;
    let mut next = 0;
    for k in 0..grid.len() {
        let base = p.x0 * (p.sigma * z.values[k]).exp();
        if jumps.get(next).is_some_and(|&(j, _)| j == k) {
            marks.push(JumpMark {
                index: k,
                left: base * prod,
            });
            prod *= 1.0 + jumps[next].1;
            next += 1;
        }
        values.push(base * prod);
    }
    Trajectory::new(grid, values, marks)?.with_volatility(vec![p.sigma; grid.len()])
}

/// Recover `(z, [(s_i, a_i)])` from a class member with known `x_0` and `σ`.
pub fn factorize_member(p: &JumpDiffusionClassParams, x: &Trajectory) -> Result<(GridPath, Vec<(f64, f64)>)> {
    let jumps: Vec<(f64, f64)> = x
        .jumps()
        .iter()
        .map(|j| (j.time, x.value(j.index) / j.left - 1.0))
        .collect();
    let mut log_prod = 0.0;
    let mut next = 0;
    let marks = x.marks();
    let mut z = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        if marks.get(next).is_some_and(|m| m.index == k) {
            log_prod += (x.value(k) / marks[next].left).ln();
            next += 1;
        }
        z.push(((x.value(k) / p.x0).ln() - log_prod) / p.sigma);
    }
    Ok((GridPath::new(x.grid(), z)?, jumps))
}

/// The law `F_X` of the multiplicative jump sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
}

impl JumpLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            JumpLaw::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::param("jump_law", "values and probs must match and be non-empty"));
                }
                if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::param("jump_law", "probs must be >= 0 and sum to 1"));
                }
                if values.iter().any(|&v| !(v > -1.0)) {
                    return Err(Error::param("jump_law", "factors must exceed -1"));
                }
            }
            JumpLaw::Uniform { lo, hi } => {
                if !(lo < hi) || !(*lo > -1.0) {
                    return Err(Error::param("jump_law", "need -1 < lo < hi"));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            JumpLaw::Discrete { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
            JumpLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            JumpLaw::Discrete { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                values[values.len() - 1]
            }
            JumpLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    /// The support, as a factor set.
    pub fn support(&self) -> FactorSet {
        match self {
            JumpLaw::Discrete { values, probs } => FactorSet::Finite {
                values: values
                    .iter()
                    .zip(probs)
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(v, _)| *v)
                    .collect(),
            },
            JumpLaw::Uniform { lo, hi } => FactorSet::Interval { lo: *lo, hi: *hi },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpDiffusionProcessParams {
    pub x0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub law: JumpLaw,
}

impl JumpDiffusionProcessParams {
    pub fn new(x0: f64, mu: f64, sigma: f64, lambda: f64, law: JumpLaw) -> Result<Self> {
        let p = Self {
            x0,
            mu,
            sigma,
            lambda,
            law,
        };
        p.validate()?;
        Ok(p)
    }

    /// Drift `μ = −λ E[X]`, which makes `Z` a martingale.
    pub fn compensated(x0: f64, sigma: f64, lambda: f64, law: JumpLaw) -> Result<Self> {
        let mu = -lambda * law.mean();
        Self::new(x0, mu, sigma, lambda, law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return Err(Error::param("x0", "must be finite and > 0"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::param("sigma", "must be finite and > 0"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param("lambda", "must be finite and >= 0"));
        }
        if !self.mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        self.law.validate()
    }

    pub fn is_compensated(&self) -> bool {
        (self.mu + self.lambda * self.law.mean()).abs() <= 1e-12 * (1.0 + self.mu.abs())
    }

    /// The trajectory class the paths belong to (`C` = support of `F_X`).
    pub fn class(&self) -> JumpDiffusionClassParams {
        JumpDiffusionClassParams {
            x0: self.x0,
            sigma: self.sigma,
            factors: self.law.support(),
        }
    }
}

/// A process path with its class factorisation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSample {
    pub trajectory: Trajectory,
    /// `z(t) = W_t + ((μ − σ²/2)/σ) t`.
    pub z: GridPath,
    pub jumps: Vec<(f64, f64)>,
}

/// `Z_t = x_0 exp((μ − σ²/2)t + σW_t) ∏_{i ≤ N_t} (1 + X_i)`.
pub fn sample_jump_diffusion_process(p: &JumpDiffusionProcessParams, grid: Grid, seed: u64) -> Result<Trajectory> {
    Ok(sample_jump_diffusion_parts(p, grid, seed)?.trajectory)
}

pub fn sample_jump_diffusion_parts(p: &JumpDiffusionProcessParams, grid: Grid, seed: u64) -> Result<ProcessSample> {
    p.validate()?;
    let mut w = brownian(grid, &mut rng_for(seed, stream::DRIVER));
    let drift = (p.mu - 0.5 * p.sigma * p.sigma) / p.sigma;
    for (k, v) in w.values.iter_mut().enumerate() {
        *v += drift * grid.time(k);
    }
    let mut rng = rng_for(seed, stream::JUMPS);
    let count = if p.lambda > 0.0 {
        Poisson::new(p.lambda * grid.horizon)
            .map_err(|e| Error::param("lambda", e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut times: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * grid.horizon).collect();
    times.sort_by(f64::total_cmp);
    let idx = snap_free(grid, &times);
    let jumps: Vec<(usize, f64)> = idx.into_iter().map(|k| (k, p.law.sample(&mut rng))).collect();
    let trajectory = member_from_indices(&p.class(), &w, &jumps)?;
    Ok(ProcessSample {
        trajectory,
        jumps: jumps.iter().map(|&(k, a)| (grid.time(k), a)).collect(),
        z: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class() -> JumpDiffusionClassParams {
        JumpDiffusionClassParams::new(100.0, 0.2, FactorSet::Finite { values: vec![-0.1, 0.1] }).unwrap()
    }

    #[test]
    fn brownian_basics() {
        let g = Grid::new(1.0, 10).unwrap();
        let z = gen_brownian_z(g, 3);
        assert_eq!(z.values[0], 0.0);
        assert_eq!(z, gen_brownian_z(g, 3));
        assert_ne!(z, gen_brownian_z(g, 4));
    }

    #[test]
    fn member_examples() {
        let g = Grid::new(1.0, 4).unwrap();
        let zero = GridPath::zeros(g);
        let x = gen_jump_diffusion_member(&class(), &zero, &[(0.5, 0.1)]).unwrap();
        assert_eq!(x.value(0), 100.0);
        assert!((x.terminal() - 110.0).abs() < 1e-12);
        assert_eq!(x.mark_at(8), Some(100.0));
        let z = gen_brownian_z(g, 1);
        let y = gen_jump_diffusion_member(&class(), &z, &[]).unwrap();
        assert!(y.is_continuous());
        for k in 0..g.len() {
            assert!((y.value(k) - 100.0 * (0.2 * z.values[k]).exp()).abs() < 1e-12);
        }
        assert_eq!(y.volatility().unwrap()[3], 0.2);
        assert!(gen_jump_diffusion_member(&class(), &zero, &[(0.5, 0.2)]).is_err());
        assert!(gen_jump_diffusion_member(&class(), &zero, &[(0.3, 0.1)]).is_err());
    }

    #[test]
    fn class_validation() {
        assert!(JumpDiffusionClassParams::new(100.0, 0.2, FactorSet::Interval { lo: -1.0, hi: 0.1 }).is_err());
        assert!(JumpDiffusionClassParams::new(100.0, 0.0, FactorSet::Finite { values: vec![0.1] }).is_err());
        let c = JumpDiffusionClassParams::new(100.0, 0.2, FactorSet::Interval { lo: -0.1, hi: 0.1 }).unwrap();
        assert!(c.require_separated().is_err());
        assert!(class().require_separated().is_ok());
    }

    #[test]
    fn factorisation_round_trip() {
        let g = Grid::new(1.0, 8).unwrap();
        let z = gen_brownian_z(g, 9);
        let jumps = [(0.25, 0.1), (0.5, -0.1), (0.75, 0.1)];
        let x = gen_jump_diffusion_member(&class(), &z, &jumps).unwrap();
        let (z2, j2) = factorize_member(&class(), &x).unwrap();
        assert_eq!(j2.len(), 3);
        for (a, b) in jumps.iter().zip(&j2) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-12);
        }
        let factors: Vec<(f64, f64)> = jumps.to_vec();
        let y = gen_jump_diffusion_member(&class(), &z2, &factors).unwrap();
        for k in 0..g.len() {
            assert!((x.value(k) - y.value(k)).abs() <= 1e-12 * x.value(k));
        }
    }

    #[test]
    fn process_without_jumps() {
        let law = JumpLaw::Discrete { values: vec![-0.1, 0.1], probs: vec![0.5, 0.5] };
        let p = JumpDiffusionProcessParams::new(100.0, 0.0, 0.2, 0.0, law.clone()).unwrap();
        let g = Grid::new(1.0, 8).unwrap();
        let x = sample_jump_diffusion_process(&p, g, 5).unwrap();
        assert!(x.is_continuous());
        let q = JumpDiffusionProcessParams::compensated(100.0, 0.2, 3.0, JumpLaw::Uniform { lo: 0.05, hi: 0.15 }).unwrap();
        assert!((q.mu + 0.3).abs() < 1e-12);
        assert!(q.is_compensated());
        let s = sample_jump_diffusion_parts(&q, g, 5).unwrap();
        assert_eq!(s.jumps.len(), s.trajectory.marks().len());
        let rebuilt = gen_jump_diffusion_member(&q.class(), &s.z, &s.jumps).unwrap();
        assert_eq!(rebuilt, s.trajectory);
    }
}

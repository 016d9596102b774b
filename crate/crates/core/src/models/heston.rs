//! Heston-type prices with window-averaged CIR variance, and the modified
//! model with an extra zero-quadratic-variation term `Y` in the exponent.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::fbm::fbm_with_rng;
use super::{rng_for, stream};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::trajectory::{GridPath, Trajectory};

/// Declared ceiling on the level-`L` quadratic variation of `Y`.
pub const DEFAULT_Y_QV_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonTypeParams {
    pub z0: f64,
    pub mu: f64,
    pub alpha: f64,
    pub k: f64,
    pub theta: f64,
    pub xi: f64,
    /// Averaging window `h`.
    pub h: f64,
    pub v0: f64,
}

impl HestonTypeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("z0", self.z0),
            ("k", self.k),
            ("theta", self.theta),
            ("xi", self.xi),
            ("h", self.h),
            ("v0", self.v0),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        if !self.mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", "must lie strictly inside (0, 1)"));
        }
        if 2.0 * self.k * self.theta < self.xi * self.xi {
            return Err(Error::param("k, theta, xi", "Feller condition 2*k*theta >= xi^2 fails"));
        }
        Ok(())
    }

    /// `E[V_t] = θ + (v_0 − θ) e^{−kt}`.
    pub fn cir_mean(&self, t: f64) -> f64 {
        self.theta + (self.v0 - self.theta) * (-self.k * t).exp()
    }
}

/// CIR variance, its trailing window average and `σ = √V̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirPath {
    pub v: GridPath,
    pub vbar: GridPath,
    pub sigma: GridPath,
    /// Total variation of `σ` on the grid.
    pub sigma_total_variation: f64,
    /// `ΔB^{(2)}` increments driving `V` (shared with the price).
    pub(crate) db2: Vec<f64>,
}

/// Full-truncation Euler CIR with prehistory `V ≡ v_0` on `[−h, 0]`.
pub fn sample_cir_regularized(p: &HestonTypeParams, grid: Grid, seed: u64) -> Result<CirPath> {
    p.validate()?;
    let n = grid.steps();
    let dt = grid.mesh();
    let sd = dt.sqrt();
    let mut rng = rng_for(seed, stream::DRIVER);
    let mut v = Vec::with_capacity(n + 1);
    let mut db2 = Vec::with_capacity(n);
    v.push(p.v0);
    for i in 0..n {
        let e: f64 = rng.sample(StandardNormal);
        let db = sd * e;
        let vp = v[i].max(0.0);
        db2.push(db);
        v.push(v[i] + p.k * (p.theta - vp) * dt + p.xi * vp.sqrt() * db);
    }
    let vp: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    // cumulative trapezoid integral of V+ at the nodes
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        cum.push(cum[i] + 0.5 * dt * (vp[i] + vp[i + 1]));
    }
    // ∫_0^s of the piecewise-linear interpolant; v_0 prehistory for s < 0
    let integral = |s: f64| -> f64 {
        if s <= 0.0 {
            return p.v0 * s;
        }
        let j = ((s / dt).floor() as usize).min(n - 1);
        let r = s - grid.time(j);
        cum[j] + r * vp[j] + r * r / (2.0 * dt) * (vp[j + 1] - vp[j])
    };
    let mut vbar = Vec::with_capacity(n + 1);
    let mut sigma = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = grid.time(k);
        let avg = (cum[k] - integral(s - p.h)) / p.h;
        if !(avg > 0.0) {
            return Err(Error::NonFinite(format!("window-averaged variance {avg} at t = {s}")));
        }
        vbar.push(avg);
        sigma.push(avg.sqrt());
    }
    let sigma_total_variation = sigma.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok(CirPath {
        v: GridPath::new(grid, v)?,
        vbar: GridPath::new(grid, vbar)?,
        sigma: GridPath::new(grid, sigma)?,
        sigma_total_variation,
        db2,
    })
}

fn heston_log(p: &HestonTypeParams, grid: Grid, seed: u64) -> Result<(Vec<f64>, CirPath)> {
    let cir = sample_cir_regularized(p, grid, seed)?;
    let dt = grid.mesh();
    let sd = dt.sqrt();
    let beta = (1.0 - p.alpha * p.alpha).sqrt();
    let mut rng = rng_for(seed, stream::JUMPS);
    let s = &cir.sigma.values;
    let mut logz = Vec::with_capacity(grid.len());
    logz.push(p.z0.ln());
    for i in 0..grid.steps() {
        let e: f64 = rng.sample(StandardNormal);
        let db1 = sd * e;
        let next = logz[i] + (p.mu - 0.5 * s[i] * s[i]) * dt + s[i] * (p.alpha * db1 + beta * cir.db2[i]);
        logz.push(next);
    }
    Ok((logz, cir))
}

fn price(grid: Grid, logz: &[f64], z0: f64, sigma: &[f64]) -> Result<Trajectory> {
    let mut values: Vec<f64> = logz.iter().map(|l| l.exp()).collect();
    values[0] = z0;
    Trajectory::new(grid, values, vec![])?.with_volatility(sigma.to_vec())
}

/// Heston-type price path; the volatility curve `σ` is attached as metadata.
pub fn sample_heston_type(p: &HestonTypeParams, grid: Grid, seed: u64) -> Result<Trajectory> {
    let (logz, cir) = heston_log(p, grid, seed)?;
    price(grid, &logz, p.z0, &cir.sigma.values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YSpec {
    None,
    Fbm { hurst: f64 },
    Path { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedHestonParams {
    pub heston: HestonTypeParams,
    pub y: YSpec,
    #[serde(default = "default_threshold")]
    pub qv_threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_Y_QV_THRESHOLD
}

impl ModifiedHestonParams {
    pub fn new(heston: HestonTypeParams, y: YSpec) -> Result<Self> {
        let p = Self {
            heston,
            y,
            qv_threshold: DEFAULT_Y_QV_THRESHOLD,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.heston.validate()?;
        if !(self.qv_threshold > 0.0) {
            return Err(Error::param("qv_threshold", "must be > 0"));
        }
        match &self.y {
            YSpec::Fbm { hurst } if !(*hurst > 0.5 && *hurst <= 0.75) => {
                Err(Error::param("hurst", "must lie in (1/2, 3/4]"))
            }
            YSpec::Path { values } if values.first().is_some_and(|&v| v != 0.0) => {
                Err(Error::param("y", "Y(0) must be 0"))
            }
            _ => Ok(()),
        }
    }

    /// The `Y` path for this seed.
    pub fn y_path(&self, grid: Grid, seed: u64) -> Result<GridPath> {
        let y = match &self.y {
            YSpec::None => GridPath::zeros(grid),
            YSpec::Fbm { hurst } => fbm_with_rng(*hurst, grid, &mut rng_for(seed, stream::Y))?,
            YSpec::Path { values } => GridPath::new(grid, values.clone())?,
        };
        let qv = y.quadratic_variation(grid.level)?;
        if qv > self.qv_threshold {
            return Err(Error::param(
                "y",
                format!("quadratic variation {qv:.4} exceeds the declared threshold {}", self.qv_threshold),
            ));
        }
        Ok(y)
    }
}

/// Heston-type log-price plus an independent `Y` in the exponent.
pub fn sample_modified_heston(p: &ModifiedHestonParams, grid: Grid, seed: u64) -> Result<Trajectory> {
    p.validate()?;
    let (mut logz, cir) = heston_log(&p.heston, grid, seed)?;
    if !matches!(p.y, YSpec::None) {
        let y = p.y_path(grid, seed)?;
        for (l, yv) in logz.iter_mut().zip(&y.values) {
            *l += yv;
        }
    }
    price(grid, &logz, p.heston.z0, &cir.sigma.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn params() -> HestonTypeParams {
        HestonTypeParams {
            z0: 100.0,
            mu: 0.0,
            alpha: 0.5,
            k: 2.0,
            theta: 0.04,
            xi: 0.3,
            h: 0.1,
            v0: 0.04,
        }
    }

    #[test]
    fn validation() {
        assert!(params().validate().is_ok());
        let mut p = params();
        p.xi = 1.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.alpha = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn deterministic_limit() {
        let mut p = params();
        p.xi = 1e-8;
        let g = Grid::new(1.0, 10).unwrap();
        let c = sample_cir_regularized(&p, g, 1).unwrap();
        for (v, s) in c.v.values.iter().zip(&c.sigma.values) {
            assert!((v - 0.04).abs() < 1e-6);
            assert!((s - 0.2).abs() < 1e-5);
        }
    }

    #[test]
    fn prehistory_blend_is_exact_at_theta() {
        let mut p = params();
        p.xi = 1e-12;
        let g = Grid::new(1.0, 8).unwrap();
        let c = sample_cir_regularized(&p, g, 2).unwrap();
        // s < h mixes prehistory and path; both equal θ here
        assert!((c.sigma.values[10] - 0.2).abs() < 1e-9);
        assert!(c.sigma_total_variation < 1e-6);
    }

    #[test]
    fn price_starts_at_z0_and_y_none_matches() {
        let g = Grid::new(1.0, 14).unwrap();
        let z = sample_heston_type(&params(), g, 3).unwrap();
        assert_eq!(z.x0(), 100.0);
        assert!(z.volatility().is_some());
        let m = ModifiedHestonParams::new(params(), YSpec::None).unwrap();
        assert_eq!(sample_modified_heston(&m, g, 3).unwrap(), z);
        let f = ModifiedHestonParams::new(params(), YSpec::Fbm { hurst: 0.6 }).unwrap();
        let zf = sample_modified_heston(&f, g, 3).unwrap();
        assert_eq!(zf.x0(), 100.0);
        assert_ne!(zf, z);
    }

    #[test]
    fn y_threshold_enforced() {
        let g = Grid::new(1.0, 2).unwrap();
        let p = ModifiedHestonParams::new(params(), YSpec::Path { values: vec![0.0, 1.0, 0.0, 1.0, 0.0] }).unwrap();
        assert!(sample_modified_heston(&p, g, 1).is_err());
        assert!(ModifiedHestonParams::new(params(), YSpec::Fbm { hurst: 0.9 }).is_err());
    }
}

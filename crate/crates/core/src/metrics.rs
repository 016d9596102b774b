//! Trajectory distances: uniform, a Skorokhod upper bound with its warp, and
//! the quadratic-variation metric `d_QV`.
//!
//! Paths are read as right-continuous step functions on their grid, so
//! `y∘λ(t)` is the value at the last node `≤ λ(t)`.
//!
//! The Skorokhod bound minimises `max{‖λ−I‖, ‖x−y∘λ‖}` over piecewise-linear
//! warps through an `m × m` lattice (`m = 2^r ≤ N`) with slopes drawn from
//! `{1, 2, 1/2, 3, 1/3, 3/2, 2/3}` and `|i − j| ≤ band`. The identity warp is
//! always admissible, so the bound never exceeds the uniform distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Trajectory, DEFAULT_DENSITY_WINDOW};

const STEPS: [(usize, usize); 7] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];

/// Default lattice band for [`skorokhod_distance_ub`].
pub const DEFAULT_WARP_BAND: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Uniform,
    Skorokhod,
    Qv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QvMode {
    /// Estimated QV densities.
    Definitional,
    /// `x²σ_x²` from attached volatility curves.
    Closed,
}

/// A monotone piecewise-linear time change through `(s, λ(s))` knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpFunction {
    pub knots: Vec<(f64, f64)>,
}

impl WarpFunction {
    pub fn identity(horizon: f64) -> Self {
        Self {
            knots: vec![(0.0, 0.0), (horizon, horizon)],
        }
    }

    /// `‖λ − I‖`, attained at a knot.
    pub fn distortion(&self) -> f64 {
        self.knots.iter().map(|(s, l)| (l - s).abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = self.knots.partition_point(|&(a, _)| a <= s).clamp(1, self.knots.len() - 1);
        let (s0, l0) = self.knots[k - 1];
        let (s1, l1) = self.knots[k];
        l0 + (s - s0) * (l1 - l0) / (s1 - s0)
    }

    /// Strictly increasing and endpoint-fixing.
    pub fn is_valid(&self, horizon: f64) -> bool {
        let n = self.knots.len();
        n >= 2
            && self.knots[0] == (0.0, 0.0)
            && self.knots[n - 1] == (horizon, horizon)
            && self.knots.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: MetricKind,
    pub distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpFunction>,
    /// `‖λ − I‖` of the reported warp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warp_distortion: Option<f64>,
    /// `‖x − y∘λ‖` along the reported warp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warped_sup: Option<f64>,
    /// `‖x − y‖` summand of `d_QV`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_part: Option<f64>,
    /// Density summand of `d_QV`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_part: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<QvMode>,
}

impl MetricReport {
    fn plain(metric: MetricKind, distance: f64) -> Self {
        Self {
            metric,
            distance,
            warp: None,
            warp_distortion: None,
            warped_sup: None,
            uniform_part: None,
            density_part: None,
            mode: None,
        }
    }
}

fn same_grid(x: &Trajectory, y: &Trajectory) -> Result<()> {
    if x.grid().same_as(&y.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `max_k |x(t_k) − y(t_k)|`.
pub fn uniform_distance(x: &Trajectory, y: &Trajectory) -> Result<f64> {
    same_grid(x, y)?;
    Ok(sup_diff(x.values(), y.values()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Skorokhod upper bound with the default band.
pub fn skorokhod_distance_ub(x: &Trajectory, y: &Trajectory, resolution: usize) -> Result<MetricReport> {
    skorokhod_distance_ub_banded(x, y, resolution, DEFAULT_WARP_BAND)
}

/// Skorokhod upper bound on an `m × m` lattice with `|i − j| ≤ band`.
pub fn skorokhod_distance_ub_banded(
    x: &Trajectory,
    y: &Trajectory,
    m: usize,
    band: usize,
) -> Result<MetricReport> {
    same_grid(x, y)?;
    let n = x.steps();
    if !m.is_power_of_two() || m > n {
        return Err(Error::param(
            "warp_resolution",
            format!("must be a power of two no larger than the grid's {n} steps"),
        ));
    }
    let c = n / m;
    for (name, path) in [("x", x), ("y", y)] {
        let cells: Vec<usize> = path.marks().iter().map(|mk| mk.index / c).collect();
        if cells.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param(
                "warp_resolution",
                format!("{m} cells cannot separate the jumps of {name}"),
            ));
        }
    }
    let band = band.clamp(1, m);
    let (xv, yv) = (x.values(), y.values());
    let width = 2 * band + 1;
    let slot = |i: usize, j: usize| i * width + (j + band - i);
    let mut best = vec![f64::INFINITY; (m + 1) * width];
    let mut from = vec![u8::MAX; (m + 1) * width];
    best[slot(0, 0)] = 0.0;
    let cell = x.horizon() / m as f64;

    let seg_cost = |i: usize, j: usize, di: usize, dj: usize, cap: f64| -> f64 {
        let dist = (j.abs_diff(i).max((j + dj).abs_diff(i + di))) as f64 * cell;
        if dist >= cap {
            return dist;
        }
        let (x0, y0) = (i * c, j * c);
        let mut worst = dist;
        for p in 0..di * c * dj {
            let d = (xv[x0 + p / dj] - yv[y0 + p / di]).abs();
            if d > worst {
                worst = d;
                if worst >= cap {
                    break;
                }
            }
        }
        worst
    };

    for i in 0..m {
        let jlo = i.saturating_sub(band);
        let jhi = (i + band).min(m);
        for j in jlo..=jhi {
            let here = best[slot(i, j)];
            if here.is_infinite() {
                continue;
            }
            for (s, &(di, dj)) in STEPS.iter().enumerate() {
                let (ni, nj) = (i + di, j + dj);
                if ni > m || nj > m || ni.abs_diff(nj) > band {
                    continue;
                }
                let target = slot(ni, nj);
                if here >= best[target] {
                    continue;
                }
                let cost = seg_cost(i, j, di, dj, best[target]).max(here);
                if cost < best[target] {
                    best[target] = cost;
                    from[target] = s as u8;
                }
            }
        }
    }

    let mut knots = vec![(m, m)];
    let (mut i, mut j) = (m, m);
    while (i, j) != (0, 0) {
        let (di, dj) = STEPS[from[slot(i, j)] as usize];
        i -= di;
        j -= dj;
        knots.push((i, j));
    }
    knots.reverse();
    let mut value = (xv[n] - yv[n]).abs();
    for w in knots.windows(2) {
        let ((i, j), (ni, nj)) = (w[0], w[1]);
        let (di, dj) = (ni - i, nj - j);
        let (x0, y0) = (i * c, j * c);
        for p in 0..di * c * dj {
            value = value.max((xv[x0 + p / dj] - yv[y0 + p / di]).abs());
        }
    }
    // merge collinear knots
    let mut pts: Vec<(usize, usize)> = Vec::with_capacity(knots.len());
    for k in knots {
        if pts.len() >= 2 {
            let (a, b) = (pts[pts.len() - 2], pts[pts.len() - 1]);
            if (b.0 - a.0) * (k.1 - b.1) == (b.1 - a.1) * (k.0 - b.0) {
                pts.pop();
            }
        }
        pts.push(k);
    }
    let warp = WarpFunction {
        knots: pts
            .iter()
            .map(|&(i, j)| (i as f64 * cell, j as f64 * cell))
            .collect(),
    };
    let distortion = warp.distortion();
    Ok(MetricReport {
        warp: Some(warp),
        warp_distortion: Some(distortion),
        warped_sup: Some(value),
        ..MetricReport::plain(MetricKind::Skorokhod, distortion.max(value))
    })
}

fn reject_jumps(x: &Trajectory, y: &Trajectory) -> Result<()> {
    if x.is_continuous() && y.is_continuous() {
        Ok(())
    } else {
        Err(Error::JumpsNotAllowed("d_QV is defined on continuous trajectories"))
    }
}

/// `d_QV(x, y) = ‖x − y‖ + ‖d⟨x⟩/dt − d⟨y⟩/dt‖` with the default density window.
pub fn qv_metric(x: &Trajectory, y: &Trajectory, mode: QvMode, level: u32) -> Result<MetricReport> {
    qv_metric_windowed(x, y, mode, level, DEFAULT_DENSITY_WINDOW * x.horizon())
}

/// [`qv_metric`] with an explicit density window (definitional mode only).
pub fn qv_metric_windowed(
    x: &Trajectory,
    y: &Trajectory,
    mode: QvMode,
    level: u32,
    window: f64,
) -> Result<MetricReport> {
    same_grid(x, y)?;
    reject_jumps(x, y)?;
    let uniform = sup_diff(x.values(), y.values());
    let density = match mode {
        QvMode::Definitional => {
            if x.values() == y.values() {
                0.0
            } else {
                sup_diff(&x.local_qv_density(level, window)?, &y.local_qv_density(level, window)?)
            }
        }
        QvMode::Closed => {
            let sx = x.volatility().ok_or(Error::MissingVolatility("x"))?;
            let sy = y.volatility().ok_or(Error::MissingVolatility("y"))?;
            let (xv, yv) = (x.values(), y.values());
            (0..xv.len())
                .map(|k| {
                    let a = xv[k] * sx[k];
                    let b = yv[k] * sy[k];
                    (a * a - b * b).abs()
                })
                .fold(0.0, f64::max)
        }
    };
    Ok(MetricReport {
        uniform_part: Some(uniform),
        density_part: Some(density),
        mode: Some(mode),
        ..MetricReport::plain(MetricKind::Qv, uniform + density)
    })
}

/// A metric together with its numerical settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum MetricSpec {
    Uniform,
    Skorokhod {
        resolution: usize,
        #[serde(default = "default_band")]
        band: usize,
    },
    Qv {
        mode: QvMode,
        level: u32,
    },
}

fn default_band() -> usize {
    DEFAULT_WARP_BAND
}

impl MetricSpec {
    pub fn kind(&self) -> MetricKind {
        match self {
            MetricSpec::Uniform => MetricKind::Uniform,
            MetricSpec::Skorokhod { .. } => MetricKind::Skorokhod,
            MetricSpec::Qv { .. } => MetricKind::Qv,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricSpec::Uniform => "uniform",
            MetricSpec::Skorokhod { .. } => "skorokhod",
            MetricSpec::Qv { .. } => "qv",
        }
    }

    pub fn report(&self, x: &Trajectory, y: &Trajectory) -> Result<MetricReport> {
        match *self {
            MetricSpec::Uniform => Ok(MetricReport::plain(MetricKind::Uniform, uniform_distance(x, y)?)),
            MetricSpec::Skorokhod { resolution, band } => skorokhod_distance_ub_banded(x, y, resolution, band),
            MetricSpec::Qv { mode, level } => qv_metric(x, y, mode, level),
        }
    }

    pub fn distance(&self, x: &Trajectory, y: &Trajectory) -> Result<f64> {
        Ok(self.report(x, y)?.distance)
    }
}

//! RCLL price trajectories on dyadic grids.
//!
//! A [`Trajectory`] stores node values `v_0..v_N` on a level-`L` dyadic grid
//! together with explicit jump marks. A mark at node `j` carries the left
//! limit `v_j^-`; between nodes nothing is interpolated. Quadratic variation
//! along the level-`l` partition splits into a continuous part and the sum of
//! squared marked jumps.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Fraction of the horizon used by [`Trajectory::local_qv_density`] by default.
pub const DEFAULT_DENSITY_WINDOW: f64 = 0.25;

/// A jump at grid node `index` with left limit `left`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpMark {
    pub index: usize,
    pub left: f64,
}

/// A jump as reported by [`Trajectory::jumps`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub index: usize,
    pub time: f64,
    pub size: f64,
    pub left: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid,
    values: Vec<f64>,
    marks: Vec<JumpMark>,
    volatility: Option<Arc<[f64]>>,
}

/// Build a validated trajectory from raw grid times, values and `(index, left value)` marks.
pub fn make_trajectory(times: &[f64], values: &[f64], marks: &[(usize, f64)]) -> Result<Trajectory> {
    let grid = Grid::from_times(times)?;
    let marks = marks
        .iter()
        .map(|&(index, left)| JumpMark { index, left })
        .collect();
    Trajectory::new(grid, values.to_vec(), marks)
}

fn check_price(index: usize, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::NonPositiveValue { index, value });
    }
    Ok(())
}

impl Trajectory {
    pub fn new(grid: Grid, values: Vec<f64>, mut marks: Vec<JumpMark>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::NonDyadicGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            check_price(i, v)?;
        }
        marks.sort_by_key(|m| m.index);
        for (i, m) in marks.iter().enumerate() {
            if m.index == 0 || m.index >= values.len() {
                return Err(Error::InvalidJumpMark {
                    index: m.index,
                    reason: "must lie in 1..=N",
                });
            }
            if i > 0 && marks[i - 1].index == m.index {
                return Err(Error::InvalidJumpMark {
                    index: m.index,
                    reason: "duplicate mark",
                });
            }
            check_price(m.index, m.left)?;
            if values[m.index] == m.left {
                return Err(Error::ZeroJump { index: m.index });
            }
        }
        Ok(Self {
            grid,
            values,
            marks,
            volatility: None,
        })
    }

    /// A constant path at `x0`.
    pub fn constant(grid: Grid, x0: f64) -> Result<Self> {
        Self::new(grid, vec![x0; grid.len()], Vec::new())
    }

    /// Attach a per-node volatility curve `sigma(t)` (the model's `d<log x>/dt = sigma^2`).
    pub fn with_volatility(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.grid.len() {
            return Err(Error::param("volatility", "one value per grid node"));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::param("volatility", "finite and >= 0"));
        }
        self.volatility = Some(sigma.into());
        Ok(self)
    }

    pub fn volatility(&self) -> Option<&[f64]> {
        self.volatility.as_deref()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn level(&self) -> u32 {
        self.grid.level
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    pub fn x0(&self) -> f64 {
        self.values[0]
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn time(&self, k: usize) -> f64 {
        self.grid.time(k)
    }

    pub fn marks(&self) -> &[JumpMark] {
        &self.marks
    }

    pub fn is_continuous(&self) -> bool {
        self.marks.is_empty()
    }

    /// Left value recorded at node `k`, if `k` is a marked jump.
    pub fn mark_at(&self, k: usize) -> Option<f64> {
        self.marks
            .binary_search_by_key(&k, |m| m.index)
            .ok()
            .map(|i| self.marks[i].left)
    }

    /// Left limit at node `k >= 1`: the mark's left value at a jump, else the previous node value.
    #[inline]
    pub fn left_value(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        self.mark_at(k).unwrap_or(self.values[k - 1])
    }

    /// The value the path approaches just before node `k` along its continuous part.
    ///
    /// Equal to the mark's left value at a jump and to `v_k` otherwise.
    #[inline]
    pub fn pre_jump_value(&self, k: usize) -> f64 {
        self.mark_at(k).unwrap_or(self.values[k])
    }

    /// `x(t^-)` for `t` in `(0, T]` on the grid.
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        let k = self.grid.index_of(t)?;
        if k == 0 {
            return Err(Error::OffGrid { t });
        }
        Ok(self.left_value(k))
    }

    /// `x(t)` for `t` on the grid.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(t)?])
    }

    pub fn jumps(&self) -> Vec<Jump> {
        self.marks
            .iter()
            .map(|m| Jump {
                index: m.index,
                time: self.grid.time(m.index),
                size: self.values[m.index] - m.left,
                left: m.left,
            })
            .collect()
    }

    /// Jumps with node index in `(lo, hi]`.
    pub fn jumps_in(&self, lo: usize, hi: usize) -> impl Iterator<Item = &JumpMark> + '_ {
        let start = self.marks.partition_point(|m| m.index <= lo);
        self.marks[start..].iter().take_while(move |m| m.index <= hi)
    }

    /// Number of jumps with node index in `(lo, hi]`.
    pub fn jump_count_in(&self, lo: usize, hi: usize) -> usize {
        self.jumps_in(lo, hi).count()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether `self` and `other` coincide on `[0, t_k]` node by node, jump marks included.
    pub fn agrees_through(&self, other: &Trajectory, k: usize) -> bool {
        if !self.grid.same_as(&other.grid) {
            return false;
        }
        if self.values[..=k] != other.values[..=k] {
            return false;
        }
        let a: Vec<_> = self.jumps_in(0, k).collect();
        let b: Vec<_> = other.jumps_in(0, k).collect();
        a == b
    }

    /// Replace nodes after `k` with `tail`'s nodes, keeping `self` on `[0, t_k]`.
    ///
    /// Used by the stopping-time and predictability fuzzers. The splice point
    /// is continuous at `t_k` by construction, so the tail is rescaled to
    /// start from `v_k`.
    pub fn splice_after(&self, k: usize, tail: &Trajectory) -> Result<Trajectory> {
        if !self.grid.same_as(&tail.grid) {
            return Err(Error::GridMismatch);
        }
        let scale = self.values[k] / tail.values[k];
        let mut values = self.values[..=k].to_vec();
        values.extend(tail.values[k + 1..].iter().map(|v| v * scale));
        let mut marks: Vec<JumpMark> = self.jumps_in(0, k).copied().collect();
        marks.extend(tail.jumps_in(k, usize::MAX).map(|m| JumpMark {
            index: m.index,
            left: m.left * scale,
        }));
        let mut out = Trajectory::new(self.grid, values, marks)?;
        out.volatility = self.volatility.clone();
        Ok(out)
    }

    /// Pathwise quadratic variation along the level-`level` partition.
    pub fn quadratic_variation(&self, level: u32) -> Result<QvCurve> {
        let stride = self.grid.stride(level)?;
        let n = self.steps() / stride;
        let coarse_mesh = self.grid.mesh() * stride as f64;
        let mut curve = QvCurve::with_capacity(n + 1);
        curve.push(0.0, 0.0, 0.0);
        let (mut cont, mut jump) = (0.0, 0.0);
        let mut density = 0.0;
        for k in 0..n {
            let (a, b) = (k * stride, (k + 1) * stride);
            let mut jump_sum = 0.0;
            let mut jump_sq = 0.0;
            for m in self.jumps_in(a, b) {
                let d = self.values[m.index] - m.left;
                jump_sum += d;
                jump_sq += d * d;
            }
            let c = (self.values[b] - self.values[a]) - jump_sum;
            let c2 = c * c;
            cont += c2;
            jump += jump_sq;
            density = c2 / coarse_mesh;
            // density at node k describes the step (t_k, t_{k+1}]
            curve.density[k] = density;
            curve.push(self.grid.time(b), cont, jump);
        }
        curve.density[n] = density;
        Ok(curve)
    }

    /// Local estimate of `d<x>_t/dt` at level-`level` nodes.
    ///
    /// Uses `x(t)^2` times the mean rate of squared continuous log-increments
    /// (finest grid) over a window of width `window` centred at `t`, shifted
    /// to stay inside `[0, T]`.
    pub fn local_qv_density(&self, level: u32, window: f64) -> Result<Vec<f64>> {
        let stride = self.grid.stride(level)?;
        if !(window > 0.0) {
            return Err(Error::param("window", "must be > 0"));
        }
        let n_fine = self.steps();
        let mut prefix = Vec::with_capacity(n_fine + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for s in 0..n_fine {
            let inc = self.pre_jump_value(s + 1).ln() - self.values[s].ln();
            acc += inc * inc;
            prefix.push(acc);
        }
        let mesh = self.grid.mesh();
        let width = ((window / mesh).round() as usize).clamp(1, n_fine);
        Ok((0..=n_fine / stride)
            .map(|k| {
                let c = k * stride;
                let lo = c.saturating_sub(width / 2).min(n_fine - width);
                let hi = lo + width;
                let rate = (prefix[hi] - prefix[lo]) / (width as f64 * mesh);
                self.values[c] * self.values[c] * rate
            })
            .collect())
    }

    /// Write the trajectory as `t,value,is_jump,left_value` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value", "is_jump", "left_value"])?;
        let exact = self.horizon().log2().fract() == 0.0;
        let digits = self.level() as usize;
        for k in 0..self.len() {
            let t = self.grid.time(k);
            let t = if exact {
                format!("{t:.digits$}")
            } else {
                format!("{t}")
            };
            let (is_jump, left) = match self.mark_at(k) {
                Some(l) => ("1", l),
                None if k == 0 => ("0", self.values[0]),
                None => ("0", self.values[k - 1]),
            };
            w.write_record([
                t,
                format!("{}", self.values[k]),
                is_jump.to_string(),
                format!("{left}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Trajectory> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let expected = ["t", "value", "is_jump", "left_value"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse(format!(
                "expected header {expected:?}, got {headers:?}"
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut marks = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {k} column {i}: {e}")))
            };
            times.push(num(0)?);
            values.push(num(1)?);
            match rec[2].trim() {
                "1" | "true" => marks.push((k, num(3)?)),
                "0" | "false" => {}
                other => return Err(Error::Parse(format!("row {k}: is_jump `{other}`"))),
            }
        }
        make_trajectory(&times, &values, &marks)
    }
}

/// A real-valued continuous path on a dyadic grid (drivers, volatility curves, `Y` terms).
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridPath {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param("values", "one value per grid node"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("path value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Sum of squared increments along the level-`level` partition.
    pub fn quadratic_variation(&self, level: u32) -> Result<f64> {
        let stride = self.grid.stride(level)?;
        Ok(self
            .values
            .iter()
            .step_by(stride)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
            .sum())
    }

    /// Total variation on the grid.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Cumulative quadratic variation along one partition level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QvCurve {
    pub times: Vec<f64>,
    /// `[x]_t` = continuous + jump parts.
    pub cumulative: Vec<f64>,
    pub continuous: Vec<f64>,
    pub jump: Vec<f64>,
    /// Continuous-part squared increment per step divided by the step width.
    pub density: Vec<f64>,
}

impl QvCurve {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            cumulative: Vec::with_capacity(n),
            continuous: Vec::with_capacity(n),
            jump: Vec::with_capacity(n),
            density: vec![0.0; n],
        }
    }

    fn push(&mut self, t: f64, cont: f64, jump: f64) {
        self.times.push(t);
        self.continuous.push(cont);
        self.jump.push(jump);
        self.cumulative.push(cont + jump);
    }

    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn continuous_total(&self) -> f64 {
        self.continuous[self.continuous.len() - 1]
    }

    pub fn jump_total(&self) -> f64 {
        self.jump[self.jump.len() - 1]
    }
}

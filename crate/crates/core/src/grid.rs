//! Dyadic grids and the refining partition family they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default finest level: 65,537 nodes on `[0, 1]`.
pub const DEFAULT_MAX_LEVEL: u32 = 16;

/// Highest level accepted anywhere; keeps `2^level` comfortably inside exact f64 arithmetic.
pub const MAX_SUPPORTED_LEVEL: u32 = 26;

/// The refining family of dyadic partitions `{k T / 2^l : k = 0..2^l}` for `l = 0..=max_level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSequence {
    pub horizon: f64,
    pub max_level: u32,
}

impl Default for PartitionSequence {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            max_level: DEFAULT_MAX_LEVEL,
        }
    }
}

impl PartitionSequence {
    pub fn new(horizon: f64, max_level: u32) -> Result<Self> {
        validate_horizon(horizon)?;
        if max_level > MAX_SUPPORTED_LEVEL {
            return Err(Error::param(
                "max_level",
                format!("must be at most {MAX_SUPPORTED_LEVEL}"),
            ));
        }
        Ok(Self { horizon, max_level })
    }

    pub fn grid(&self, level: u32) -> Result<Grid> {
        if level > self.max_level {
            return Err(Error::LevelTooFine {
                requested: level,
                available: self.max_level,
            });
        }
        Grid::new(self.horizon, level)
    }

    /// Partition points at `level`.
    pub fn partition(&self, level: u32) -> Result<Vec<f64>> {
        Ok(self.grid(level)?.times())
    }

    pub fn mesh(&self, level: u32) -> f64 {
        self.horizon / (1u64 << level) as f64
    }
}

fn validate_horizon(horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::param("horizon", "must be finite and > 0"));
    }
    Ok(())
}

/// A single dyadic grid `{k T / 2^level}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub horizon: f64,
    pub level: u32,
}

impl Grid {
    pub fn new(horizon: f64, level: u32) -> Result<Self> {
        validate_horizon(horizon)?;
        if level > MAX_SUPPORTED_LEVEL {
            return Err(Error::param(
                "level",
                format!("must be at most {MAX_SUPPORTED_LEVEL}"),
            ));
        }
        Ok(Self { horizon, level })
    }

    /// Number of steps, `2^level`.
    #[inline]
    pub fn steps(&self) -> usize {
        1usize << self.level
    }

    /// Number of nodes, `2^level + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn mesh(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.horizon * (k as f64 / self.steps() as f64)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Index of `t`, which must coincide with a node up to rounding.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if !t.is_finite() {
            return Err(Error::OffGrid { t });
        }
        let pos = t / self.mesh();
        let k = pos.round();
        if k < 0.0 || k > self.steps() as f64 || (pos - k).abs() > 1e-7 {
            return Err(Error::OffGrid { t });
        }
        Ok(k as usize)
    }

    /// First node `>= t` (clamped to the horizon).
    pub fn ceil_index(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let pos = t / self.mesh();
        let k = pos.round();
        let k = if (pos - k).abs() <= 1e-9 { k } else { pos.ceil() };
        (k as usize).min(self.steps())
    }

    /// Nearest node to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = (t / self.mesh()).round().max(0.0) as usize;
        k.min(self.steps())
    }

    /// Stride between level-`level` nodes on this grid.
    pub fn stride(&self, level: u32) -> Result<usize> {
        if level > self.level {
            return Err(Error::LevelTooFine {
                requested: level,
                available: self.level,
            });
        }
        Ok(1usize << (self.level - level))
    }

    /// Recognize a list of times as a dyadic grid.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::NonDyadicGrid("need at least two nodes".into()));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NonMonotoneGrid { index: i + 1 });
            }
        }
        if times[0] != 0.0 {
            return Err(Error::NonDyadicGrid("first node must be 0".into()));
        }
        let steps = times.len() - 1;
        if !steps.is_power_of_two() {
            return Err(Error::NonDyadicGrid(format!(
                "{steps} steps is not a power of two"
            )));
        }
        let level = steps.trailing_zeros();
        let grid = Grid::new(times[steps], level)?;
        let tol = 1e-9 * grid.mesh();
        for (k, &t) in times.iter().enumerate() {
            if (t - grid.time(k)).abs() > tol {
                return Err(Error::NonDyadicGrid(format!(
                    "node {k} at {t} is not k*T/2^{level}"
                )));
            }
        }
        Ok(grid)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.level == other.level && self.horizon == other.horizon
    }
}

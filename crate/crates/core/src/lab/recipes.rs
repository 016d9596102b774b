//! Constructive neighbourhood samplers.
//!
//! Term `n` of a recipe perturbs the centre by a magnitude `r_n = c·ε·2^{-(n+1)}`
//! in price units: the driver by a ramp `η·min(1, t/onset)`, jump factors by a
//! relative step, and jump times by `max(1, ⌊c·min(ε, T/16)·2^{-(n+1)} / Δ⌋)`
//! nodes. The amplitude `c ≤ 1` is halved until term 0 lies within `ε/2`.
//! Every emission is checked against all active constraints and the metric ball.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::models::{
    factorize_member, member_from_indices, poisson_from_indices, FactorSet, JumpDiffusionClassParams, PoissonExpParams,
};
use crate::portfolio::NeighborhoodSequence;
use crate::trajectory::{GridPath, Trajectory};

/// Neighbourhood constraints. Numbering follows the class: on `J^{σ,C}` the
/// tags `u1..u8` map to [`Ball`](Constraint::Ball) through
/// [`ShiftWithFactor`](Constraint::ShiftWithFactor); on `J^Σ`, `u2`/`u3` are
/// [`PathAbove`](Constraint::PathAbove)/[`PathBelow`](Constraint::PathBelow).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `0 < d(y, x*) < ε`.
    Ball,
    /// `s_i^y < s_i^*`.
    EarlierJumps,
    /// `s_i^y > s_i^*`; not one of the U-sets, used for negative examples.
    LaterJumps,
    /// `z^*(t) − z^y(t) < 0` for `t ≥ onset`.
    DriverAbove,
    /// `z^*(t) − z^y(t) > 0` for `t ≥ onset`.
    DriverBelow,
    /// `a_i^* − a_i^y < 0`.
    FactorsAbove,
    /// `a_i^* − a_i^y > 0`.
    FactorsBelow,
    /// `(s_i^y − s_i^*) a_i^* < 0`.
    ShiftAgainstFactor,
    /// `(s_i^y − s_i^*) a_i^* > 0`.
    ShiftWithFactor,
    /// `y(t) > x*(t)` for `t ≥ onset`.
    PathAbove,
    /// `y(t) < x*(t)` for `t ≥ onset`.
    PathBelow,
}

impl Constraint {
    fn tag(self) -> &'static str {
        match self {
            Constraint::Ball => "ball",
            Constraint::EarlierJumps => "earlier_jumps",
            Constraint::LaterJumps => "later_jumps",
            Constraint::DriverAbove => "driver_above",
            Constraint::DriverBelow => "driver_below",
            Constraint::FactorsAbove => "factors_above",
            Constraint::FactorsBelow => "factors_below",
            Constraint::ShiftAgainstFactor => "shift_against_factor",
            Constraint::ShiftWithFactor => "shift_with_factor",
            Constraint::PathAbove => "path_above",
            Constraint::PathBelow => "path_below",
        }
    }

    fn time_direction(self) -> Option<Shift> {
        match self {
            Constraint::EarlierJumps => Some(Shift::Earlier),
            Constraint::LaterJumps => Some(Shift::Later),
            Constraint::ShiftAgainstFactor => Some(Shift::AgainstFactor),
            Constraint::ShiftWithFactor => Some(Shift::WithFactor),
            _ => None,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Constraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use Constraint::*;
        [
            Ball,
            EarlierJumps,
            LaterJumps,
            DriverAbove,
            DriverBelow,
            FactorsAbove,
            FactorsBelow,
            ShiftAgainstFactor,
            ShiftWithFactor,
            PathAbove,
            PathBelow,
        ]
        .into_iter()
        .find(|c| c.tag() == s)
        .ok_or_else(|| Error::Parse(format!("unknown constraint `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shift {
    Earlier,
    Later,
    AgainstFactor,
    WithFactor,
}

/// The class a recipe's centre and emissions belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RecipeClass {
    /// `J^{a,μ}`: `x_0 e^{μt}(1+a)^{n(t)}`.
    PoissonExp { params: PoissonExpParams },
    /// `J^{σ,C}`.
    JumpDiffusion { params: JumpDiffusionClassParams },
    /// `J^Σ`: continuous paths with a volatility curve.
    StochasticVolatility,
}

impl RecipeClass {
    /// Parse `u1+u3+u4+u5`-style U-set tags for this class, or plain constraint names.
    pub fn parse_constraints(&self, s: &str) -> Result<Vec<Constraint>> {
        s.split(['+', ','])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                let sv = matches!(self, RecipeClass::StochasticVolatility);
                Ok(match t {
                    "u1" => Constraint::Ball,
                    "u2" if sv => Constraint::PathAbove,
                    "u3" if sv => Constraint::PathBelow,
                    "u2" => Constraint::EarlierJumps,
                    "u3" => Constraint::DriverAbove,
                    "u4" => Constraint::FactorsAbove,
                    "u5" => Constraint::ShiftAgainstFactor,
                    "u6" => Constraint::DriverBelow,
                    "u7" => Constraint::FactorsBelow,
                    "u8" => Constraint::ShiftWithFactor,
                    other => other.parse()?,
                })
            })
            .collect()
    }
}

/// A neighbourhood `U_{x*}` of a centre together with a generator of members converging to it.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodRecipe {
    pub center: Trajectory,
    pub class: RecipeClass,
    pub metric: MetricSpec,
    /// Ball radius `ε` in the metric.
    pub radius: f64,
    /// Time after which the one-sided driver/path constraints are enforced.
    pub onset: f64,
    pub constraints: Vec<Constraint>,
    /// Calibrated so that term 0 lies within half the radius.
    pub amplitude: f64,
}

struct Parts {
    z: Option<GridPath>,
    jumps: Vec<(usize, f64)>,
}

impl NeighborhoodRecipe {
    pub fn new(
        center: Trajectory,
        class: RecipeClass,
        metric: MetricSpec,
        radius: f64,
        onset: f64,
        mut constraints: Vec<Constraint>,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", "must be finite and > 0"));
        }
        if !(onset > 0.0 && onset <= center.horizon()) {
            return Err(Error::param("onset", "must lie in (0, T]"));
        }
        if !constraints.contains(&Constraint::Ball) {
            constraints.insert(0, Constraint::Ball);
        }
        let shifts = constraints.iter().filter(|c| c.time_direction().is_some()).count();
        let conflicting = |a, b| constraints.contains(&a) && constraints.contains(&b);
        if shifts > 1
            || conflicting(Constraint::DriverAbove, Constraint::DriverBelow)
            || conflicting(Constraint::FactorsAbove, Constraint::FactorsBelow)
            || conflicting(Constraint::PathAbove, Constraint::PathBelow)
        {
            return Err(Error::InfeasibleRecipe("constraints are mutually exclusive".into()));
        }
        let mut recipe = Self {
            center,
            class,
            metric,
            radius,
            onset,
            constraints,
            amplitude: 1.0,
        };
        recipe.check_class_fit()?;
        for _ in 0..60 {
            if let Ok((_, d)) = recipe.emit(0) {
                if d < 0.5 * radius {
                    return Ok(recipe);
                }
            }
            recipe.amplitude *= 0.5;
        }
        Err(Error::InfeasibleRecipe(format!("no perturbation fits in a ball of radius {radius}")))
    }

    fn has(&self, c: Constraint) -> bool {
        self.constraints.contains(&c)
    }

    fn check_class_fit(&self) -> Result<()> {
        let allowed: &[Constraint] = match &self.class {
            RecipeClass::PoissonExp { .. } => &[
                Constraint::Ball,
                Constraint::EarlierJumps,
                Constraint::LaterJumps,
                Constraint::ShiftAgainstFactor,
                Constraint::ShiftWithFactor,
            ],
            RecipeClass::JumpDiffusion { .. } => &[
                Constraint::Ball,
                Constraint::EarlierJumps,
                Constraint::LaterJumps,
                Constraint::DriverAbove,
                Constraint::DriverBelow,
                Constraint::FactorsAbove,
                Constraint::FactorsBelow,
                Constraint::ShiftAgainstFactor,
                Constraint::ShiftWithFactor,
            ],
            RecipeClass::StochasticVolatility => &[Constraint::Ball, Constraint::PathAbove, Constraint::PathBelow],
        };
        if let Some(c) = self.constraints.iter().find(|c| !allowed.contains(c)) {
            return Err(Error::InfeasibleRecipe(format!("constraint `{c}` does not apply to this class")));
        }
        if matches!(self.metric, MetricSpec::Qv { .. }) && !matches!(self.class, RecipeClass::StochasticVolatility) {
            return Err(Error::InfeasibleRecipe("d_QV needs a continuous class".into()));
        }
        let parts = self.parts(&self.center)?;
        let rebuilt = self.build(&parts)?;
        let scale = self.center.max_value();
        let gap = self
            .center
            .values()
            .iter()
            .zip(rebuilt.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > 1e-9 * scale {
            return Err(Error::InfeasibleRecipe("centre is not a member of the declared class".into()));
        }
        if let RecipeClass::JumpDiffusion { params } = &self.class {
            if let Some(&(_, a)) = parts.jumps.iter().find(|(_, a)| !params.factors.contains(*a)) {
                return Err(Error::InfeasibleRecipe(format!("centre jump factor {a} is not in C")));
            }
        }
        Ok(())
    }

    fn parts(&self, y: &Trajectory) -> Result<Parts> {
        let jumps = |y: &Trajectory| -> Vec<(usize, f64)> {
            y.marks().iter().map(|m| (m.index, y.value(m.index) / m.left - 1.0)).collect()
        };
        match &self.class {
            RecipeClass::PoissonExp { .. } => Ok(Parts { z: None, jumps: jumps(y) }),
            RecipeClass::JumpDiffusion { params } => {
                let (z, _) = factorize_member(params, y)?;
                Ok(Parts {
                    z: Some(z),
                    jumps: jumps(y),
                })
            }
            RecipeClass::StochasticVolatility => {
                if !y.is_continuous() {
                    return Err(Error::JumpsNotAllowed("J^Σ members are continuous"));
                }
                if y.volatility().is_none() {
                    return Err(Error::MissingVolatility("J^Σ members carry a volatility curve"));
                }
                Ok(Parts { z: None, jumps: vec![] })
            }
        }
    }

    fn build(&self, parts: &Parts) -> Result<Trajectory> {
        let grid = self.center.grid();
        match &self.class {
            RecipeClass::PoissonExp { params } => {
                let idx: Vec<usize> = parts.jumps.iter().map(|j| j.0).collect();
                poisson_from_indices(params, &idx, grid)
            }
            RecipeClass::JumpDiffusion { params } => member_from_indices(params, parts.z.as_ref().unwrap(), &parts.jumps),
            RecipeClass::StochasticVolatility => Ok(self.center.clone()),
        }
    }

    fn ramp(&self, t: f64) -> f64 {
        (t / self.onset).min(1.0)
    }

    /// Perturbation magnitude of term `n`, in price units.
    pub fn magnitude(&self, n: usize) -> f64 {
        self.amplitude * self.radius * 0.5f64.powi(n as i32 + 1)
    }

    /// Emit term `n` without checking it.
    pub fn construct(&self, n: usize) -> Result<Trajectory> {
        let r = self.magnitude(n);
        let x = &self.center;
        let m = x.max_value();
        let grid = x.grid();
        if let RecipeClass::StochasticVolatility = self.class {
            let sign = if self.has(Constraint::PathBelow) { -1.0 } else { 1.0 };
            let delta = sign * r / (2.0 * m);
            let values = (0..x.len()).map(|k| x.value(k) * (delta * self.ramp(x.time(k))).exp()).collect();
            return Trajectory::new(grid, values, vec![])?.with_volatility(x.volatility().unwrap().to_vec());
        }
        let mut parts = self.parts(x)?;
        let count = parts.jumps.len().max(1) as f64;
        if let (Some(z), RecipeClass::JumpDiffusion { params }) = (parts.z.as_mut(), &self.class) {
            let sign = if self.has(Constraint::DriverBelow) { -1.0 } else { 1.0 };
            let eta = sign * r / (2.0 * params.sigma * m * (1.0 + count));
            for k in 0..z.values.len() {
                z.values[k] += eta * self.ramp(grid.time(k));
            }
            let fsign = if self.has(Constraint::FactorsAbove) {
                1.0
            } else if self.has(Constraint::FactorsBelow) {
                -1.0
            } else {
                0.0
            };
            if fsign != 0.0 && matches!(params.factors, FactorSet::Finite { .. }) && !parts.jumps.is_empty() {
                return Err(Error::InfeasibleRecipe("a finite C has no nearby factors".into()));
            }
            if fsign != 0.0 {
                for j in parts.jumps.iter_mut() {
                    let a = j.1 + fsign * (1.0 + j.1) * r / (2.0 * m * (1.0 + count));
                    if !params.factors.contains(a) {
                        return Err(Error::InfeasibleRecipe(format!("perturbed factor {a} leaves C")));
                    }
                    j.1 = a;
                }
            }
        }
        let shift = self.constraints.iter().find_map(|c| c.time_direction()).or(match self.class {
            RecipeClass::PoissonExp { .. } => Some(Shift::Later),
            _ => None,
        });
        if let Some(dir) = shift {
            let tr = self.amplitude * self.radius.min(grid.horizon / 16.0) * 0.5f64.powi(n as i32 + 1);
            let nodes = ((tr / grid.mesh()).floor() as usize).max(1);
            for j in parts.jumps.iter_mut() {
                let earlier = match dir {
                    Shift::Earlier => true,
                    Shift::Later => false,
                    Shift::AgainstFactor => j.1 > 0.0,
                    Shift::WithFactor => j.1 < 0.0,
                };
                j.0 = if earlier {
                    j.0.checked_sub(nodes).filter(|&k| k >= 1)
                } else {
                    Some(j.0 + nodes).filter(|&k| k <= grid.steps())
                }
                .ok_or_else(|| Error::InfeasibleRecipe(format!("jump at node {} cannot move {nodes} nodes", j.0)))?;
            }
            if parts.jumps.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::InfeasibleRecipe("shifted jumps collide".into()));
            }
        }
        self.build(&parts)
    }

    /// Check every active constraint on `y`; returns `d(y, x*)`.
    pub fn verify(&self, y: &Trajectory) -> Result<f64> {
        let x = &self.center;
        let violation = |c: Constraint, what: String| Err(Error::RecipeViolation(format!("{c}: {what}")));
        let d = self.metric.distance(x, y)?;
        if !(d > 0.0 && d < self.radius) {
            return violation(Constraint::Ball, format!("distance {d} not in (0, {})", self.radius));
        }
        let (px, py) = (self.parts(x)?, self.parts(y)?);
        let late = |k: usize| x.time(k) >= self.onset;
        for &c in &self.constraints {
            let jumps_ok = |f: &dyn Fn((usize, f64), (usize, f64)) -> bool| {
                px.jumps.len() == py.jumps.len() && px.jumps.iter().zip(&py.jumps).all(|(&s, &y)| f(s, y))
            };
            let drivers_ok = |f: &dyn Fn(f64, f64) -> bool| {
                let (zx, zy) = (px.z.as_ref().unwrap(), py.z.as_ref().unwrap());
                (0..x.len()).filter(|&k| late(k)).all(|k| f(zx.values[k], zy.values[k]))
            };
            let ok = match c {
                Constraint::Ball => true,
                Constraint::EarlierJumps => jumps_ok(&|s, y| y.0 < s.0),
                Constraint::LaterJumps => jumps_ok(&|s, y| y.0 > s.0),
                Constraint::ShiftAgainstFactor => jumps_ok(&|s, y| (y.0 as f64 - s.0 as f64) * s.1 < 0.0),
                Constraint::ShiftWithFactor => jumps_ok(&|s, y| (y.0 as f64 - s.0 as f64) * s.1 > 0.0),
                Constraint::FactorsAbove => jumps_ok(&|s, y| s.1 - y.1 < 0.0),
                Constraint::FactorsBelow => jumps_ok(&|s, y| s.1 - y.1 > 0.0),
                Constraint::DriverAbove => drivers_ok(&|a, b| a - b < 0.0),
                Constraint::DriverBelow => drivers_ok(&|a, b| a - b > 0.0),
                Constraint::PathAbove => (0..x.len()).filter(|&k| late(k)).all(|k| y.value(k) > x.value(k)),
                Constraint::PathBelow => (0..x.len()).filter(|&k| late(k)).all(|k| y.value(k) < x.value(k)),
            };
            if !ok {
                return violation(c, "not satisfied".into());
            }
        }
        if let RecipeClass::JumpDiffusion { params } = &self.class {
            if let Some(&(_, a)) = py.jumps.iter().find(|(_, a)| !params.factors.contains(*a)) {
                return Err(Error::RecipeViolation(format!("jump factor {a} is not in C")));
            }
        }
        Ok(d)
    }

    /// Term `n`, checked; errors if it leaves the neighbourhood.
    pub fn emit(&self, n: usize) -> Result<(Trajectory, f64)> {
        let y = self.construct(n)?;
        let d = self.verify(&y)?;
        Ok((y, d))
    }
}

impl NeighborhoodSequence for NeighborhoodRecipe {
    fn metric_name(&self) -> String {
        self.metric.name().to_string()
    }

    fn term(&self, n: usize) -> Result<Trajectory> {
        Ok(self.emit(n)?.0)
    }

    fn distance(&self, y: &Trajectory) -> Result<f64> {
        self.metric.distance(&self.center, y)
    }
}

//! Portfolio valuation: simple portfolios over stopping sequences and
//! continuously rebalanced portfolios between stopping times.
//!
//! With zero interest the bank account follows
//! `ψ(t) = V(t⁻) − x(t⁻) φ(t)`, and `V = ψ + φ x` at every node.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::integration::{decomposition_on, partition_nodes, simple_sum, QuadraticField, SimpleIntegrand, SmoothField};
use crate::models::{derive_seed, ClassSampler};
use crate::stopping::{nums, parse_all, Node, StoppingSequence};
use crate::trajectory::Trajectory;

/// A continuous map `φ̂: ℝ₊ → ℝ` applied to the stopped value `x(τ_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    /// `intercept + slope·y`.
    Affine { intercept: f64, slope: f64 },
    /// `c / y`.
    Reciprocal { c: f64 },
}

impl ScalarFn {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            ScalarFn::Affine { intercept, slope } => intercept + slope * y,
            ScalarFn::Reciprocal { c } => c / y,
        }
    }
}

/// Holdings `φ_k(x)` of a simple portfolio on `(τ_k, τ_{k+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Holding {
    Const { c: f64 },
    /// `φ̂(x(τ_k))`.
    OfStopValue { f: ScalarFn },
    Min { of: Vec<Holding> },
    Max { of: Vec<Holding> },
}

impl Holding {
    pub fn constant(c: f64) -> Self {
        Holding::Const { c }
    }

    /// Holdings given the stopped value `x(τ_k)`.
    pub fn eval(&self, stop_value: f64) -> f64 {
        match self {
            Holding::Const { c } => *c,
            Holding::OfStopValue { f } => f.eval(stop_value),
            Holding::Min { of } => of.iter().map(|h| h.eval(stop_value)).fold(f64::INFINITY, f64::min),
            Holding::Max { of } => of.iter().map(|h| h.eval(stop_value)).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl fmt::Display for Holding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, of: &[Holding]| {
            let s: Vec<String> = of.iter().map(|h| h.to_string()).collect();
            write!(f, "{name}({})", s.join(","))
        };
        match self {
            Holding::Const { c } => write!(f, "const({c})"),
            Holding::OfStopValue {
                f: ScalarFn::Affine { intercept, slope },
            } => write!(f, "affine({intercept},{slope})"),
            Holding::OfStopValue {
                f: ScalarFn::Reciprocal { c },
            } => write!(f, "recip({c})"),
            Holding::Min { of } => list(f, "min", of),
            Holding::Max { of } => list(f, "max", of),
        }
    }
}

fn holding_from(node: &Node) -> Result<Holding> {
    let Node::Call(name, args) = node else {
        if let Node::Num(c) = node {
            return Ok(Holding::Const { c: *c });
        }
        unreachable!()
    };
    let n = |k: usize| -> Result<Vec<f64>> {
        let v = nums(name, args)?;
        if v.len() != k {
            return Err(Error::Parse(format!("`{name}` takes {k} number(s)")));
        }
        Ok(v)
    };
    let list = || -> Result<Vec<Holding>> {
        if args.is_empty() {
            return Err(Error::Parse(format!("`{name}` needs operands")));
        }
        args.iter().map(holding_from).collect()
    };
    Ok(match name.as_str() {
        "const" => Holding::Const { c: n(1)?[0] },
        "affine" => {
            let v = n(2)?;
            Holding::OfStopValue {
                f: ScalarFn::Affine {
                    intercept: v[0],
                    slope: v[1],
                },
            }
        }
        "recip" => Holding::OfStopValue {
            f: ScalarFn::Reciprocal { c: n(1)?[0] },
        },
        "min" => Holding::Min { of: list()? },
        "max" => Holding::Max { of: list()? },
        other => return Err(Error::Parse(format!("unknown holding `{other}`"))),
    })
}

impl FromStr for Holding {
    type Err = Error;
    /// `const(c)`, `affine(a,b)` (= a + b·x(τ_k)), `recip(c)`, `min(..)`, `max(..)` or a bare number.
    fn from_str(s: &str) -> Result<Self> {
        holding_from(&parse_all(s)?)
    }
}

/// Parse `field(a,b,c)`: `U = a + b·y + c·y²/2`, holdings `φ = b + c·y`.
pub fn parse_field(s: &str) -> Result<QuadraticField> {
    match parse_all(s)? {
        Node::Call(name, args) if name == "field" => match nums(&name, &args)?.as_slice() {
            [a, b, c] => Ok(QuadraticField { a: *a, b: *b, c: *c }),
            _ => Err(Error::Parse("`field` takes three numbers".into())),
        },
        _ => Err(Error::Parse(format!("expected field(a,b,c), got `{s}`"))),
    }
}

/// Holdings `φ_k` on `(τ_k, τ_{k+1}]`; the last entry repeats for later intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplePortfolio {
    pub sequence: StoppingSequence,
    pub holdings: Vec<Holding>,
    pub v0: f64,
}

impl SimplePortfolio {
    pub fn new(sequence: StoppingSequence, holdings: Vec<Holding>, v0: f64) -> Result<Self> {
        if holdings.is_empty() {
            return Err(Error::param("holdings", "need at least one holding"));
        }
        if !v0.is_finite() {
            return Err(Error::param("v0", "must be finite"));
        }
        Ok(Self { sequence, holdings, v0 })
    }

    /// Hold one share until `t = c`, then cash.
    pub fn hold_until(c: f64, v0: f64) -> Result<Self> {
        Self::new(
            StoppingSequence::Custom {
                times: vec![crate::stopping::StoppingTime::Constant { c }],
            },
            vec![Holding::constant(1.0), Holding::constant(0.0)],
            v0,
        )
    }

    pub fn holding(&self, k: usize) -> &Holding {
        &self.holdings[k.min(self.holdings.len() - 1)]
    }

    /// Stopping indices and the coefficients `c_k = φ_k(x)`.
    pub fn schedule(&self, x: &Trajectory) -> Result<(Vec<usize>, Vec<f64>)> {
        let idx = self.sequence.indices(x);
        let coef = idx[..idx.len() - 1]
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let c = self.holding(k).eval(x.value(i));
                if c.is_finite() {
                    Ok(c)
                } else {
                    Err(Error::NonFinite(format!("holding φ_{k} at t = {}", x.time(i))))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((idx, coef))
    }

    /// The piecewise-constant integrand this portfolio induces on `x`.
    pub fn induced_integrand(&self, x: &Trajectory) -> Result<SimpleIntegrand> {
        let (idx, coef) = self.schedule(x)?;
        SimpleIntegrand::new(idx.iter().map(|&k| x.time(k)).collect(), coef)
    }
}

/// Rebalanced holdings `φ_i(t, x(t⁻)) = ∂U_i/∂y` on `(τ_i, τ_{i+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RebalancedPortfolio<F = QuadraticField> {
    pub sequence: StoppingSequence,
    /// One field per interval; the last repeats.
    pub fields: Vec<F>,
    pub v0: f64,
}

impl<F: SmoothField> RebalancedPortfolio<F> {
    pub fn new(sequence: StoppingSequence, fields: Vec<F>, v0: f64) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::param("fields", "need at least one field"));
        }
        Ok(Self { sequence, fields, v0 })
    }

    pub fn field(&self, i: usize) -> &F {
        &self.fields[i.min(self.fields.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Portfolio {
    Simple(SimplePortfolio),
    Rebalanced(RebalancedPortfolio),
}

impl Portfolio {
    pub fn v0(&self) -> f64 {
        match self {
            Portfolio::Simple(p) => p.v0,
            Portfolio::Rebalanced(p) => p.v0,
        }
    }

    pub fn sequence(&self) -> &StoppingSequence {
        match self {
            Portfolio::Simple(p) => &p.sequence,
            Portfolio::Rebalanced(p) => &p.sequence,
        }
    }

    /// Value path; `level` is used by rebalanced portfolios only.
    pub fn value(&self, x: &Trajectory, level: u32) -> Result<ValuePath> {
        match self {
            Portfolio::Simple(p) => value_simple(p, x),
            Portfolio::Rebalanced(p) => value_rebalanced(p, x, level),
        }
    }

    /// `V(T, x)`.
    pub fn terminal_value(&self, x: &Trajectory, level: u32) -> Result<f64> {
        match self {
            Portfolio::Simple(p) => {
                let (idx, coef) = p.schedule(x)?;
                Ok(p.v0 + simple_sum(&idx, &coef, x.values(), x.steps()))
            }
            Portfolio::Rebalanced(p) => Ok(*value_rebalanced(p, x, level)?.value.last().unwrap()),
        }
    }
}

/// `V`, `φ` and `ψ` at every grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuePath {
    pub times: Vec<f64>,
    pub value: Vec<f64>,
    pub holdings: Vec<f64>,
    pub bank: Vec<f64>,
}

impl ValuePath {
    fn from_value_and_holdings(x: &Trajectory, value: Vec<f64>, holdings: Vec<f64>) -> Self {
        let bank = (0..x.len())
            .map(|k| {
                if k == 0 {
                    value[0] - holdings[0] * x.x0()
                } else {
                    let left = x.left_value(k);
                    let v_left = value[k] - holdings[k] * (x.value(k) - left);
                    v_left - left * holdings[k]
                }
            })
            .collect();
        Self {
            times: x.grid().times(),
            value,
            holdings,
            bank,
        }
    }

    pub fn terminal(&self) -> f64 {
        *self.value.last().unwrap()
    }

    pub fn min_value(&self) -> (usize, f64) {
        self.value
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc })
    }

    /// `max_k |V − (ψ + φ x)| / max(|V|, |φ x|, 1)`.
    pub fn accounting_residual(&self, x: &Trajectory) -> f64 {
        (0..self.value.len())
            .map(|k| {
                let px = self.holdings[k] * x.value(k);
                let gap = self.value[k] - (self.bank[k] + px);
                gap.abs() / self.value[k].abs().max(px.abs()).max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value", "phi", "psi"])?;
        for k in 0..self.times.len() {
            w.write_record([
                self.times[k].to_string(),
                self.value[k].to_string(),
                self.holdings[k].to_string(),
                self.bank[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `V(t) = V_0 + Σ_{k<j} φ_k [x(τ_{k+1}) − x(τ_k)] + φ_j [x(t) − x(τ_j)]` at every node.
pub fn value_simple(p: &SimplePortfolio, x: &Trajectory) -> Result<ValuePath> {
    let (idx, coef) = p.schedule(x)?;
    let v = x.values();
    // partial sums in the same order as `simple_sum`
    let mut done = Vec::with_capacity(coef.len());
    let mut acc = 0.0;
    done.push(acc);
    for i in 0..coef.len() {
        acc += coef[i] * (v[idx[i + 1]] - v[idx[i]]);
        done.push(acc);
    }
    let mut value = Vec::with_capacity(x.len());
    let mut holdings = Vec::with_capacity(x.len());
    let mut k = 0;
    for t in 0..x.len() {
        while idx[k] < t {
            k += 1;
        }
        if k == 0 {
            value.push(p.v0);
            holdings.push(coef[0]);
        } else {
            value.push(p.v0 + (done[k - 1] + coef[k - 1] * (v[t] - v[idx[k - 1]])));
            holdings.push(coef[k - 1]);
        }
    }
    Ok(ValuePath::from_value_and_holdings(x, value, holdings))
}

/// `V(t) = V_0 + ∫_0^t φ dx` by left-point sums on level-`level` nodes plus the stopping nodes.
pub fn value_rebalanced<F: SmoothField>(p: &RebalancedPortfolio<F>, x: &Trajectory, level: u32) -> Result<ValuePath> {
    let stops = p.sequence.indices(x);
    let v = x.values();
    let mut value = vec![p.v0; x.len()];
    let mut holdings = vec![0.0; x.len()];
    let mut current = p.v0;
    let mut first = true;
    for (i, w) in stops.windows(2).enumerate() {
        if w[0] == w[1] {
            continue;
        }
        let field = p.field(i);
        for seg in partition_nodes(x, w[0], w[1], level)?.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let t = x.time(a);
            let h = field.u_y(t, v[a]);
            if !h.is_finite() {
                return Err(Error::NonFinite(format!("holding at t = {t}")));
            }
            if first {
                holdings[0] = h;
                first = false;
            }
            for k in a + 1..=b {
                value[k] = current + h * (v[k] - v[a]);
                holdings[k] = h;
            }
            current = value[b];
        }
    }
    Ok(ValuePath::from_value_and_holdings(x, value, holdings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfFinancingReport {
    /// `max_t |V(t) − V_0 − ∫_0^t φ dx|`, relative.
    pub residual: f64,
    /// Relative gap between the Riemann-sum value and the decomposition (rebalanced only).
    pub decomposition_gap: Option<f64>,
    pub accounting_residual: f64,
}

/// Self-financing residuals; see [`SelfFinancingReport`].
pub fn check_self_financing(p: &Portfolio, x: &Trajectory, level: u32) -> Result<SelfFinancingReport> {
    match p {
        Portfolio::Simple(sp) => {
            let path = value_simple(sp, x)?;
            let (idx, coef) = sp.schedule(x)?;
            let scale = sp.v0.abs() + coef.iter().map(|c| c.abs()).sum::<f64>() * x.max_value();
            let residual = (0..x.len())
                .map(|k| (path.value[k] - sp.v0 - simple_sum(&idx, &coef, x.values(), k)).abs())
                .fold(0.0, f64::max)
                / scale.max(f64::MIN_POSITIVE);
            Ok(SelfFinancingReport {
                residual,
                decomposition_gap: None,
                accounting_residual: path.accounting_residual(x),
            })
        }
        Portfolio::Rebalanced(rp) => {
            let path = value_rebalanced(rp, x, level)?;
            let (gap, _) = decomposition_gap(rp, x, level, &path)?;
            Ok(SelfFinancingReport {
                residual: 0.0,
                decomposition_gap: Some(gap),
                accounting_residual: path.accounting_residual(x),
            })
        }
    }
}

/// `|(V(T) − V_0) − Σ_i u_i| / Σ_i scale_i` and `Σ_i u_i`.
pub fn decomposition_gap<F: SmoothField>(
    p: &RebalancedPortfolio<F>,
    x: &Trajectory,
    level: u32,
    path: &ValuePath,
) -> Result<(f64, f64)> {
    let stops = p.sequence.indices(x);
    let (mut u, mut scale) = (0.0, 0.0);
    for (i, w) in stops.windows(2).enumerate() {
        if w[0] == w[1] {
            continue;
        }
        let r = decomposition_on(p.field(i), x, w[0], w[1], level)?;
        u += r.u;
        scale += r.scale();
    }
    let gap = (path.terminal() - p.v0 - u).abs();
    Ok((if scale > 0.0 { gap / scale } else { gap }, u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AdmissibilityVerdict {
    Pass { paths: usize, min_value: f64 },
    Violation { path_index: u64, seed: u64, time: f64, value: f64 },
}

/// Scan `V(t, x) ≥ −A` over `n_paths` sampled trajectories; reports the first violating path.
pub fn check_admissible(
    p: &Portfolio,
    sampler: &ClassSampler,
    grid: Grid,
    n_paths: usize,
    bound: f64,
    root_seed: u64,
) -> Result<AdmissibilityVerdict> {
    if !(bound >= 0.0) {
        return Err(Error::param("A", "must be >= 0"));
    }
    let scans: Vec<(u64, u64, usize, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(root_seed, i);
            let x = sampler.sample(grid, seed)?;
            let (k, v) = p.value(&x, grid.level)?.min_value();
            Ok((i, seed, k, v))
        })
        .collect::<Result<_>>()?;
    if let Some(&(i, seed, k, v)) = scans.iter().find(|s| s.3 < -bound) {
        return Ok(AdmissibilityVerdict::Violation {
            path_index: i,
            seed,
            time: grid.time(k),
            value: v,
        });
    }
    Ok(AdmissibilityVerdict::Pass {
        paths: n_paths,
        min_value: scans.iter().map(|s| s.3).fold(f64::INFINITY, f64::min),
    })
}

/// A sequence `x_n → x*` drawn from a declared neighbourhood.
pub trait NeighborhoodSequence {
    fn metric_name(&self) -> String;
    /// The `n`-th term; errors if it falls outside the neighbourhood.
    fn term(&self, n: usize) -> Result<Trajectory>;
    /// Distance to the centre in the neighbourhood's metric.
    fn distance(&self, y: &Trajectory) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub term: usize,
    pub distance: f64,
    pub value_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub metric: String,
    pub rows: Vec<ProbeRow>,
    /// Required ratio `final gap / initial gap`.
    pub modulus: f64,
    pub pass: bool,
}

/// Default contraction required by [`v_continuity_probe`].
pub const DEFAULT_PROBE_MODULUS: f64 = 1e-2;

/// Track `|V(T, x_n) − V(T, x*)|` along `n` terms of `seq`.
pub fn v_continuity_probe(
    p: &Portfolio,
    x_star: &Trajectory,
    seq: &dyn NeighborhoodSequence,
    n: usize,
    level: u32,
    modulus: f64,
) -> Result<ProbeReport> {
    let target = p.terminal_value(x_star, level)?;
    let rows = (0..n)
        .map(|term| {
            let y = seq.term(term)?;
            Ok(ProbeRow {
                term,
                distance: seq.distance(&y)?,
                value_gap: (p.terminal_value(&y, level)? - target).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.value_gap <= modulus * a.value_gap,
        _ => false,
    };
    Ok(ProbeReport {
        metric: seq.metric_name(),
        rows,
        modulus,
        pass,
    })
}

//! Trajectory stopping times, finite stopping sequences and the
//! agreement-based stopping property check.
//!
//! Every evaluator returns a grid index: the first node where the defining
//! predicate holds, or `N` (the horizon) when it never does.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// A closed interval `[lo, hi]`; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ClosedInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingTime {
    Constant { c: f64 },
    Hitting { set: Vec<ClosedInterval> },
    Level { a: f64 },
    JumpMagnitude { delta: f64 },
    JumpCount { i: usize },
    Sum { a: Box<StoppingTime>, b: Box<StoppingTime> },
    Min { of: Vec<StoppingTime> },
    Sup { of: Vec<StoppingTime> },
}

pub fn constant_time(c: f64, horizon: f64) -> Result<StoppingTime> {
    if !(0.0..=horizon).contains(&c) {
        return Err(Error::param("c", format!("must lie in [0, {horizon}]")));
    }
    Ok(StoppingTime::Constant { c })
}

pub fn hitting_time_closed(set: Vec<ClosedInterval>) -> Result<StoppingTime> {
    if set.is_empty() {
        return Err(Error::param("set", "must contain at least one interval"));
    }
    if set.iter().any(|i| i.lo.is_nan() || i.hi.is_nan() || i.lo > i.hi) {
        return Err(Error::param("set", "each interval needs lo <= hi"));
    }
    Ok(StoppingTime::Hitting { set })
}

pub fn level_crossing(a: f64) -> Result<StoppingTime> {
    if !a.is_finite() {
        return Err(Error::param("a", "must be finite"));
    }
    Ok(StoppingTime::Level { a })
}

pub fn jump_magnitude_time(delta: f64) -> Result<StoppingTime> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", "must be > 0"));
    }
    Ok(StoppingTime::JumpMagnitude { delta })
}

pub fn jump_count_time(i: usize) -> Result<StoppingTime> {
    if i < 1 {
        return Err(Error::param("i", "must be >= 1"));
    }
    Ok(StoppingTime::JumpCount { i })
}

/// `(a + b) ∧ T`.
pub fn sum_capped(a: StoppingTime, b: StoppingTime) -> StoppingTime {
    StoppingTime::Sum {
        a: Box::new(a),
        b: Box::new(b),
    }
}

pub fn min_of(of: Vec<StoppingTime>) -> Result<StoppingTime> {
    if of.is_empty() {
        return Err(Error::param("min", "needs at least one operand"));
    }
    Ok(StoppingTime::Min { of })
}

/// Pointwise supremum over a finite family.
pub fn sup_of(of: Vec<StoppingTime>) -> Result<StoppingTime> {
    if of.is_empty() {
        return Err(Error::param("sup", "needs at least one operand"));
    }
    Ok(StoppingTime::Sup { of })
}

impl StoppingTime {
    /// Grid index of `τ(x)`.
    pub fn index(&self, x: &Trajectory) -> usize {
        let n = x.steps();
        match self {
            StoppingTime::Constant { c } => x.grid().ceil_index(*c),
            StoppingTime::Hitting { set } => x
                .values()
                .iter()
                .position(|&v| set.iter().any(|i| i.contains(v)))
                .unwrap_or(n),
            StoppingTime::Level { a } => x.values().iter().position(|&v| v >= *a).unwrap_or(n),
            StoppingTime::JumpMagnitude { delta } => x
                .marks()
                .iter()
                .find(|m| (x.value(m.index) - m.left).abs() > *delta)
                .map_or(n, |m| m.index),
            StoppingTime::JumpCount { i } => x.marks().get(i - 1).map_or(n, |m| m.index),
            StoppingTime::Sum { a, b } => (a.index(x) + b.index(x)).min(n),
            StoppingTime::Min { of } => of.iter().map(|s| s.index(x)).min().unwrap_or(n),
            StoppingTime::Sup { of } => of.iter().map(|s| s.index(x)).max().unwrap_or(n),
        }
    }

    /// `τ(x)` as a time.
    pub fn eval(&self, x: &Trajectory) -> f64 {
        x.time(self.index(x))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            StoppingTime::Constant { .. } => "constant",
            StoppingTime::Hitting { .. } => "hitting",
            StoppingTime::Level { .. } => "level",
            StoppingTime::JumpMagnitude { .. } => "jump-magnitude",
            StoppingTime::JumpCount { .. } => "jump-count",
            StoppingTime::Sum { .. } => "sum",
            StoppingTime::Min { .. } => "min",
            StoppingTime::Sup { .. } => "sup",
        }
    }
}

/// Outcome of [`check_np_property`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NpVerdict {
    Pass,
    Fail,
    /// The two paths differ before `τ(x)`.
    NotApplicable,
}

/// If `x` and `y` agree on `[0, τ(x)]`, require `τ(y) = τ(x)`.
pub fn check_np_property(tau: &StoppingTime, x: &Trajectory, y: &Trajectory) -> Result<NpVerdict> {
    if !x.grid().same_as(&y.grid()) {
        return Err(Error::GridMismatch);
    }
    let k = tau.index(x);
    if !x.agrees_through(y, k) {
        return Ok(NpVerdict::NotApplicable);
    }
    Ok(if tau.index(y) == k {
        NpVerdict::Pass
    } else {
        NpVerdict::Fail
    })
}

/// A finite nondecreasing family `0 = τ_0 ≤ τ_1 ≤ … ` with `τ_{M(x)}(x) = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingSequence {
    /// `τ_i = min(iT/n, T)`.
    Grid { n: usize },
    /// `τ_i = inf{t : x(t) ≥ K_i} ∧ T`.
    Ladder { levels: Vec<f64> },
    /// `τ_i` = time of the `i`-th jump, `T` once jumps run out.
    Jumps,
    /// An explicit list; evaluated as running maxima so the family is nondecreasing.
    Custom { times: Vec<StoppingTime> },
}

pub fn level_ladder(levels: Vec<f64>, x0: f64) -> Result<StoppingSequence> {
    if levels.is_empty() {
        return Err(Error::param("levels", "must not be empty"));
    }
    if levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("levels", "must be strictly increasing"));
    }
    if !(levels[0] > x0) {
        return Err(Error::param("levels", "K_1 must exceed x_0"));
    }
    Ok(StoppingSequence::Ladder { levels })
}

pub fn grid_sequence(n: usize) -> Result<StoppingSequence> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    Ok(StoppingSequence::Grid { n })
}

impl StoppingSequence {
    /// Grid indices `τ_0(x) = 0, …, τ_{M(x)}(x) = N`.
    pub fn indices(&self, x: &Trajectory) -> Vec<usize> {
        let n = x.steps();
        let mut out = vec![0];
        let mut push = |k: usize| {
            let last = *out.last().unwrap();
            if last < n {
                out.push(k.max(last).min(n));
            }
        };
        match self {
            StoppingSequence::Grid { n: parts } => {
                let g = x.grid();
                for i in 1..=*parts {
                    push(g.ceil_index(g.horizon * i as f64 / *parts as f64));
                }
            }
            StoppingSequence::Ladder { levels } => {
                let v = x.values();
                let mut start = 0;
                for &a in levels {
                    let k = v[start..].iter().position(|&u| u >= a).map_or(n, |p| p + start);
                    push(k);
                    start = k;
                }
            }
            StoppingSequence::Jumps => {
                for m in x.marks() {
                    push(m.index);
                }
            }
            StoppingSequence::Custom { times } => {
                for t in times {
                    push(t.index(x));
                }
            }
        }
        push(n);
        out
    }

    pub fn times(&self, x: &Trajectory) -> Vec<f64> {
        self.indices(x).into_iter().map(|k| x.time(k)).collect()
    }

    /// `M(x)`, the first index with `τ_M(x) = T`.
    pub fn count(&self, x: &Trajectory) -> usize {
        self.indices(x).len() - 1
    }

    /// The `i`-th member as a standalone stopping time, when it has one.
    pub fn member(&self, i: usize, horizon: f64) -> Option<StoppingTime> {
        if i == 0 {
            return Some(StoppingTime::Constant { c: 0.0 });
        }
        match self {
            StoppingSequence::Grid { n } => Some(StoppingTime::Constant {
                c: horizon * (i.min(*n) as f64 / *n as f64),
            }),
            StoppingSequence::Ladder { levels } => levels
                .get(i - 1)
                .map(|&a| StoppingTime::Level { a })
                .or(Some(StoppingTime::Constant { c: horizon })),
            StoppingSequence::Jumps => Some(StoppingTime::JumpCount { i }),
            StoppingSequence::Custom { times } => Some(if i <= times.len() {
                StoppingTime::Sup {
                    of: times[..i].to_vec(),
                }
            } else {
                StoppingTime::Constant { c: horizon }
            }),
        }
    }
}

impl fmt::Display for StoppingTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, name: &str, of: &[StoppingTime]) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, s) in of.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{s}")?;
            }
            write!(f, ")")
        }
        match self {
            StoppingTime::Constant { c } => write!(f, "const({c})"),
            StoppingTime::Hitting { set } => {
                write!(f, "hit(")?;
                for (i, s) in set.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{},{}", fmt_bound(s.lo), fmt_bound(s.hi))?;
                }
                write!(f, ")")
            }
            StoppingTime::Level { a } => write!(f, "level({a})"),
            StoppingTime::JumpMagnitude { delta } => write!(f, "jump({delta})"),
            StoppingTime::JumpCount { i } => write!(f, "jumpcount({i})"),
            StoppingTime::Sum { a, b } => write!(f, "sum({a},{b})"),
            StoppingTime::Min { of } => list(f, "min", of),
            StoppingTime::Sup { of } => list(f, "sup", of),
        }
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

impl fmt::Display for StoppingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoppingSequence::Grid { n } => write!(f, "grid({n})"),
            StoppingSequence::Ladder { levels } => {
                let s: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
                write!(f, "ladder({})", s.join(","))
            }
            StoppingSequence::Jumps => write!(f, "jumps"),
            StoppingSequence::Custom { times } => {
                let s: Vec<String> = times.iter().map(|t| t.to_string()).collect();
                write!(f, "seq({})", s.join(","))
            }
        }
    }
}

// Recursive-descent parser for the textual forms accepted in configs:
//   const(c) level(a) hit(lo,hi,...) jump(d) jumpcount(i)
//   sum(a,b) min(...) sup(...)
//   grid(n) ladder(K1,...) jumps seq(...)

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Num(f64),
    Call(String, Vec<Node>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at offset {} in `{}`", self.pos, self.src)))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn node(&mut self) -> Result<Node> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+' | '_')))
            .unwrap_or(rest.len());
        if len == 0 {
            return self.err("expected a term");
        }
        let word = &rest[..len];
        self.pos += len;
        if let Some(v) = parse_number(word) {
            return Ok(Node::Num(v));
        }
        if !word.chars().next().unwrap().is_ascii_alphabetic() {
            return self.err(&format!("bad token `{word}`"));
        }
        let mut args = Vec::new();
        if self.eat('(') {
            if !self.eat(')') {
                loop {
                    args.push(self.node()?);
                    if self.eat(')') {
                        break;
                    }
                    if !self.eat(',') {
                        return self.err("expected `,` or `)`");
                    }
                }
            }
        }
        Ok(Node::Call(word.to_ascii_lowercase(), args))
    }
}

fn parse_number(word: &str) -> Option<f64> {
    match word {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ if word.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '.' | '-' | '+')) => {
            word.parse().ok()
        }
        _ => None,
    }
}

pub(crate) fn parse_all(src: &str) -> Result<Node> {
    let mut p = Parser { src, pos: 0 };
    let node = p.node()?;
    p.skip_ws();
    if p.pos != src.len() {
        return p.err("trailing input");
    }
    Ok(node)
}

pub(crate) fn nums(name: &str, args: &[Node]) -> Result<Vec<f64>> {
    args.iter()
        .map(|a| match a {
            Node::Num(v) => Ok(*v),
            _ => Err(Error::Parse(format!("`{name}` takes numbers"))),
        })
        .collect()
}

fn one_num(name: &str, args: &[Node]) -> Result<f64> {
    match nums(name, args)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(Error::Parse(format!("`{name}` takes one number"))),
    }
}

fn count_arg(name: &str, args: &[Node]) -> Result<usize> {
    let v = one_num(name, args)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(Error::Parse(format!("`{name}` takes a non-negative integer")));
    }
    Ok(v as usize)
}

fn to_time(node: &Node) -> Result<StoppingTime> {
    let Node::Call(name, args) = node else {
        return Err(Error::Parse("expected a stopping time, found a number".into()));
    };
    let times = |args: &[Node]| args.iter().map(to_time).collect::<Result<Vec<_>>>();
    match name.as_str() {
        "const" => {
            let c = one_num(name, args)?;
            if c < 0.0 {
                return Err(Error::param("const", "must be >= 0"));
            }
            Ok(StoppingTime::Constant { c })
        }
        "level" => level_crossing(one_num(name, args)?),
        "hit" => {
            let v = nums(name, args)?;
            if v.is_empty() || v.len() % 2 != 0 {
                return Err(Error::Parse("`hit` takes lo,hi pairs".into()));
            }
            hitting_time_closed(
                v.chunks(2)
                    .map(|p| ClosedInterval { lo: p[0], hi: p[1] })
                    .collect(),
            )
        }
        "jump" => jump_magnitude_time(one_num(name, args)?),
        "jumpcount" => jump_count_time(count_arg(name, args)?),
        "sum" => match times(args)?.as_slice() {
            [a, b] => Ok(sum_capped(a.clone(), b.clone())),
            _ => Err(Error::Parse("`sum` takes two operands".into())),
        },
        "min" => min_of(times(args)?),
        "sup" | "max" => sup_of(times(args)?),
        other => Err(Error::Parse(format!("unknown stopping time `{other}`"))),
    }
}

impl FromStr for StoppingTime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        to_time(&parse_all(s)?)
    }
}

impl FromStr for StoppingSequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let node = parse_all(s)?;
        let Node::Call(name, args) = &node else {
            return Err(Error::Parse("expected a stopping sequence".into()));
        };
        match name.as_str() {
            "grid" => grid_sequence(count_arg(name, args)?),
            "ladder" => {
                let levels = nums(name, args)?;
                if levels.is_empty() || levels.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::param("ladder", "levels must be strictly increasing"));
                }
                Ok(StoppingSequence::Ladder { levels })
            }
            "jumps" if args.is_empty() => Ok(StoppingSequence::Jumps),
            "seq" => Ok(StoppingSequence::Custom {
                times: args.iter().map(to_time).collect::<Result<_>>()?,
            }),
            _ => Ok(StoppingSequence::Custom {
                times: vec![to_time(&node)?],
            }),
        }
    }
}

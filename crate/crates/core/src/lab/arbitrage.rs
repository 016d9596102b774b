//! Corpus scans for the NP-arbitrage pattern `V_0 = 0`, `V(T, ·) ≥ 0`, `V(T, x*) > 0`.
//!
//! Each sampled path is scanned together with adversarial variants that stay
//! in the sampler's class. Variants draw randomness from their own stream of
//! the path seed, so a witness is fully described by `(seed, mutation)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::{derive_seed, member_from_indices, poisson_from_indices, rng_for, ClassSampler};
use crate::portfolio::Portfolio;
use crate::trajectory::{GridPath, Trajectory};

const MUTATION_STREAM: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    Original,
    InsertJump,
    DeleteJump,
    ShiftJump,
    DriverFlip,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::Original,
        Mutation::InsertJump,
        Mutation::DeleteJump,
        Mutation::ShiftJump,
        Mutation::DriverFlip,
    ];

    fn stream(self) -> u64 {
        MUTATION_STREAM + self as u64
    }
}

/// Which adversarial variants to scan alongside each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutatorSet {
    pub insert: bool,
    pub delete: bool,
    pub shift: bool,
    pub flip: bool,
}

impl Default for MutatorSet {
    fn default() -> Self {
        Self::all()
    }
}

impl MutatorSet {
    pub fn all() -> Self {
        Self {
            insert: true,
            delete: true,
            shift: true,
            flip: true,
        }
    }

    pub fn none() -> Self {
        Self {
            insert: false,
            delete: false,
            shift: false,
            flip: false,
        }
    }

    fn enabled(&self) -> Vec<Mutation> {
        let mut out = vec![Mutation::Original];
        for (on, m) in [
            (self.insert, Mutation::InsertJump),
            (self.delete, Mutation::DeleteJump),
            (self.shift, Mutation::ShiftJump),
            (self.flip, Mutation::DriverFlip),
        ] {
            if on {
                out.push(m);
            }
        }
        out
    }
}

fn jump_list(x: &Trajectory) -> Vec<(usize, f64)> {
    x.marks().iter().map(|m| (m.index, x.value(m.index) / m.left - 1.0)).collect()
}

fn edit_jumps<R: Rng>(jumps: &mut Vec<(usize, f64)>, m: Mutation, n: usize, rng: &mut R, factor: impl FnOnce(&mut R) -> f64) -> bool {
    match m {
        Mutation::InsertJump => {
            let k = rng.random_range(1..=n);
            if jumps.iter().any(|j| j.0 == k) {
                return false;
            }
            let a = factor(rng);
            let at = jumps.partition_point(|j| j.0 < k);
            jumps.insert(at, (k, a));
            true
        }
        Mutation::DeleteJump => {
            if jumps.is_empty() {
                return false;
            }
            let i = rng.random_range(0..jumps.len());
            jumps.remove(i);
            true
        }
        Mutation::ShiftJump => {
            if jumps.is_empty() {
                return false;
            }
            let i = rng.random_range(0..jumps.len());
            let span = (n / 16).max(1) as i64;
            let step = rng.random_range(1..=span) * if rng.random_bool(0.5) { 1 } else { -1 };
            let k = jumps[i].0 as i64 + step;
            if k < 1 || k > n as i64 || jumps.iter().any(|j| j.0 as i64 == k) {
                return false;
            }
            jumps[i].0 = k as usize;
            jumps.sort_by_key(|j| j.0);
            true
        }
        _ => false,
    }
}

/// Reflect the martingale part of the log-price, keeping the volatility curve.
fn flip_log_path(x: &Trajectory, mu: f64) -> Result<Option<Trajectory>> {
    let Some(sigma) = x.volatility() else { return Ok(None) };
    let dt = x.grid().mesh();
    let x0 = x.x0();
    let mut drift = 0.0;
    let mut values = Vec::with_capacity(x.len());
    values.push(x0);
    for k in 1..x.len() {
        drift += (mu - 0.5 * sigma[k - 1] * sigma[k - 1]) * dt;
        let noise = (x.value(k) / x0).ln() - drift;
        values.push(x0 * (drift - noise).exp());
    }
    Ok(Some(Trajectory::new(x.grid(), values, vec![])?.with_volatility(sigma.to_vec())?))
}

/// The `m`-variant of `x` (sampled with `seed`), or `None` when `m` does not apply.
pub fn mutate(sampler: &ClassSampler, x: &Trajectory, seed: u64, m: Mutation) -> Result<Option<Trajectory>> {
    if m == Mutation::Original {
        return Ok(Some(x.clone()));
    }
    let mut rng = rng_for(seed, m.stream());
    let n = x.steps();
    match sampler {
        ClassSampler::PoissonExp { params, .. } => {
            let mut jumps = jump_list(x);
            if m == Mutation::DriverFlip || !edit_jumps(&mut jumps, m, n, &mut rng, |_| params.a) {
                return Ok(None);
            }
            let idx: Vec<usize> = jumps.iter().map(|j| j.0).collect();
            poisson_from_indices(params, &idx, x.grid()).map(Some)
        }
        ClassSampler::JumpDiffusion(p) => {
            let class = p.class();
            let mut jumps = jump_list(x);
            let (mut z, _) = crate::models::factorize_member(&class, x)?;
            if m == Mutation::DriverFlip {
                z = GridPath::new(z.grid, z.values.iter().map(|v| -v).collect())?;
            } else if !edit_jumps(&mut jumps, m, n, &mut rng, |r| p.law.sample(r)) {
                return Ok(None);
            }
            member_from_indices(&class, &z, &jumps).map(Some)
        }
        ClassSampler::Heston(p) if m == Mutation::DriverFlip => flip_log_path(x, p.mu),
        ClassSampler::ModifiedHeston(p) if m == Mutation::DriverFlip => flip_log_path(x, p.heston.mu),
        _ => Ok(None),
    }
}

/// A replayable path: sample `seed`, then apply `mutation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub path_index: u64,
    pub seed: u64,
    pub mutation: Mutation,
    /// `V_Φ(T, x)`.
    pub terminal_value: f64,
    /// Time at which the value path attains its minimum.
    pub min_time: f64,
    pub min_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArbitrageOutcome {
    NoViolationFound,
    NegativeValueWitness,
    /// `V(T) ≥ 0` on the whole corpus with a strictly profitable witness.
    ArbitrageCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArbitrageVerdict {
    pub outcome: ArbitrageOutcome,
    pub corpus_size: usize,
    pub samples: usize,
    pub root_seed: u64,
    pub min_terminal: f64,
    pub max_terminal: f64,
    pub positive_count: usize,
    pub negative_count: usize,
    /// First path (in seed order) with `V(T) < 0`.
    pub negative_witness: Option<Witness>,
    /// Path attaining the largest `V(T) > 0`.
    pub profit_witness: Option<Witness>,
}

/// Values below this magnitude count as zero.
pub fn value_tolerance(x0: f64) -> f64 {
    1e-12 * x0.abs().max(1.0)
}

/// Evaluate a witness path from its recorded seed and mutation.
pub fn replay_witness(
    portfolio: &Portfolio,
    sampler: &ClassSampler,
    grid: Grid,
    level: u32,
    seed: u64,
    mutation: Mutation,
) -> Result<(Trajectory, f64)> {
    let x = sampler.sample(grid, seed)?;
    let y = mutate(sampler, &x, seed, mutation)?
        .ok_or_else(|| Error::param("mutation", format!("{mutation:?} does not apply to this path")))?;
    let v = portfolio.terminal_value(&y, level)?;
    Ok((y, v))
}

/// Scan `n` samples and their variants for the NP-arbitrage pattern.
pub fn np_arbitrage_search(
    portfolio: &Portfolio,
    sampler: &ClassSampler,
    grid: Grid,
    level: u32,
    n: usize,
    mutators: MutatorSet,
    root_seed: u64,
) -> Result<ArbitrageVerdict> {
    Ok(np_arbitrage_scan(portfolio, sampler, grid, level, n, mutators, root_seed)?.0)
}

/// [`np_arbitrage_search`] together with every scanned record, in seed order.
pub fn np_arbitrage_scan(
    portfolio: &Portfolio,
    sampler: &ClassSampler,
    grid: Grid,
    level: u32,
    n: usize,
    mutators: MutatorSet,
    root_seed: u64,
) -> Result<(ArbitrageVerdict, Vec<Witness>)> {
    if portfolio.v0() != 0.0 {
        return Err(Error::param("v0", "an arbitrage search needs V_0 = 0"));
    }
    sampler.validate()?;
    let kinds = mutators.enabled();
    let rows: Vec<Vec<Witness>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(root_seed, i);
            let x = sampler.sample(grid, seed)?;
            let mut out = Vec::with_capacity(kinds.len());
            for &m in &kinds {
                if let Some(y) = mutate(sampler, &x, seed, m)? {
                    let path = portfolio.value(&y, level)?;
                    let (k, min_value) = path.min_value();
                    out.push(Witness {
                        path_index: i,
                        seed,
                        mutation: m,
                        terminal_value: path.terminal(),
                        min_time: grid.time(k),
                        min_value,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let tol = value_tolerance(sampler.x0());
    let mut v = ArbitrageVerdict {
        outcome: ArbitrageOutcome::NoViolationFound,
        corpus_size: 0,
        samples: n,
        root_seed,
        min_terminal: f64::INFINITY,
        max_terminal: f64::NEG_INFINITY,
        positive_count: 0,
        negative_count: 0,
        negative_witness: None,
        profit_witness: None,
    };
    let records: Vec<Witness> = rows.into_iter().flatten().collect();
    for w in &records {
        v.corpus_size += 1;
        let t = w.terminal_value;
        v.min_terminal = v.min_terminal.min(t);
        if t < -tol {
            v.negative_count += 1;
            if v.negative_witness.is_none() {
                v.negative_witness = Some(w.clone());
            }
        }
        if t > tol {
            v.positive_count += 1;
        }
        if t > v.max_terminal {
            v.max_terminal = t;
            if t > tol {
                v.profit_witness = Some(w.clone());
            }
        }
    }
    v.outcome = if v.negative_count > 0 {
        ArbitrageOutcome::NegativeValueWitness
    } else if v.positive_count > 0 {
        ArbitrageOutcome::ArbitrageCandidate
    } else {
        ArbitrageOutcome::NoViolationFound
    };
    Ok((v, records))
}

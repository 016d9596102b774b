//! Joint strong local continuity of stopping sequences along recipe sequences,
//! and the per-interval jump correspondence.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lab::recipes::NeighborhoodRecipe;
use crate::stopping::StoppingSequence;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlcRow {
    pub term: usize,
    pub distance: f64,
    pub count: usize,
    pub times: Vec<f64>,
    pub stopped_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlcReport {
    pub sequence: String,
    pub center: SlcRow,
    pub rows: Vec<SlcRow>,
    pub mesh: f64,
    /// `|τ_i(x_n) − τ_i(x*)| ≤ Δ` for `i ≤ M(x*)` at the final term.
    pub item_i: bool,
    /// `|x_n(τ_i(x_n)) − x*(τ_i(x*))| ≤ d(x_n, x*) + one-step oscillation of `x*` at `τ_i(x*)`.
    pub item_ii: bool,
    /// `M(x_n) = M(x*)` at the final term.
    pub item_iii: bool,
}

impl SlcReport {
    pub fn passed(&self) -> bool {
        self.item_i && self.item_ii && self.item_iii
    }
}

fn row(seq: &StoppingSequence, x: &Trajectory, term: usize, distance: f64) -> SlcRow {
    let idx = seq.indices(x);
    SlcRow {
        term,
        distance,
        count: idx.len() - 1,
        times: idx.iter().map(|&k| x.time(k)).collect(),
        stopped_values: idx.iter().map(|&k| x.value(k)).collect(),
    }
}

fn oscillation(x: &Trajectory, k: usize) -> f64 {
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(x.steps());
    (lo..hi).map(|j| (x.value(j + 1) - x.value(j)).abs()).fold(0.0, f64::max)
}

/// Evaluate Definition-11 items i)–iii) along `terms` emissions of `recipe`.
pub fn jointly_slc_test(seq: &StoppingSequence, recipe: &NeighborhoodRecipe, terms: usize) -> Result<SlcReport> {
    let x = &recipe.center;
    let center = row(seq, x, 0, 0.0);
    let rows = (0..terms)
        .map(|n| {
            let (y, d) = recipe.emit(n)?;
            Ok(row(seq, &y, n, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let mesh = x.grid().mesh();
    let (item_i, item_ii, item_iii) = match rows.last() {
        None => (false, false, false),
        Some(last) => {
            let horizon = x.horizon();
            let at = |r: &SlcRow, i: usize| (r.times.get(i).copied().unwrap_or(horizon), r.stopped_values.get(i).copied());
            let idx = seq.indices(x);
            let i_ok = (0..=center.count).all(|i| (at(last, i).0 - center.times[i]).abs() <= mesh * (1.0 + 1e-9));
            let ii_ok = (0..=center.count).all(|i| match at(last, i).1 {
                Some(v) => (v - center.stopped_values[i]).abs() <= last.distance + oscillation(x, idx[i]),
                None => false,
            });
            (i_ok, ii_ok, last.count == center.count)
        }
    };
    Ok(SlcReport {
        sequence: seq.to_string(),
        center,
        rows,
        mesh,
        item_i,
        item_ii,
        item_iii,
    })
}

/// A ladder with one level at `sup x*`: sequences approaching from below never reach it.
pub fn boundary_ladder(x: &Trajectory) -> StoppingSequence {
    StoppingSequence::Ladder {
        levels: vec![x.max_value()],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpCorrespondence {
    /// Jumps of `x*` in `(τ_i, τ_{i+1}]`.
    pub center_counts: Vec<usize>,
    pub counts: Vec<Vec<usize>>,
    /// First term from which every later term matches `center_counts`.
    pub lock_index: Option<usize>,
}

fn interval_counts(seq: &StoppingSequence, x: &Trajectory) -> Vec<usize> {
    seq.indices(x).windows(2).map(|w| x.jump_count_in(w[0], w[1])).collect()
}

/// Per-interval jump counts of each `x_n` against those of `x*`.
pub fn jump_correspondence_check(xs: &[Trajectory], center: &Trajectory, seq: &StoppingSequence) -> JumpCorrespondence {
    let center_counts = interval_counts(seq, center);
    let counts: Vec<Vec<usize>> = xs.iter().map(|x| interval_counts(seq, x)).collect();
    let lock_index = match counts.iter().rposition(|c| *c != center_counts) {
        None => Some(0),
        Some(i) if i + 1 < counts.len() => Some(i + 1),
        Some(_) => None,
    };
    JumpCorrespondence {
        center_counts,
        counts,
        lock_index,
    }
}

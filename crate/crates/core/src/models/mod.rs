//! Generators for the trajectory classes and the stochastic processes whose
//! paths populate them.
//!
//! Every sampler is a pure function of `(params, grid, seed)`. Independent
//! drivers inside one sample use separate ChaCha streams of the same seed,
//! so switching a component off (for example `Y ≡ 0`) leaves the others
//! bit-identical.

mod fbm;
mod heston;
mod jump_diffusion;
mod poisson;
mod sampler;

pub use fbm::{fbm_increment_covariance, sample_fbm};
pub use heston::{
    sample_cir_regularized, sample_heston_type, sample_modified_heston, CirPath, HestonTypeParams,
    ModifiedHestonParams, YSpec, DEFAULT_Y_QV_THRESHOLD,
};
pub use jump_diffusion::{
    factorize_member, gen_brownian_z, gen_jump_diffusion_member, sample_jump_diffusion_parts,
    sample_jump_diffusion_process, FactorSet, JumpDiffusionClassParams, JumpDiffusionProcessParams,
    JumpLaw, ProcessSample,
};
pub use poisson::{gen_poisson_exp, sample_poisson_exp, PoissonExpParams};
pub use sampler::ClassSampler;

pub(crate) use jump_diffusion::member_from_indices;
pub(crate) use poisson::build as poisson_from_indices;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Stream ids used inside one sample.
pub(crate) mod stream {
    pub const DRIVER: u64 = 0;
    pub const JUMPS: u64 = 1;
    pub const Y: u64 = 2;
}

/// A ChaCha8 generator for `seed` on stream `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-path seed `index` derived from a root seed by a counter-based split.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(index.wrapping_add(1 << 32));
    rng.next_u64()
}

/// Snap sorted jump times to nodes `1..=N`, moving collisions to the next free node.
pub(crate) fn snap_free(grid: Grid, times: &[f64]) -> Vec<usize> {
    let n = grid.steps();
    let mut taken = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut k = grid.nearest_index(t).max(1);
        while taken.contains(&k) && k < n {
            k += 1;
        }
        while taken.contains(&k) && k > 1 {
            k -= 1;
        }
        if taken.insert(k) {
            out.push(k);
        }
    }
    out.sort_unstable();
    out
}

/// Snap strictly increasing jump times in `(0, T)`; collisions are errors.
pub(crate) fn snap_strict(grid: Grid, times: &[f64]) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = Vec::with_capacity(times.len());
    for &t in times {
        if !(t > 0.0 && t <= grid.horizon) {
            return Err(Error::param("jump_times", "must lie in (0, T]"));
        }
        let k = grid.nearest_index(t).max(1);
        if out.last().is_some_and(|&p| p >= k) {
            return Err(Error::param(
                "jump_times",
                format!("duplicate or unordered jump time {t} on this grid"),
            ));
        }
        out.push(k);
    }
    Ok(out)
}

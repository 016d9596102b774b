use serde::{Deserialize, Serialize};

use super::{
    sample_heston_type, sample_jump_diffusion_process, sample_modified_heston, sample_poisson_exp,
    HestonTypeParams, JumpDiffusionProcessParams, ModifiedHestonParams, PoissonExpParams,
};
use crate::error::Result;
use crate::grid::Grid;
use crate::trajectory::Trajectory;

/// A generator of class members, usable as the process `Z` of a transfer experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassSampler {
    /// `x_0 e^{μt}(1+a)^{n(t)}` with Poisson(`rate`) jump times.
    PoissonExp { params: PoissonExpParams, rate: f64 },
    JumpDiffusion(JumpDiffusionProcessParams),
    Heston(HestonTypeParams),
    ModifiedHeston(ModifiedHestonParams),
}

impl ClassSampler {
    pub fn sample(&self, grid: Grid, seed: u64) -> Result<Trajectory> {
        match self {
            ClassSampler::PoissonExp { params, rate } => sample_poisson_exp(params, *rate, grid, seed),
            ClassSampler::JumpDiffusion(p) => sample_jump_diffusion_process(p, grid, seed),
            ClassSampler::Heston(p) => sample_heston_type(p, grid, seed),
            ClassSampler::ModifiedHeston(p) => sample_modified_heston(p, grid, seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassSampler::PoissonExp { .. } => "poisson_exp",
            ClassSampler::JumpDiffusion(_) => "jump_diffusion",
            ClassSampler::Heston(_) => "heston",
            ClassSampler::ModifiedHeston(_) => "modified_heston",
        }
    }

    pub fn x0(&self) -> f64 {
        match self {
            ClassSampler::PoissonExp { params, .. } => params.x0,
            ClassSampler::JumpDiffusion(p) => p.x0,
            ClassSampler::Heston(p) => p.z0,
            ClassSampler::ModifiedHeston(p) => p.heston.z0,
        }
    }

    pub fn has_jumps(&self) -> bool {
        matches!(self, ClassSampler::PoissonExp { .. } | ClassSampler::JumpDiffusion(_))
    }

    /// Whether the drift makes `Z` a martingale; `None` when no such statement applies.
    pub fn is_martingale(&self) -> Option<bool> {
        match self {
            ClassSampler::PoissonExp { params, rate } => {
                Some((params.mu + rate * params.a).abs() <= 1e-12 * (1.0 + params.mu.abs()))
            }
            ClassSampler::JumpDiffusion(p) => Some(p.is_compensated()),
            ClassSampler::Heston(p) => Some(p.mu == 0.0),
            ClassSampler::ModifiedHeston(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassSampler::PoissonExp { params, rate } => {
                if !(*rate >= 0.0) {
                    return Err(crate::Error::param("rate", "must be >= 0"));
                }
                PoissonExpParams::new_unchecked(params.x0, params.mu, params.a).map(|_| ())
            }
            ClassSampler::JumpDiffusion(p) => p.validate(),
            ClassSampler::Heston(p) => p.validate(),
            ClassSampler::ModifiedHeston(p) => p.validate(),
        }
    }
}

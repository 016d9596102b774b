//! Evaluate an NP-portfolio on martingale sample paths.

use npmarket::lab::transfer_experiment;
use npmarket::models::{ClassSampler, JumpDiffusionProcessParams, JumpLaw};
use npmarket::portfolio::{Holding, Portfolio, SimplePortfolio};
use npmarket::stopping::level_ladder;
use npmarket::{Grid, Result};

fn main() -> Result<()> {
    let sampler = ClassSampler::JumpDiffusion(JumpDiffusionProcessParams::compensated(
        100.0,
        0.2,
        3.0,
        JumpLaw::Discrete {
            values: vec![-0.1, 0.05],
            probs: vec![0.5, 0.5],
        },
    )?);
    let p = Portfolio::Simple(SimplePortfolio::new(
        level_ladder(vec![104.0, 110.0], 100.0)?,
        vec![Holding::constant(1.0), "recip(100)".parse()?, Holding::constant(-0.5)],
        0.0,
    )?);
    let r = transfer_experiment(&p, &sampler, Grid::new(1.0, 10)?, 10, 10_000, 2024)?;
    println!("mean gain {:.4} +/- {:.4} (3 SE check: {:?})", r.mean, 3.0 * r.se, r.mean_within_3se);
    println!("P(gain > 0) = {:.3}, P(gain < 0) = {:.3}", r.positive_fraction, r.negative_fraction);
    println!("consistent with no arbitrage: {}", r.consistent);
    Ok(())
}

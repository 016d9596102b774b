//! Value a ladder portfolio pathwise, check self-financing and admissibility.

use npmarket::models::{ClassSampler, JumpDiffusionProcessParams, JumpLaw};
use npmarket::portfolio::{check_admissible, check_self_financing, Holding, Portfolio, SimplePortfolio};
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
    let grid = Grid::new(1.0, 10)?;
    let holdings = ["const(1)", "affine(2, -0.01)", "const(0)"]
        .iter()
        .map(|h| h.parse::<Holding>())
        .collect::<Result<Vec<_>>>()?;
    let p = Portfolio::Simple(SimplePortfolio::new(level_ladder(vec![104.0, 110.0], 100.0)?, holdings, 5.0)?);
    let x = sampler.sample(grid, 11)?;
    let path = p.value(&x, 10)?;
    let (k, low) = path.min_value();
    println!("stops at {:?}", p.sequence().times(&x));
    println!("V(T) = {:.4}, min V = {low:.4} at t = {:.4}", path.terminal(), x.time(k));
    let r = check_self_financing(&p, &x, 10)?;
    println!("self-financing residual {:.1e}, accounting residual {:.1e}", r.residual, r.accounting_residual);
    println!("admissibility with A = 20: {:?}", check_admissible(&p, &sampler, grid, 500, 20.0, 1)?);
    Ok(())
}

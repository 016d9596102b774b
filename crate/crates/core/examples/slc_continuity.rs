//! Joint strong local continuity of stopping sequences along neighbourhood recipes.

use npmarket::lab::{boundary_ladder, jointly_slc_test, NeighborhoodRecipe, RecipeClass};
use npmarket::models::{gen_brownian_z, gen_jump_diffusion_member, sample_heston_type, FactorSet, HestonTypeParams, JumpDiffusionClassParams};
use npmarket::stopping::{level_ladder, StoppingSequence};
use npmarket::{Grid, MetricSpec, QvMode, Result};

fn main() -> Result<()> {
    let grid = Grid::new(1.0, 10)?;
    let params = JumpDiffusionClassParams::new(100.0, 0.2, FactorSet::Interval { lo: -0.3, hi: 0.3 })?;
    let x = gen_jump_diffusion_member(&params, &gen_brownian_z(grid, 5), &[(0.3125, 0.08), (0.6875, -0.12)])?;
    let class = RecipeClass::JumpDiffusion { params };
    let recipe = NeighborhoodRecipe::new(
        x.clone(),
        class.clone(),
        MetricSpec::Skorokhod { resolution: 1024, band: 64 },
        5.0,
        0.05,
        class.parse_constraints("u1+u3+u4+u5")?,
    )?;
    let ladder = level_ladder(vec![x.max_value() * 0.97, x.max_value() * 1.2], 100.0)?;
    for seq in [StoppingSequence::Grid { n: 4 }, StoppingSequence::Jumps, ladder] {
        let r = jointly_slc_test(&seq, &recipe, 10)?;
        println!("{:<28} i={} ii={} iii={}", r.sequence, r.item_i, r.item_ii, r.item_iii);
    }

    let hp = HestonTypeParams {
        z0: 100.0,
        mu: 0.0,
        alpha: 0.5,
        k: 2.0,
        theta: 0.04,
        xi: 0.3,
        h: 0.1,
        v0: 0.04,
    };
    let center = sample_heston_type(&hp, grid, 11)?;
    let sv = RecipeClass::StochasticVolatility;
    let metric = MetricSpec::Qv { mode: QvMode::Closed, level: 10 };
    let below = NeighborhoodRecipe::new(center.clone(), sv.clone(), metric, 1.0, 0.05, sv.parse_constraints("u1+u3")?)?;
    let r = jointly_slc_test(&boundary_ladder(&center), &below, 10)?;
    println!("ladder at max x*, approached from below: iii={} (count {} vs {})", r.item_iii, r.center.count, r.rows.last().unwrap().count);
    Ok(())
}

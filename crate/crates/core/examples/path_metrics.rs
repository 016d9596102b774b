//! Uniform, Skorokhod and QV distances between trajectories.

use npmarket::metrics::{qv_metric, skorokhod_distance_ub, uniform_distance};
use npmarket::models::{gen_brownian_z, gen_jump_diffusion_member, FactorSet, JumpDiffusionClassParams};
use npmarket::{Grid, QvMode, Result};

fn main() -> Result<()> {
    let grid = Grid::new(1.0, 10)?;
    let class = JumpDiffusionClassParams::new(100.0, 0.2, FactorSet::Interval { lo: -0.2, hi: 0.2 })?;
    let z = gen_brownian_z(grid, 1);
    let x = gen_jump_diffusion_member(&class, &z, &[(0.5, 0.1)])?;
    let late = gen_jump_diffusion_member(&class, &z, &[(0.53125, 0.1)])?;
    let r = skorokhod_distance_ub(&x, &late, 1024)?;
    println!("jump moved by 1/32:");
    println!("  uniform   {:.4}", uniform_distance(&x, &late)?);
    println!(
        "  skorokhod {:.4}  (|lambda - I| = {:.4}, warped sup = {:.4})",
        r.distance,
        r.warp_distortion.unwrap_or(0.0),
        r.warped_sup.unwrap_or(0.0)
    );

    let fine = Grid::new(1.0, 14)?;
    let z = gen_brownian_z(fine, 2);
    let a = gen_jump_diffusion_member(&JumpDiffusionClassParams::new(100.0, 0.2, FactorSet::Interval { lo: -0.2, hi: 0.2 })?, &z, &[])?;
    let b = gen_jump_diffusion_member(&JumpDiffusionClassParams::new(100.0, 0.25, FactorSet::Interval { lo: -0.2, hi: 0.2 })?, &z, &[])?;
    for mode in [QvMode::Closed, QvMode::Definitional] {
        let r = qv_metric(&a, &b, mode, 14)?;
        println!(
            "d_QV {mode:?}: {:.3} = uniform {:.3} + density {:.3}",
            r.distance,
            r.uniform_part.unwrap(),
            r.density_part.unwrap()
        );
    }
    Ok(())
}

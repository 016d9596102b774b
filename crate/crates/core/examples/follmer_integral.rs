//! Left-point Föllmer sums and the Itô–Föllmer decomposition along refining partitions.

use npmarket::integration::{follmer_integral, ito_follmer_decomposition, QuadraticField};
use npmarket::models::{ClassSampler, JumpDiffusionProcessParams, JumpLaw};
use npmarket::{Grid, Result};

fn main() -> Result<()> {
    let sampler = ClassSampler::JumpDiffusion(JumpDiffusionProcessParams::compensated(
        100.0,
        0.25,
        2.0,
        JumpLaw::Uniform { lo: -0.15, hi: 0.1 },
    )?);
    let x = sampler.sample(Grid::new(1.0, 16)?, 7)?;
    println!("x(0) = {:.4}, x(T) = {:.4}, {} jumps", x.x0(), x.terminal(), x.marks().len());
    println!("{:>5} {:>14} {:>14} {:>12}", "level", "sum x dx", "decomposition", "residual");
    for level in [4, 6, 8, 10, 12, 14, 16] {
        let riemann = follmer_integral(|_, v| v, &x, level)?;
        let r = ito_follmer_decomposition(&QuadraticField::HALF_SQUARE, &x, 0.0, 1.0, level)?;
        println!("{level:>5} {riemann:>14.6} {:>14.6} {:>12.3e}", r.u, r.residual);
    }
    let r = ito_follmer_decomposition(&QuadraticField::HALF_SQUARE, &x, 0.0, 1.0, 14)?;
    println!(
        "\nterms at level 14: boundary {:.4}, qv {:.4}, jumps {:.4}, time {:.4}",
        r.boundary, r.qv_term, r.jump_sum, r.time_integral
    );
    Ok(())
}

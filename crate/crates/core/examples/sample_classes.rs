//! Sample one member of each trajectory class and summarise it.

use npmarket::models::{
    ClassSampler, HestonTypeParams, JumpDiffusionProcessParams, JumpLaw, ModifiedHestonParams, PoissonExpParams, YSpec,
};
use npmarket::{Grid, Result};

fn main() -> Result<()> {
    let grid = Grid::new(1.0, 12)?;
    let heston = HestonTypeParams {
        z0: 100.0,
        mu: 0.0,
        alpha: 0.5,
        k: 2.0,
        theta: 0.04,
        xi: 0.3,
        h: 0.1,
        v0: 0.04,
    };
    let samplers = [
        ClassSampler::PoissonExp {
            params: PoissonExpParams::new(100.0, 0.2, -0.1)?,
            rate: 2.0,
        },
        ClassSampler::JumpDiffusion(JumpDiffusionProcessParams::compensated(
            100.0,
            0.2,
            3.0,
            JumpLaw::Discrete {
                values: vec![-0.1, 0.05],
                probs: vec![0.5, 0.5],
            },
        )?),
        ClassSampler::Heston(heston),
        ClassSampler::ModifiedHeston(ModifiedHestonParams::new(heston, YSpec::Fbm { hurst: 0.6 })?),
    ];
    println!("{:<16} {:>10} {:>10} {:>6} {:>10}", "class", "x(T)", "max", "jumps", "[x]_T");
    for s in &samplers {
        let x = s.sample(grid, 42)?;
        let qv = x.quadratic_variation(12)?;
        println!(
            "{:<16} {:>10.4} {:>10.4} {:>6} {:>10.4}",
            s.name(),
            x.terminal(),
            x.max_value(),
            x.marks().len(),
            qv.total()
        );
    }
    let x = samplers[1].sample(grid, 42)?;
    let mut csv = Vec::new();
    x.write_csv(&mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    println!("\nfirst rows of the jump-diffusion CSV:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}

//! CIR variance, fractional Brownian motion and the modified Heston model.

use npmarket::lab::mean_se;
use npmarket::models::{derive_seed, sample_cir_regularized, sample_fbm, sample_modified_heston, HestonTypeParams, ModifiedHestonParams, YSpec};
use npmarket::{Grid, Result};

fn main() -> Result<()> {
    let hp = HestonTypeParams {
        z0: 100.0,
        mu: 0.0,
        alpha: 0.5,
        k: 2.0,
        theta: 0.04,
        xi: 0.3,
        h: 0.1,
        v0: 0.09,
    };
    let grid = Grid::new(1.0, 10)?;
    let vt: Vec<f64> = (0..1000)
        .map(|i| sample_cir_regularized(&hp, grid, derive_seed(1, i)).map(|c| c.v.terminal()))
        .collect::<Result<_>>()?;
    let (m, se) = mean_se(&vt);
    println!("E[V_T] ~ {m:.5} +/- {se:.5}, exact {:.5}", hp.cir_mean(1.0));

    for level in [8, 10, 12, 14] {
        let y = sample_fbm(0.6, Grid::new(1.0, level)?, 3)?;
        println!("fBm(0.6) QV at level {level}: {:.4}", y.quadratic_variation(level)?);
    }

    let fine = Grid::new(1.0, 12)?;
    let with_y = sample_modified_heston(&ModifiedHestonParams::new(hp, YSpec::Fbm { hurst: 0.6 })?, fine, 9)?;
    let without = sample_modified_heston(&ModifiedHestonParams::new(hp, YSpec::None)?, fine, 9)?;
    println!(
        "modified Heston x(T) = {:.4}, same seed with Y = 0: {:.4}",
        with_y.terminal(),
        without.terminal()
    );
    Ok(())
}

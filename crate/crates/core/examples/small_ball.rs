//! Small-ball frequencies around a sampled target, with Clopper–Pearson intervals.

use npmarket::lab::{calibrate_radius, sample_distances, small_ball_sweep_from};
use npmarket::models::{ClassSampler, HestonTypeParams};
use npmarket::{Grid, MetricSpec, Result};

fn main() -> Result<()> {
    let sampler = ClassSampler::Heston(HestonTypeParams {
        z0: 100.0,
        mu: 0.0,
        alpha: 0.5,
        k: 2.0,
        theta: 0.04,
        xi: 0.3,
        h: 0.1,
        v0: 0.04,
    });
    let grid = Grid::new(1.0, 8)?;
    let target = sampler.sample(grid, 1234)?;
    let d = sample_distances(&sampler, &target, &MetricSpec::Uniform, 4000, 5)?;
    let eps = [2.0, 4.0, 6.0, 8.0, 12.0, 16.0];
    let sweep = small_ball_sweep_from(&d, &eps)?;
    println!("{:>6} {:>6} {:>9} {:>20}", "eps", "hits", "freq", "95% CI");
    for e in &sweep {
        println!("{:>6} {:>6} {:>9.4} [{:.4}, {:.4}]", e.eps, e.hits, e.frequency, e.ci.0, e.ci.1);
    }
    println!("smallest radius with hits and frequency <= 5%: {:?}", calibrate_radius(&sweep, 0.05));
    Ok(())
}

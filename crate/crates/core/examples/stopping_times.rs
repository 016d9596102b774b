//! Evaluate trajectory stopping times and check the agreement property on spliced paths.

use npmarket::models::{ClassSampler, JumpDiffusionProcessParams, JumpLaw};
use npmarket::stopping::{check_np_property, StoppingSequence, StoppingTime};
use npmarket::{Grid, Result};

fn main() -> Result<()> {
    let sampler = ClassSampler::JumpDiffusion(JumpDiffusionProcessParams::compensated(
        100.0,
        0.2,
        4.0,
        JumpLaw::Discrete {
            values: vec![-0.08, 0.06],
            probs: vec![0.5, 0.5],
        },
    )?);
    let grid = Grid::new(1.0, 10)?;
    let x = sampler.sample(grid, 3)?;
    let other = sampler.sample(grid, 4)?;
    for src in ["const(0.5)", "level(104)", "hit(0, 97)", "jump(5)", "jumpcount(2)", "min(level(104), jumpcount(1))", "sum(level(102), const(0.1))"] {
        let tau: StoppingTime = src.parse()?;
        let k = tau.index(&x);
        let spliced = x.splice_after(k, &other)?;
        println!(
            "{src:<32} tau = {:.4}  spliced tau = {:.4}  {:?}",
            tau.eval(&x),
            tau.eval(&spliced),
            check_np_property(&tau, &x, &spliced)?
        );
    }
    for src in ["grid(4)", "ladder(102, 105, 110)", "jumps"] {
        let seq: StoppingSequence = src.parse()?;
        println!("{src:<22} M = {}  times {:?}", seq.count(&x), seq.times(&x));
    }
    Ok(())
}

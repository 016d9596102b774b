//! Scan sampled and mutated paths for the NP-arbitrage pattern.

use npmarket::lab::{np_arbitrage_search, replay_witness, MutatorSet};
use npmarket::models::{ClassSampler, JumpDiffusionProcessParams, JumpLaw, PoissonExpParams};
use npmarket::portfolio::{Portfolio, SimplePortfolio};
use npmarket::{Grid, Result};

fn main() -> Result<()> {
    let grid = Grid::new(1.0, 10)?;
    let hold = Portfolio::Simple(SimplePortfolio::hold_until(1.0, 0.0)?);

    // upward drift and upward jumps: every path gains
    let upward = ClassSampler::PoissonExp {
        params: PoissonExpParams::new_unchecked(100.0, 0.05, 0.1)?,
        rate: 2.0,
    };
    let v = np_arbitrage_search(&hold, &upward, grid, 10, 2000, MutatorSet::all(), 1)?;
    println!("positive control: {:?} over {} paths", v.outcome, v.corpus_size);
    if let Some(w) = &v.profit_witness {
        let (_, value) = replay_witness(&hold, &upward, grid, 10, w.seed, w.mutation)?;
        println!("  witness seed {} ({:?}) V(T) = {:.6}, replayed {:.6}", w.seed, w.mutation, w.terminal_value, value);
    }

    let compensated = ClassSampler::JumpDiffusion(JumpDiffusionProcessParams::compensated(
        100.0,
        0.2,
        3.0,
        JumpLaw::Discrete {
            values: vec![-0.1, 0.05],
            probs: vec![0.5, 0.5],
        },
    )?);
    let v = np_arbitrage_search(&hold, &compensated, grid, 10, 2000, MutatorSet::all(), 1)?;
    println!(
        "compensated jump diffusion: {:?}, V(T) in [{:.3}, {:.3}]",
        v.outcome, v.min_terminal, v.max_terminal
    );
    Ok(())
}

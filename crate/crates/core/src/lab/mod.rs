//! Empirical no-arbitrage harness: neighbourhood recipes, small-ball
//! frequencies, arbitrage scans, continuity of stopping families and the
//! transfer experiment.
//!
//! Verdicts are relative to the scanned corpus. An `arbitrage-candidate`
//! means no scanned path lost money and at least one gained.

mod arbitrage;
mod recipes;
mod slc;
mod small_ball;
mod transfer;

pub use arbitrage::{
    mutate, np_arbitrage_scan, np_arbitrage_search, replay_witness, value_tolerance, ArbitrageOutcome, ArbitrageVerdict, Mutation,
    MutatorSet, Witness,
};
pub use recipes::{Constraint, NeighborhoodRecipe, RecipeClass};
pub use slc::{boundary_ladder, jointly_slc_test, jump_correspondence_check, JumpCorrespondence, SlcReport, SlcRow};
pub use small_ball::{
    calibrate_radius, clopper_pearson, sample_distances, small_ball_estimate, small_ball_sweep,
    small_ball_sweep_from, SmallBallEstimate,
};
pub use transfer::{mean_se, terminal_gains, transfer_experiment, TransferReport};

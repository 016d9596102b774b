//! Trajectory-based (probability-free) market laboratory.
//!
//! Price paths are RCLL trajectories on dyadic grids. On top of them the
//! crate provides pathwise Föllmer integration, trajectory stopping times,
//! the uniform / Skorokhod / quadratic-variation metrics, generators for the
//! jump-diffusion and stochastic-volatility trajectory classes, portfolio
//! valuation, and Monte Carlo harnesses for small-ball, local-continuity and
//! arbitrage experiments.

pub mod config;
pub mod error;
pub mod grid;
pub mod integration;
pub mod lab;
pub mod metrics;
pub mod models;
pub mod portfolio;
pub mod runner;
pub mod stopping;
pub mod trajectory;

pub use error::{Error, Result};
pub use grid::{Grid, PartitionSequence};
pub use metrics::{MetricKind, MetricSpec, QvMode};
pub use trajectory::{make_trajectory, GridPath, Jump, JumpMark, QvCurve, Trajectory};

//! Calibrates a mobility-controlled stochastic SIRD epidemic model and a
//! regression-learned economic value from time series, solves the
//! penalized stochastic control problem with per-timestep policy
//! networks, and produces efficient social-distancing frontiers,
//! efficiency ratios, recommended policies, and Monte Carlo scenario
//! projections.
//!
//! Start from the runnable programs in `examples/`: each one drives a
//! major capability end to end on synthetic data.

pub mod calibrate;
pub mod cli;
pub mod control;
pub mod econ;
pub mod epidemic;
pub mod error;
pub mod frontier;
pub mod ingest;
pub mod linalg;
pub mod mobility;
pub mod parallel;
pub mod rng;
pub mod scenario;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};

//! Neural solution of the control problem: per-timestep policy networks,
//! reverse-mode gradients through the unrolled dynamics, Adam, and
//! penalty cross-validation.

pub mod adam;
pub mod network;
pub mod tape;
pub mod train;

pub use adam::AdamState;
pub use network::{Activation, InputNormalizer, NetworkLayout, PolicyStack};
pub use train::{
    cross_validate_penalties, max_control_violation, mean_cost, objective_and_gradient,
    sample_noise_paths, train, EpochStats, PenaltyCandidate, PenaltySelection, TrainConfig,
    TrainResult, FEASIBILITY_TOL,
};

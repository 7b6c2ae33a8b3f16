//! Recommends an efficient policy: hold last Friday's mobility fixed,
//! measure its tracking error, and find the frontier policy with the same
//! economic risk but a lower infection rate.
//!
//! ```sh
//! cargo run --release --example recommend_policy
//! ```

use esdf::frontier::{log_spaced_grid, recommend_esdp, sweep_lambda, SweepConfig};
use esdf::mobility::{MobilityVector, MOBILITY_NAMES};
use esdf::solver::{NetworkLayout, TrainConfig};
use esdf::synthetic::demo_control_problem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = demo_control_problem();
    let train = TrainConfig {
        learning_rate: 5e-3,
        beta2: 0.99,
        batch_size: 64,
        n_train_paths: 256,
        epochs: 60,
        master_seed: 42,
        n_heldout_paths: 128,
        threads: 2,
        ..Default::default()
    };
    let config = SweepConfig {
        lambda_grid: log_spaced_grid(1e-3, 1e-1, 5),
        layout: NetworkLayout::small(16),
        train: train.clone(),
        eval_seed: 9,
        n_eval_paths: 128,
        penalty_candidates: vec![100.0],
        n_validation_paths: 64,
        allow_single_point: false,
    };
    println!("building the frontier ({} lambdas) ...", config.lambda_grid.len());
    let outcome = sweep_lambda(&spec, &config)?;

    // A moderate restriction standing in for the last observed Friday.
    let last_friday = MobilityVector([-0.06, -0.04, -0.03, -0.07, -0.05, -0.035]);
    println!("holding last Friday's mobility fixed: {:?}", last_friday.0);

    let recommendation = recommend_esdp(
        &last_friday,
        &spec,
        &outcome.frontier,
        config.layout,
        &train,
        3,
    )?;

    println!("\nheld fixed      : te = {:.8}, infection rate = {:.6}",
        recommendation.fixed_te, recommendation.fixed_rate);
    println!("recommended     : te = {:.8}, infection rate = {:.6} (lambda* = {:.5})",
        recommendation.tracking_error, recommendation.infection_rate, recommendation.lambda);
    println!("te residual     : {:.2e} after {} retraining rounds",
        recommendation.te_residual, recommendation.retrained);

    println!("\nrecommended per-step mean controls:");
    print!("step");
    for name in MOBILITY_NAMES {
        print!("  {name:>7}");
    }
    println!();
    for (step, alpha) in recommendation.mean_controls.iter().enumerate() {
        print!("{step:>4}");
        for v in alpha.0 {
            print!("  {v:>7.4}");
        }
        println!();
    }
    Ok(())
}

//! Sweeps the risk-aversion weight to draw the efficient social-distancing
//! frontier, then benchmarks points against it with efficiency ratios.
//!
//! ```sh
//! cargo run --release --example frontier_sweep
//! ```

use esdf::frontier::{efficiency_ratio, log_spaced_grid, sweep_lambda, SweepConfig};
use esdf::solver::{NetworkLayout, TrainConfig};
use esdf::synthetic::demo_control_problem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = demo_control_problem();
    let config = SweepConfig {
        lambda_grid: log_spaced_grid(1e-3, 1e-1, 5),
        layout: NetworkLayout::small(16),
        train: TrainConfig {
            learning_rate: 5e-3,
            beta2: 0.99,
            batch_size: 64,
            n_train_paths: 256,
            epochs: 60,
            master_seed: 42,
            n_heldout_paths: 128,
            threads: 2,
            ..Default::default()
        },
        eval_seed: 9,
        n_eval_paths: 128,
        penalty_candidates: vec![100.0],
        n_validation_paths: 64,
        allow_single_point: false,
    };

    println!("training one policy per lambda ({} grid points) ...", config.lambda_grid.len());
    let outcome = sweep_lambda(&spec, &config)?;
    for (lambda, message) in &outcome.failures {
        println!("warning: lambda {lambda} failed: {message}");
    }

    println!("\nlambda      tracking error  infection rate  dominated");
    for p in &outcome.frontier.points {
        println!(
            "{:<10.5}  {:<14.8}  {:<14.8}  {}",
            p.lambda, p.tracking_error, p.infection_rate, p.dominated
        );
    }

    // Benchmarking: a frontier vertex scores 1; doubling both of its
    // coordinates quarters the efficiency.
    let vertex = outcome
        .frontier
        .points
        .iter()
        .find(|p| !p.dominated)
        .expect("sweep produced non-dominated points");
    let own = efficiency_ratio(vertex.tracking_error, vertex.infection_rate, &outcome.frontier)?;
    let doubled = efficiency_ratio(
        2.0 * vertex.tracking_error,
        2.0 * vertex.infection_rate,
        &outcome.frontier,
    )?;
    println!("\nefficiency of the lambda = {} vertex against its own frontier: {}",
        vertex.lambda, own.efficiency_ratio);
    println!("efficiency of a point at double that vertex: {}", doubled.efficiency_ratio);

    let out = std::env::temp_dir().join("esdf-example-frontier");
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("frontier.csv"), outcome.frontier.to_csv())?;
    std::fs::write(out.join("mean_controls.csv"), outcome.frontier.mean_controls_csv())?;
    println!("\nwrote {}", out.join("frontier.csv").display());
    println!("wrote {}", out.join("mean_controls.csv").display());
    Ok(())
}

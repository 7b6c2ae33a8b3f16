//! Trains one per-timestep policy stack on the demo control problem and
//! prints the training curve and the learned first-day control.
//!
//! ```sh
//! cargo run --release --example train_policy
//! ```

use esdf::solver::{train, NetworkLayout, TrainConfig};
use esdf::synthetic::demo_control_problem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = demo_control_problem();
    let config = TrainConfig {
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
    let layout = NetworkLayout::small(16);
    println!(
        "training {} networks of {} parameters each at lambda = {} ...",
        spec.cost.horizon,
        layout.params_per_network(),
        spec.cost.lambda
    );

    let result = train(&spec, layout, &config)?;
    println!("\nepoch  train J     held-out J");
    for row in result.curve.iter().step_by(10) {
        println!("{:>5}  {:>10.6}  {:>10.6}", row.epoch, row.train_j, row.heldout_j);
    }
    println!("\nbest held-out J: {:.6}", result.best_heldout);

    let control = result.stack.forward(0, &spec.initial_state);
    println!("first-day control (rr, gp, pa, ts, wp, re):");
    println!("  {:?}", control.0.map(|v| (v * 1e4).round() / 1e4));
    println!(
        "feasible set violation of that control: {:.2e}",
        spec.feasible.max_violation(&control)
    );

    let out = std::env::temp_dir().join("esdf-example-train");
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("training_curve.csv"), result.curve_csv())?;
    std::fs::write(out.join("policy.json"), result.stack.to_json())?;
    println!("\nwrote {}", out.join("training_curve.csv").display());
    println!("wrote {}", out.join("policy.json").display());
    Ok(())
}

//! Full calibration pipeline on synthetic inputs: load the three CSVs,
//! align them, fit every model, and write the report, the canonical
//! aligned CSV, and a frozen problem spec.
//!
//! ```sh
//! cargo run --release --example calibrate_report
//! ```

use esdf::control::{ControlState, CostConfig, ProblemSpec};
use esdf::econ::{predict_value, EconomicTarget};
use esdf::ingest::{align, load_cases_csv, load_index_csv, load_mobility_csv, AlignConfig, MobilityUnits};
use esdf::synthetic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("esdf-example-calibrate");
    std::fs::create_dir_all(&dir)?;
    let (mobility_path, cases_path, index_path) =
        synthetic::write_csv_inputs(&dir, synthetic::Options::default())?;
    println!("synthetic inputs under {}", dir.display());

    let mobility = load_mobility_csv(&mobility_path, MobilityUnits::Fraction)?;
    let (cases, warnings) = load_cases_csv(&cases_path, 10_000_000, None)?;
    for warning in &warnings {
        println!("warning: {warning}");
    }
    let index = load_index_csv(&index_path)?;

    let config = AlignConfig {
        beta_start: mobility.dates[0],
        gamma_delta_start: mobility.dates[4],
    };
    let dataset = align(&mobility, &cases, &index, config)?;
    println!("aligned {} days, {} with index closes", dataset.dates.len(),
        dataset.index_close.iter().flatten().count());

    let calibration = esdf::calibrate::calibrate(&dataset, 1e-8)?;
    let infection = &calibration.infection;
    println!("\ninfection log-odds regression (n = {}):", infection.regression.n_observations);
    println!("  intercept {:+.4}, R^2 {:.4}, residual Shapiro-Wilk p {:.4}",
        infection.model.c0, infection.regression.r_squared, infection.residual_normality.p_value);
    for (name, (coef, se)) in esdf::mobility::MOBILITY_NAMES.iter().zip(
        infection.model.c.iter().zip(&infection.regression.standard_errors[1..]),
    ) {
        println!("  {name:>2}: {coef:+9.4} (se {se:.4})");
    }
    println!("dynamics: mu_gamma {:+.4}, sigma_gamma {:.4}, mu_delta {:+.4}, sigma_delta {:.4}, sigma_beta {:.4}",
        calibration.dynamics.mu_gamma, calibration.dynamics.sigma_gamma,
        calibration.dynamics.mu_delta, calibration.dynamics.sigma_delta,
        calibration.dynamics.sigma_beta);
    let econ = calibration.economic.as_ref().expect("prices were generated");
    println!("economic value: kappa0 {:.1}, R^2 {:.4}", econ.model.kappa0, econ.regression.r_squared);
    println!("PCA score bounds: lower {:?}", calibration.pca.lower.map(|v| (v * 1e3).round() / 1e3));
    println!("                  upper {:?}", calibration.pca.upper.map(|v| (v * 1e3).round() / 1e3));

    // Freeze the calibrated control problem the way the CLI does.
    let n = dataset.dates.len();
    let last = dataset.epidemic[n - 1];
    let spec = ProblemSpec {
        infection_model: infection.model,
        dynamics: calibration.dynamics,
        econ: econ.model,
        feasible: calibration.pca.clone(),
        cost: CostConfig {
            lambda: 0.01,
            penalty_weights: [0.0; 6],
            horizon: 5,
            target: EconomicTarget::new(predict_value(&econ.model, &dataset.mobility[n - 1], &last)),
        },
        initial_state: ControlState {
            i: last.i,
            r: last.r,
            d: last.d,
            log_odds: *calibration.extraction.triples.last().unwrap(),
            lagged_controls: [
                dataset.mobility[n - 4],
                dataset.mobility[n - 3],
                dataset.mobility[n - 2],
                dataset.mobility[n - 1],
            ],
        },
    };

    let report_path = dir.join("calibration_report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&calibration.report(&dataset))?)?;
    dataset.write_csv(dir.join("aligned.csv"))?;
    std::fs::write(dir.join("problem_spec.json"), serde_json::to_string_pretty(&spec)?)?;
    println!("\nwrote {}", report_path.display());
    println!("wrote {}", dir.join("aligned.csv").display());
    println!("wrote {}", dir.join("problem_spec.json").display());
    Ok(())
}

//! Year-long Monte Carlo scenarios under the four mobility presets, with
//! median and quantile bands of the infectious fraction.
//!
//! ```sh
//! cargo run --release --example scenario_bands
//! ```

use esdf::epidemic::{EpidemicState, InfectionRegressionModel, LogOddsDynamicsParams, LogOddsTriple};
use esdf::scenario::{preset_mobility, quantile_curves, simulate, ScenarioSpec, PRESET_NAMES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // US June-2020 calibration estimates and a plausible mid-2020 state.
    let infection = InfectionRegressionModel {
        c0: 0.3282,
        c: [-16.9957, 4.4961, -1.4419, 28.5379, 3.7798, 34.698],
    };
    let dynamics = LogOddsDynamicsParams {
        mu_gamma: 0.0176,
        sigma_gamma: 0.1919,
        mu_delta: 0.0061,
        sigma_delta: 0.0451,
        sigma_beta: 0.5166,
    };
    let (i, r, d) = (0.004, 0.002, 0.0004);

    let out_dir = std::env::temp_dir().join("esdf-example-scenarios");
    std::fs::create_dir_all(&out_dir)?;

    for name in PRESET_NAMES {
        let mobility = preset_mobility(name)?;
        let spec = ScenarioSpec {
            fixed_mobility: mobility,
            horizon_days: 365,
            n_paths: 2_000,
            seed: 20200622,
            initial_state: EpidemicState { s: 1.0 - i - r - d, i, r, d },
            initial_log_odds: LogOddsTriple {
                beta: infection.c0 + mobility.dot(&infection.c),
                gamma: (0.05f64 / 0.95).ln(),
                delta: (0.002f64 / 0.998).ln(),
            },
            infection,
            dynamics,
        };
        let ensemble = simulate(&spec, 2);
        let curves = quantile_curves(&ensemble, &[0.45, 0.5, 0.55])?;

        let last = spec.horizon_days - 1;
        let cumulative = curves.i[1][last] + curves.r[1][last] + curves.d[1][last];
        println!("{name:>12}: day-365 median I = {:.5} [{:.5}, {:.5}], cumulative infected = {:.4}",
            curves.i[1][last], curves.i[0][last], curves.i[2][last], cumulative);

        let path = out_dir.join(format!("{name}.csv"));
        std::fs::write(&path, curves.to_csv())?;
        println!("{:>12}  wrote {}", "", path.display());
    }
    Ok(())
}

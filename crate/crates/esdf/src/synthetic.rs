//! Deterministic synthetic datasets for examples, tests, and demos.
//!
//! The generator simulates the forward model itself: a bounded AR(1)
//! mobility walk, log-odds following the stochastic dynamics, SIRD states
//! stepped daily, and index prices from the linear economic value on
//! weekdays. Everything is a pure function of the options.

use chrono::{Datelike, NaiveDate, Weekday};

use crate::econ::EconomicModel;
use crate::epidemic::{
    sample_next_log_odds, sird_step, EpidemicState, InfectionRegressionModel,
    LogOddsDynamicsParams, LogOddsTriple, NoiseVector,
};
use crate::ingest::{AlignedDataset, MobilityTimeSeries};
use crate::mobility::MobilityVector;
use crate::rng::StreamRng;

#[derive(Debug, Clone)]
pub struct Options {
    pub n_days: usize,
    pub seed: u64,
    pub population: u64,
    pub start_date: NaiveDate,
    pub initial_state: EpidemicState,
    pub initial_log_odds: LogOddsTriple,
    pub infection: InfectionRegressionModel,
    pub dynamics: LogOddsDynamicsParams,
    pub sigma_beta: f64,
    pub econ: EconomicModel,
    pub econ_noise: f64,
    pub include_prices: bool,
    pub constant_mobility: bool,
    /// AR(1) innovation scale of the mobility walk.
    pub mobility_step: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            n_days: 90,
            seed: 1,
            population: 10_000_000,
            start_date: NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
            initial_state: EpidemicState { s: 0.97, i: 0.02, r: 0.008, d: 0.002 },
            initial_log_odds: LogOddsTriple { beta: -2.5, gamma: -3.0, delta: -6.0 },
            infection: InfectionRegressionModel {
                c0: -2.5,
                c: [-1.7, 0.45, -0.14, 2.85, 0.38, 3.47],
            },
            dynamics: LogOddsDynamicsParams {
                mu_gamma: 0.005,
                sigma_gamma: 0.02,
                mu_delta: 0.003,
                sigma_delta: 0.01,
                sigma_beta: 0.15,
            },
            sigma_beta: 0.15,
            econ: EconomicModel {
                kappa0: 2900.0,
                kappa: [1100.0, -1100.0, -300.0, 1000.0, -180.0, 1200.0],
                kappa_i: 5.0e4,
                kappa_r: 4.0e4,
                kappa_d: -5.0e4,
            },
            econ_noise: 5.0,
            include_prices: true,
            constant_mobility: false,
            mobility_step: 0.02,
        }
    }
}

/// Simulates an aligned dataset directly (no CSV round trip).
pub fn dataset(options: Options) -> AlignedDataset {
    let n = options.n_days;
    let mut rng = StreamRng::new(options.seed, 0);

    // Bounded AR(1) mobility walk per component.
    let mut mobility: Vec<MobilityVector> = Vec::with_capacity(n);
    let mut current = [0.0f64; 6];
    for _ in 0..n {
        if options.constant_mobility {
            mobility.push(MobilityVector([-0.1, 0.05, 0.02, -0.2, -0.15, 0.08]));
            continue;
        }
        for c in current.iter_mut() {
            *c = (0.95 * *c + options.mobility_step * rng.next_normal()).clamp(-0.8, 0.8);
        }
        mobility.push(MobilityVector(current));
    }

    // Trailing mean over the observations available so far, capped at 5.
    let warmup_mean = |t: usize| -> MobilityVector {
        let lo = t.saturating_sub(4);
        MobilityVector::mean(&mobility[lo..=t])
    };

    let mut params = options.dynamics;
    params.sigma_beta = options.sigma_beta;

    let mut states = vec![options.initial_state];
    let mut odds = options.initial_log_odds;
    for t in 0..n - 1 {
        let noise = NoiseVector {
            z_beta: rng.next_normal(),
            z_gamma: rng.next_normal(),
            z_delta: rng.next_normal(),
        };
        odds = sample_next_log_odds(&odds, &warmup_mean(t), &options.infection, &params, &noise);
        let next = sird_step(states.last().unwrap(), &odds);
        states.push(next);
    }

    let dates: Vec<NaiveDate> = (0..n as i64)
        .map(|k| options.start_date + chrono::Duration::days(k))
        .collect();

    let index_close: Vec<Option<f64>> = dates
        .iter()
        .enumerate()
        .map(|(k, date)| {
            if !options.include_prices {
                return None;
            }
            if matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
                return None;
            }
            let value = crate::econ::predict_value(&options.econ, &mobility[k], &states[k])
                + options.econ_noise * rng.next_normal();
            Some(value)
        })
        .collect();

    let series = MobilityTimeSeries {
        dates: dates.clone(),
        values: mobility.clone(),
    };
    let ma = series.moving_average();

    AlignedDataset {
        dates,
        mobility,
        mobility_ma: ma,
        epidemic: states,
        index_close,
        population: options.population,
        beta_start: options.start_date,
        gamma_delta_start: options.start_date,
    }
}

/// Writes the three raw input CSVs (mobility fractions, case counts, index
/// closes) for a synthetic dataset, returning their paths.
pub fn write_csv_inputs(
    dir: &std::path::Path,
    options: Options,
) -> std::io::Result<(std::path::PathBuf, std::path::PathBuf, std::path::PathBuf)> {
    let ds = dataset(options);
    let pop = ds.population as f64;

    let mut mobility = String::from("date,rr,gp,pa,ts,wp,re\n");
    let mut cases = String::from("date,active,recovered,deaths\n");
    let mut index = String::from("date,close\n");
    for k in 0..ds.dates.len() {
        let date = ds.dates[k];
        mobility.push_str(&date.to_string());
        for v in ds.mobility[k].0 {
            mobility.push(',');
            mobility.push_str(&crate::ingest::format_f64(v));
        }
        mobility.push('\n');

        let e = &ds.epidemic[k];
        cases.push_str(&format!(
            "{date},{},{},{}\n",
            crate::ingest::format_f64(e.i * pop),
            crate::ingest::format_f64(e.r * pop),
            crate::ingest::format_f64(e.d * pop),
        ));

        if let Some(close) = ds.index_close[k] {
            index.push_str(&format!("{date},{}\n", crate::ingest::format_f64(close)));
        }
    }

    let mobility_path = dir.join("mobility.csv");
    let cases_path = dir.join("cases.csv");
    let index_path = dir.join("index.csv");
    std::fs::write(&mobility_path, mobility)?;
    std::fs::write(&cases_path, cases)?;
    std::fs::write(&index_path, index)?;
    Ok((mobility_path, cases_path, index_path))
}

/// Small control problem with a clean trade-off, used by the runnable
/// examples: the infection pull is parallel to the economic coefficients,
/// so each lambda has an interior optimum, and the feasible set comes from
/// a lockdown-scale synthetic mobility history.
pub fn demo_control_problem() -> crate::control::ProblemSpec {
    use crate::control::{ControlState, CostConfig, ProblemSpec};
    use crate::econ::EconomicTarget;

    let mut rng = StreamRng::new(777, 0);
    let mut current = [0.0f64; 6];
    let values: Vec<MobilityVector> = (0..120)
        .map(|_| {
            for c in current.iter_mut() {
                *c = (0.9 * *c + 0.12 * rng.next_normal()).clamp(-0.8, 0.8);
            }
            MobilityVector(current)
        })
        .collect();
    let d0 = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
    let history = MobilityTimeSeries {
        dates: (0..values.len() as i64).map(|k| d0 + chrono::Duration::days(k)).collect(),
        values,
    };
    let feasible = crate::calibrate::fit_pca_bounds(&history).expect("demo history is non-degenerate");

    let econ = EconomicModel {
        kappa0: 2900.0,
        kappa: [14.0, 10.0, 7.0, 15.0, 12.0, 8.0],
        kappa_i: 100.0,
        kappa_r: 50.0,
        kappa_d: -500.0,
    };
    let initial_state = ControlState {
        i: 0.01,
        r: 0.005,
        d: 0.001,
        log_odds: LogOddsTriple { beta: -2.0, gamma: -3.0, delta: -6.0 },
        lagged_controls: [MobilityVector::ZERO; 4],
    };
    let spx0 = crate::econ::predict_value(&econ, &MobilityVector::ZERO, &initial_state.epidemic_state());
    ProblemSpec {
        infection_model: InfectionRegressionModel {
            c0: -2.0,
            c: [0.28, 0.2, 0.14, 0.3, 0.24, 0.16],
        },
        dynamics: LogOddsDynamicsParams {
            mu_gamma: 0.0176,
            sigma_gamma: 1e-4,
            mu_delta: 0.0061,
            sigma_delta: 1e-4,
            sigma_beta: 1e-3,
        },
        econ,
        feasible,
        cost: CostConfig {
            lambda: 0.01,
            penalty_weights: [100.0; 6],
            horizon: 5,
            target: EconomicTarget::new(spx0),
        },
        initial_state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let a = dataset(Options::default());
        let b = dataset(Options::default());
        assert_eq!(a.epidemic.len(), b.epidemic.len());
        for (x, y) in a.epidemic.iter().zip(&b.epidemic) {
            assert_eq!(x.i.to_bits(), y.i.to_bits());
        }
    }

    #[test]
    fn states_stay_valid() {
        let ds = dataset(Options { n_days: 120, ..Default::default() });
        for st in &ds.epidemic {
            assert!((st.s + st.i + st.r + st.d - 1.0).abs() <= 1e-12);
            assert!(st.i >= 0.0 && st.r >= 0.0 && st.d >= 0.0);
        }
    }

    #[test]
    fn weekends_have_no_prices() {
        let ds = dataset(Options::default());
        for (date, close) in ds.dates.iter().zip(&ds.index_close) {
            if matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
                assert!(close.is_none());
            } else {
                assert!(close.is_some());
            }
        }
    }
}

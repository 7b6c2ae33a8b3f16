//! Property tests over the crate's core invariants.

use chrono::NaiveDate;
use proptest::prelude::*;

use esdf::econ::{tracking_error, EconomicTarget};
use esdf::epidemic::{logit, sigmoid, sird_step, EpidemicState, LogOddsTriple};
use esdf::ingest::{AlignConfig, AlignedDataset};
use esdf::mobility::MobilityVector;

fn valid_state() -> impl Strategy<Value = EpidemicState> {
    // Random nonnegative weights normalised to one.
    (1e-9f64..1.0, 1e-9f64..1.0, 1e-9f64..1.0, 1e-9f64..1.0).prop_map(|(a, b, c, d)| {
        let total = a + b + c + d;
        EpidemicState { s: a / total, i: b / total, r: c / total, d: d / total }
    })
}

proptest! {
    #[test]
    fn sird_step_conserves_and_orders(
        state in valid_state(),
        beta in -20.0f64..20.0,
        gamma in -20.0f64..20.0,
        delta in -20.0f64..20.0,
    ) {
        let odds = LogOddsTriple { beta, gamma, delta };
        let next = sird_step(&state, &odds);
        prop_assert!((next.s + next.i + next.r + next.d - 1.0).abs() <= 1e-12);
        prop_assert!(next.i >= 0.0);
        prop_assert!(next.r >= state.r && next.d >= state.d);
    }

    #[test]
    fn rates_stay_strictly_inside_unit_interval(x in -36.0f64..36.0) {
        // Strict interior until the float saturation point near |x| = 36.7.
        let rate = sigmoid(x);
        prop_assert!(rate > 0.0 && rate < 1.0);
    }

    #[test]
    fn extreme_log_odds_saturate_without_leaving_the_interval(x in -2000.0f64..2000.0) {
        let rate = sigmoid(x);
        prop_assert!((0.0..=1.0).contains(&rate));
    }

    #[test]
    fn logit_inverts_sigmoid_on_interior(p in 1e-12f64..1.0) {
        prop_assume!(p < 1.0 - 1e-12);
        let x = logit(p).unwrap();
        prop_assert!((sigmoid(x) - p).abs() <= 1e-12);
    }

    #[test]
    fn tracking_error_is_permutation_invariant(
        values in proptest::collection::vec(100.0f64..5000.0, 1..20),
        spx0 in 100.0f64..5000.0,
    ) {
        let target = EconomicTarget::new(spx0);
        let mut reversed = values.clone();
        reversed.reverse();
        let a = tracking_error(&values, &target);
        let b = tracking_error(&reversed, &target);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn aligned_csv_round_trip_is_bit_exact(
        rows in proptest::collection::vec(
            (
                proptest::array::uniform6(-1.0f64..1.0),
                1e-6f64..0.3,
                1e-6f64..0.3,
                1e-6f64..0.1,
                proptest::option::of(10.0f64..5000.0),
            ),
            1..30,
        )
    ) {
        let start = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        let config = AlignConfig { beta_start: start, gamma_delta_start: start };
        let n = rows.len();
        let dataset = AlignedDataset {
            dates: (0..n as i64).map(|k| start + chrono::Duration::days(k)).collect(),
            mobility: rows.iter().map(|(m, ..)| MobilityVector(*m)).collect(),
            mobility_ma: rows
                .iter()
                .enumerate()
                .map(|(k, (m, ..))| if k >= 4 { Some(MobilityVector(*m)) } else { None })
                .collect(),
            epidemic: rows
                .iter()
                .map(|&(_, i, r, d, _)| {
                    let scale = 0.9 / (i + r + d).max(1.0);
                    let (i, r, d) = (i * scale.min(1.0), r * scale.min(1.0), d * scale.min(1.0));
                    EpidemicState { s: 1.0 - i - r - d, i, r, d }
                })
                .collect(),
            index_close: rows.iter().map(|&(.., close)| close).collect(),
            population: 1_000_000,
            beta_start: start,
            gamma_delta_start: start,
        };

        let text = dataset.to_csv();
        let back = AlignedDataset::from_csv(&text, dataset.population, config).unwrap();
        for k in 0..n {
            prop_assert_eq!(dataset.dates[k], back.dates[k]);
            prop_assert_eq!(
                dataset.mobility[k].0.map(f64::to_bits),
                back.mobility[k].0.map(f64::to_bits)
            );
            prop_assert_eq!(
                dataset.mobility_ma[k].map(|v| v.0.map(f64::to_bits)),
                back.mobility_ma[k].map(|v| v.0.map(f64::to_bits))
            );
            prop_assert_eq!(dataset.epidemic[k].s.to_bits(), back.epidemic[k].s.to_bits());
            prop_assert_eq!(dataset.epidemic[k].i.to_bits(), back.epidemic[k].i.to_bits());
            prop_assert_eq!(
                dataset.index_close[k].map(f64::to_bits),
                back.index_close[k].map(f64::to_bits)
            );
        }
    }

    #[test]
    fn infection_drift_moves_with_positive_coefficients(
        base in proptest::array::uniform6(-0.5f64..0.5),
        bump in 1e-6f64..0.5,
        component in 0usize..6,
    ) {
        // Raising a component with a positive coefficient strictly raises
        // the drift; a negative coefficient strictly lowers it.
        let model = esdf::epidemic::InfectionRegressionModel {
            c0: 0.3,
            c: [-16.9957, 4.4961, -1.4419, 28.5379, 3.7798, 34.698],
        };
        let mut upper = base;
        upper[component] += bump;
        let low = model.drift(&MobilityVector(base));
        let high = model.drift(&MobilityVector(upper));
        if model.c[component] > 0.0 {
            prop_assert!(high > low);
        } else {
            prop_assert!(high < low);
        }
    }
}

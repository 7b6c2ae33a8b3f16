//! The economic value learned from index prices, its prediction under
//! hypothetical controls and states, the target path, and the tracking
//! error.

use serde::{Deserialize, Serialize};

use crate::calibrate::{ols_fit, sample_std, shapiro_wilk, NormalityTestResult, RegressionFit};
use crate::epidemic::EpidemicState;
use crate::error::{Error, Result};
use crate::ingest::AlignedDataset;
use crate::mobility::MobilityVector;

/// Linear proxy for the economic value: intercept, coefficients on the
/// same-day (non-averaged) mobility vector in (RR, GP, PA, TS, WP, RE)
/// order, and coefficients on the I, R, D fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicModel {
    pub kappa0: f64,
    pub kappa: [f64; 6],
    pub kappa_i: f64,
    pub kappa_r: f64,
    pub kappa_d: f64,
}

/// Target path for the economic value: the baseline level and per-step
/// growth rates (an empty path means zero growth at every step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicTarget {
    pub spx0: f64,
    #[serde(default)]
    pub rate_path: Vec<f64>,
}

impl EconomicTarget {
    pub fn new(spx0: f64) -> Self {
        assert!(spx0 > 0.0, "baseline economic value must be positive");
        Self { spx0, rate_path: Vec::new() }
    }

    pub fn with_rates(spx0: f64, rate_path: Vec<f64>) -> Self {
        assert!(spx0 > 0.0, "baseline economic value must be positive");
        Self { spx0, rate_path }
    }

    #[inline]
    pub fn rate_at(&self, step: usize) -> f64 {
        self.rate_path.get(step).copied().unwrap_or(0.0)
    }

    /// Target level at a step: `spx0 * (1 + r_step)`.
    #[inline]
    pub fn level_at(&self, step: usize) -> f64 {
        self.spx0 * (1.0 + self.rate_at(step))
    }

    /// Return deviation of a predicted value from the target rate at a
    /// step: `(value - spx0)/spx0 - r_step`.
    #[inline]
    pub fn deviation(&self, value: f64, step: usize) -> f64 {
        (value - self.spx0) / self.spx0 - self.rate_at(step)
    }
}

#[derive(Debug, Clone)]
pub struct EconomicFit {
    pub model: EconomicModel,
    pub regression: RegressionFit,
    pub residual_normality: NormalityTestResult,
    pub residual_std: f64,
}

/// Ex-post regression of index closes on the raw mobility vector and the
/// I, R, D fractions, over the dates that have a price.
pub fn fit_economic_model(dataset: &AlignedDataset) -> Result<EconomicFit> {
    let mut rows = Vec::new();
    let mut responses = Vec::new();
    for k in 0..dataset.dates.len() {
        let Some(close) = dataset.index_close[k] else { continue };
        let mut row = Vec::with_capacity(9);
        row.extend_from_slice(&dataset.mobility[k].0);
        let e = &dataset.epidemic[k];
        row.extend_from_slice(&[e.i, e.r, e.d]);
        rows.push(row);
        responses.push(close);
    }
    if rows.len() < 15 {
        return Err(Error::NotEnoughData {
            context: "economic regression".into(),
            required: 15,
            got: rows.len(),
        });
    }

    let regression = ols_fit(&rows, &responses, true)?;
    let c = &regression.coefficients;
    let model = EconomicModel {
        kappa0: c[0],
        kappa: [c[1], c[2], c[3], c[4], c[5], c[6]],
        kappa_i: c[7],
        kappa_r: c[8],
        kappa_d: c[9],
    };
    let residual_normality = shapiro_wilk(&regression.residuals)?;
    let residual_std = sample_std(&regression.residuals);
    Ok(EconomicFit {
        model,
        regression,
        residual_normality,
        residual_std,
    })
}

/// Model-predicted economic value for a control and an epidemic state.
#[inline]
pub fn predict_value(model: &EconomicModel, alpha: &MobilityVector, state: &EpidemicState) -> f64 {
    model.kappa0
        + alpha.dot(&model.kappa)
        + model.kappa_i * state.i
        + model.kappa_r * state.r
        + model.kappa_d * state.d
}

/// Root mean square error of returns around the target growth path.
pub fn tracking_error(values: &[f64], target: &EconomicTarget) -> f64 {
    assert!(!values.is_empty(), "tracking error needs at least one value");
    let sum_sq: f64 = values
        .iter()
        .enumerate()
        .map(|(step, &v)| {
            let dev = target.deviation(v, step);
            dev * dev
        })
        .sum();
    (sum_sq / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    const JUN21: EconomicModel = EconomicModel {
        kappa0: 2875.8,
        kappa: [1108.1, -1100.5, -301.0, 1001.4, -179.1, 1195.2],
        kappa_i: 2.772e5,
        kappa_r: 1.957e5,
        kappa_d: -2.217e6,
    };

    #[test]
    fn baseline_prediction_is_the_intercept() {
        let zero_state = EpidemicState { s: 1.0, i: 0.0, r: 0.0, d: 0.0 };
        let value = predict_value(&JUN21, &MobilityVector::ZERO, &zero_state);
        assert_eq!(value, 2875.8);
    }

    #[test]
    fn prediction_matches_dot_product_oracle() {
        // School & workplace closure mobility with a small epidemic.
        let alpha = MobilityVector([-0.3, -0.07, 0.06, -0.42, -0.4, 0.15]);
        let state = EpidemicState { s: 1.0 - 0.01 - 0.005 - 0.0004, i: 0.01, r: 0.005, d: 0.0004 };
        let by_hand = 2875.8
            + (1108.1 * -0.3)
            + (-1100.5 * -0.07)
            + (-301.0 * 0.06)
            + (1001.4 * -0.42)
            + (-179.1 * -0.4)
            + (1195.2 * 0.15)
            + 2.772e5 * 0.01
            + 1.957e5 * 0.005
            + (-2.217e6) * 0.0004;
        assert!((predict_value(&JUN21, &alpha, &state) - by_hand).abs() < 1e-9);
    }

    #[test]
    fn prediction_is_linear_in_the_control() {
        let state = EpidemicState { s: 0.98, i: 0.01, r: 0.008, d: 0.002 };
        let a1 = MobilityVector([0.1, -0.05, 0.0, 0.2, -0.1, 0.02]);
        let a2 = MobilityVector([-0.2, 0.1, 0.05, -0.1, 0.3, -0.04]);
        let base = predict_value(&JUN21, &MobilityVector::ZERO, &state);
        let joint = predict_value(&JUN21, &(a1 + a2), &state) - base;
        let parts = (predict_value(&JUN21, &a1, &state) - base)
            + (predict_value(&JUN21, &a2, &state) - base);
        assert!((joint - parts).abs() < 1e-9);
    }

    #[test]
    fn finite_difference_slopes_equal_coefficients() {
        let state = EpidemicState { s: 0.98, i: 0.01, r: 0.008, d: 0.002 };
        let h = 1e-6;
        for k in 0..6 {
            let mut up = [0.0; 6];
            up[k] = h;
            let mut dn = [0.0; 6];
            dn[k] = -h;
            let slope = (predict_value(&JUN21, &MobilityVector(up), &state)
                - predict_value(&JUN21, &MobilityVector(dn), &state))
                / (2.0 * h);
            assert!((slope - JUN21.kappa[k]).abs() < 1e-4);
        }
    }

    #[test]
    fn tracking_error_hand_values() {
        let target = EconomicTarget::new(1000.0);
        assert_eq!(tracking_error(&[1000.0, 1000.0, 1000.0], &target), 0.0);
        assert!((tracking_error(&[1010.0], &target) - 0.01).abs() < 1e-15);
        let values = [1010.0, 990.0, 1020.0];
        let want = (0.0006f64 / 3.0).sqrt();
        assert!((tracking_error(&values, &target) - want).abs() < 1e-12);
    }

    #[test]
    fn tracking_error_is_permutation_invariant_and_scales() {
        let target = EconomicTarget::new(500.0);
        let values = [510.0, 480.0, 530.0, 501.5];
        let permuted = [501.5, 530.0, 510.0, 480.0];
        assert!((tracking_error(&values, &target) - tracking_error(&permuted, &target)).abs() < 1e-15);

        // Scaling every deviation by k scales the TE by k.
        let k = 2.5;
        let scaled: Vec<f64> = values.iter().map(|v| 500.0 + k * (v - 500.0)).collect();
        assert!(
            (tracking_error(&scaled, &target) - k * tracking_error(&values, &target)).abs() < 1e-12
        );
    }

    #[test]
    fn economic_fit_recovers_noiseless_generator() {
        let dataset = synthetic::dataset(synthetic::Options {
            n_days: 90,
            seed: 12,
            econ: JUN21,
            econ_noise: 0.0,
            ..Default::default()
        });
        let fit = fit_economic_model(&dataset).unwrap();
        let m = fit.model;
        assert!((m.kappa0 - JUN21.kappa0).abs() / JUN21.kappa0.abs() < 1e-6);
        for k in 0..6 {
            assert!((m.kappa[k] - JUN21.kappa[k]).abs() / JUN21.kappa[k].abs() < 1e-6);
        }
        for (got, want) in [
            (m.kappa_i, JUN21.kappa_i),
            (m.kappa_r, JUN21.kappa_r),
            (m.kappa_d, JUN21.kappa_d),
        ] {
            assert!((got - want).abs() / want.abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn missing_prices_fail_the_fit() {
        let dataset = synthetic::dataset(synthetic::Options {
            n_days: 60,
            include_prices: false,
            ..Default::default()
        });
        assert!(matches!(
            fit_economic_model(&dataset),
            Err(Error::NotEnoughData { .. })
        ));
    }
}

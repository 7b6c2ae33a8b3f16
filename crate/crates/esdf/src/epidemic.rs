//! Discrete-time SIRD recursion with sigmoid-linked stochastic log-odds.
//!
//! The compartment fractions evolve daily under three rates, each the
//! sigmoid of a log-odds value: infection responds to the trailing 5-day
//! mean of the mobility indices through a linear model, while recovery and
//! death log-odds follow geometric relative-increment dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EpidemicTimeSeries;
use crate::mobility::MobilityVector;

/// Fractions of the population in each compartment; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
    pub d: f64,
}

impl EpidemicState {
    pub fn new(s: f64, i: f64, r: f64, d: f64) -> Result<Self> {
        let state = Self { s, i, r, d };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("s", self.s), ("i", self.i), ("r", self.r), ("d", self.d)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    context: format!("epidemic state component {name}"),
                    value: v,
                    range: "[0, 1]".into(),
                });
            }
        }
        let sum = self.s + self.i + self.r + self.d;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange {
                context: "epidemic state sum".into(),
                value: sum,
                range: "1 +/- 1e-12".into(),
            });
        }
        Ok(())
    }

    /// Cumulative confirmed fraction C = I + R + D.
    #[inline]
    pub fn confirmed(&self) -> f64 {
        self.i + self.r + self.d
    }
}

/// Log-odds of infection, recovery, and death.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOddsTriple {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Drift/volatility of the recovery and death relative-increment models
/// plus the residual standard deviation of the infection regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOddsDynamicsParams {
    pub mu_gamma: f64,
    pub sigma_gamma: f64,
    pub mu_delta: f64,
    pub sigma_delta: f64,
    pub sigma_beta: f64,
}

/// Linear model for the infection log-odds: intercept plus coefficients on
/// the 5-day moving-average mobility indices, in (RR, GP, PA, TS, WP, RE)
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfectionRegressionModel {
    pub c0: f64,
    pub c: [f64; 6],
}

impl InfectionRegressionModel {
    /// Deterministic drift of the next infection log-odds.
    #[inline]
    pub fn drift(&self, mobility_ma: &MobilityVector) -> f64 {
        self.c0 + mobility_ma.dot(&self.c)
    }
}

/// Independent standard normal deviates driving one daily transition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseVector {
    pub z_beta: f64,
    pub z_gamma: f64,
    pub z_delta: f64,
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::LogitDomain { value: p });
    }
    Ok((p / (1.0 - p)).ln())
}

/// One day of the SIRD recursion under the given next-period log-odds.
///
/// A negative infectious fraction is clamped to zero, with the surplus
/// absorbed into S so the compartments keep summing to one.
pub fn sird_step(state: &EpidemicState, next_log_odds: &LogOddsTriple) -> EpidemicState {
    let rate_infect = sigmoid(next_log_odds.beta);
    let rate_recover = sigmoid(next_log_odds.gamma);
    let rate_death = sigmoid(next_log_odds.delta);

    let i_raw = state.i * (1.0 + state.s * rate_infect - rate_recover - rate_death);
    let i = i_raw.max(0.0);
    let r = state.r + state.i * rate_recover;
    let d = state.d + state.i * rate_death;
    let s = 1.0 - i - r - d;
    EpidemicState { s, i, r, d }
}

/// Which log-odds component a clamp fired on during extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateComponent {
    Infection,
    Recovery,
    Death,
}

impl std::fmt::Display for RateComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateComponent::Infection => write!(f, "infection"),
            RateComponent::Recovery => write!(f, "recovery"),
            RateComponent::Death => write!(f, "death"),
        }
    }
}

/// Record of a rate argument pushed back into `[eps, 1 - eps]` before the
/// logit; the raw value is kept for diagnostics.
#[derive(Debug, Clone)]
pub struct ClampEvent {
    /// Index of the produced triple (transition into date `index + 1`).
    pub index: usize,
    pub date: chrono::NaiveDate,
    pub component: RateComponent,
    pub raw_argument: f64,
}

/// Historical log-odds extracted by inverting the SIRD recursion.
#[derive(Debug, Clone)]
pub struct LogOddsExtraction {
    /// `triples[t]` holds the log-odds of the transition from date `t` to
    /// date `t + 1`; length is one less than the series.
    pub triples: Vec<LogOddsTriple>,
    pub clamp_events: Vec<ClampEvent>,
}

/// Inverts the recursion on an observed series: daily increments of the
/// confirmed, recovered, and deceased fractions become rate arguments,
/// clamped into `[clamp_eps, 1 - clamp_eps]` before the logit.
pub fn extract_log_odds(series: &EpidemicTimeSeries, clamp_eps: f64) -> Result<LogOddsExtraction> {
    let states = &series.states;
    if states.len() < 2 {
        return Err(Error::NotEnoughData {
            context: "log-odds extraction".into(),
            required: 2,
            got: states.len(),
        });
    }

    let mut triples = Vec::with_capacity(states.len() - 1);
    let mut clamp_events = Vec::new();

    for t in 0..states.len() - 1 {
        let cur = &states[t];
        let next = &states[t + 1];
        if cur.i <= 0.0 {
            return Err(Error::ZeroInfectious {
                date: series.dates[t].to_string(),
            });
        }

        let confirmed = cur.confirmed();
        let mut clamp = |raw: f64, component: RateComponent| -> f64 {
            let arg = if raw.is_finite() { raw } else { clamp_eps };
            let clamped = arg.clamp(clamp_eps, 1.0 - clamp_eps);
            if clamped != raw {
                clamp_events.push(ClampEvent {
                    index: t,
                    date: series.dates[t + 1],
                    component,
                    raw_argument: raw,
                });
            }
            clamped
        };

        let infect_arg = clamp(
            (next.confirmed() - confirmed) / (cur.i * (1.0 - confirmed)),
            RateComponent::Infection,
        );
        let recover_arg = clamp((next.r - cur.r) / cur.i, RateComponent::Recovery);
        let death_arg = clamp((next.d - cur.d) / cur.i, RateComponent::Death);

        triples.push(LogOddsTriple {
            beta: logit(infect_arg)?,
            gamma: logit(recover_arg)?,
            delta: logit(death_arg)?,
        });
    }

    Ok(LogOddsExtraction {
        triples,
        clamp_events,
    })
}

/// Draws the next log-odds triple: the infection log-odds is linear in the
/// moving-average mobility with Gaussian noise, while recovery and death
/// log-odds move by relative increments.
pub fn sample_next_log_odds(
    prev: &LogOddsTriple,
    mobility_ma: &MobilityVector,
    model: &InfectionRegressionModel,
    params: &LogOddsDynamicsParams,
    noise: &NoiseVector,
) -> LogOddsTriple {
    LogOddsTriple {
        beta: model.drift(mobility_ma) + params.sigma_beta * noise.z_beta,
        gamma: prev.gamma * (1.0 + params.mu_gamma + params.sigma_gamma * noise.z_gamma),
        delta: prev.delta * (1.0 + params.mu_delta + params.sigma_delta * noise.z_delta),
    }
}

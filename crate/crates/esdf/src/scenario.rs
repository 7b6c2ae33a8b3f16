//! Monte Carlo scenario engine: long-horizon simulation of the calibrated
//! model under a fixed mobility vector, summarised by per-day quantile
//! curves of the I, R, D compartments.

use serde::{Deserialize, Serialize};

use crate::epidemic::{
    sample_next_log_odds, sird_step, EpidemicState, InfectionRegressionModel,
    LogOddsDynamicsParams, LogOddsTriple, NoiseVector,
};
use crate::error::{Error, Result};
use crate::mobility::MobilityVector;
use crate::parallel::map_chunks;
use crate::rng::{streams, StreamRng};

/// Median mobility presets for the studied response periods: baseline,
/// alert announcements, school closures, school & workplace closures.
pub fn preset_mobility(name: &str) -> Result<MobilityVector> {
    match name {
        "baseline" => Ok(MobilityVector::ZERO),
        "alerts" => Ok(MobilityVector([0.07, 0.02, 0.12, 0.02, 0.02, -0.01])),
        "school" => Ok(MobilityVector([0.055, 0.09, 0.15, -0.045, -0.015, 0.01])),
        "school_work" => Ok(MobilityVector([-0.3, -0.07, 0.06, -0.42, -0.4, 0.15])),
        other => Err(Error::UnknownPreset { name: other.into() }),
    }
}

pub const PRESET_NAMES: [&str; 4] = ["baseline", "alerts", "school", "school_work"];

/// A fixed-mobility Monte Carlo scenario. The mobility vector is held
/// constant, so the 5-day mean equals it from day one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub fixed_mobility: MobilityVector,
    pub horizon_days: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub initial_state: EpidemicState,
    pub initial_log_odds: LogOddsTriple,
    pub infection: InfectionRegressionModel,
    pub dynamics: LogOddsDynamicsParams,
}

/// Day-major sample matrices: `i[day][path]`, days counted from 1.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub horizon_days: usize,
    pub n_paths: usize,
    pub i: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

/// Simulates `n_paths` independent trajectories with counter-based
/// per-path generators; identical for any thread count.
pub fn simulate(spec: &ScenarioSpec, threads: usize) -> Ensemble {
    assert!(spec.horizon_days >= 1 && spec.n_paths >= 1);
    let days = spec.horizon_days;

    // Path-major simulation in chunks, then a day-major transpose.
    let chunks = map_chunks(spec.n_paths, threads, |range| {
        let mut block = Vec::with_capacity(range.len());
        for path in range {
            let mut rng = StreamRng::new(spec.seed, streams::SCENARIO + path as u64);
            let mut state = spec.initial_state;
            let mut odds = spec.initial_log_odds;
            let mut track = Vec::with_capacity(days);
            for _ in 0..days {
                let noise = NoiseVector {
                    z_beta: rng.next_normal(),
                    z_gamma: rng.next_normal(),
                    z_delta: rng.next_normal(),
                };
                odds = sample_next_log_odds(
                    &odds,
                    &spec.fixed_mobility,
                    &spec.infection,
                    &spec.dynamics,
                    &noise,
                );
                state = sird_step(&state, &odds);
                track.push([state.i, state.r, state.d]);
            }
            block.push(track);
        }
        block
    });

    let mut ensemble = Ensemble {
        horizon_days: days,
        n_paths: spec.n_paths,
        i: vec![Vec::with_capacity(spec.n_paths); days],
        r: vec![Vec::with_capacity(spec.n_paths); days],
        d: vec![Vec::with_capacity(spec.n_paths); days],
    };
    for block in chunks {
        for track in block {
            for (day, [i, r, d]) in track.into_iter().enumerate() {
                ensemble.i[day].push(i);
                ensemble.r[day].push(r);
                ensemble.d[day].push(d);
            }
        }
    }
    ensemble
}

/// Per-day empirical quantiles per compartment, linear-interpolation
/// convention on the order statistics. `curves.i[q][day]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileCurves {
    pub probabilities: Vec<f64>,
    pub i: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let position = (n - 1) as f64 * p;
    let lo = position.floor() as usize;
    let frac = position - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

pub fn quantile_curves(ensemble: &Ensemble, probabilities: &[f64]) -> Result<QuantileCurves> {
    if ensemble.n_paths == 0 || ensemble.i.is_empty() {
        return Err(Error::NotEnoughData {
            context: "quantile curves".into(),
            required: 1,
            got: 0,
        });
    }
    for &p in probabilities {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile probability {p} outside (0, 1)"
            )));
        }
    }

    let per_compartment = |samples: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut curves = vec![Vec::with_capacity(samples.len()); probabilities.len()];
        for day_values in samples {
            let mut sorted = day_values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (qi, &p) in probabilities.iter().enumerate() {
                curves[qi].push(quantile_sorted(&sorted, p));
            }
        }
        curves
    };

    Ok(QuantileCurves {
        probabilities: probabilities.to_vec(),
        i: per_compartment(&ensemble.i),
        r: per_compartment(&ensemble.r),
        d: per_compartment(&ensemble.d),
    })
}

impl Ensemble {
    /// Full per-path dump: `day,path,i,r,d`. Off by default in the CLI;
    /// summaries are the normal artifact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("day,path,i,r,d\n");
        for day in 0..self.horizon_days {
            for path in 0..self.n_paths {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    day + 1,
                    path,
                    crate::ingest::format_f64(self.i[day][path]),
                    crate::ingest::format_f64(self.r[day][path]),
                    crate::ingest::format_f64(self.d[day][path]),
                ));
            }
        }
        out
    }
}

impl QuantileCurves {
    /// Summary CSV: `day,i_q45,...,r_q45,...,d_q55` with one row per day
    /// starting at day 1.
    pub fn to_csv(&self) -> String {
        let label = |p: f64| {
            let v = p * 100.0;
            if (v - v.round()).abs() < 1e-9 {
                format!("{}", v.round() as i64)
            } else {
                crate::ingest::format_f64(v).replace('.', "_")
            }
        };
        let mut header = String::from("day");
        for compartment in ["i", "r", "d"] {
            for &p in &self.probabilities {
                header.push_str(&format!(",{compartment}_q{}", label(p)));
            }
        }
        header.push('\n');

        let days = self.i.first().map_or(0, Vec::len);
        let mut out = header;
        for day in 0..days {
            out.push_str(&(day + 1).to_string());
            for curves in [&self.i, &self.r, &self.d] {
                for q in curves {
                    out.push(',');
                    out.push_str(&crate::ingest::format_f64(q[day]));
                }
            }
            out.push('\n');
        }
        out
    }
}

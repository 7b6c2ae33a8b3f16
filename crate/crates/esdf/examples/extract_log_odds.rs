//! Inverting the SIRD recursion: extract daily log-odds from an observed
//! series, then replay them to reproduce it.
//!
//! ```sh
//! cargo run --example extract_log_odds
//! ```

use esdf::epidemic::{
    extract_log_odds, sample_next_log_odds, sigmoid, sird_step, EpidemicState,
    InfectionRegressionModel, LogOddsDynamicsParams, LogOddsTriple, NoiseVector,
};
use esdf::ingest::EpidemicTimeSeries;
use esdf::mobility::MobilityVector;
use esdf::rng::StreamRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Forward-simulate sixty noisy days.
    let model = InfectionRegressionModel { c0: -2.2, c: [0.5, -0.2, 0.1, 1.0, 0.3, -0.4] };
    let params = LogOddsDynamicsParams {
        mu_gamma: 0.0176,
        sigma_gamma: 0.02,
        mu_delta: 0.0061,
        sigma_delta: 0.01,
        sigma_beta: 0.51,
    };
    let mut rng = StreamRng::new(7, 0);
    let mut states = vec![EpidemicState { s: 0.95, i: 0.03, r: 0.015, d: 0.005 }];
    let mut odds = LogOddsTriple { beta: -2.0, gamma: -3.0, delta: -6.0 };
    for _ in 0..60 {
        let noise = NoiseVector {
            z_beta: rng.next_normal(),
            z_gamma: rng.next_normal(),
            z_delta: rng.next_normal(),
        };
        odds = sample_next_log_odds(&odds, &MobilityVector::ZERO, &model, &params, &noise);
        states.push(sird_step(states.last().unwrap(), &odds));
    }

    let start = chrono::NaiveDate::from_ymd_opt(2020, 6, 22).unwrap();
    let series = EpidemicTimeSeries {
        dates: (0..states.len() as i64).map(|k| start + chrono::Duration::days(k)).collect(),
        states: states.clone(),
        population: 10_000_000,
    };

    let extraction = extract_log_odds(&series, 1e-8)?;
    println!("extracted {} daily log-odds triples ({} clamp events)",
        extraction.triples.len(), extraction.clamp_events.len());
    println!("\n  day  beta      gamma     delta    infection rate");
    for (t, triple) in extraction.triples.iter().enumerate().step_by(10) {
        println!(
            "  {t:>3}  {:+.4}  {:+.4}  {:+.4}   {:.4}",
            triple.beta, triple.gamma, triple.delta, sigmoid(triple.beta)
        );
    }

    // Replaying the extracted log-odds reproduces the input series.
    let mut replay = states[0];
    let mut worst: f64 = 0.0;
    for (k, triple) in extraction.triples.iter().enumerate() {
        replay = sird_step(&replay, triple);
        worst = worst
            .max((replay.i - states[k + 1].i).abs())
            .max((replay.r - states[k + 1].r).abs())
            .max((replay.d - states[k + 1].d).abs());
    }
    println!("\nround-trip worst absolute error: {worst:.2e}");
    Ok(())
}

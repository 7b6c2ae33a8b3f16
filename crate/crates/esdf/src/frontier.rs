//! Efficient social-distancing frontier: the lambda sweep, the
//! (tracking error, infection rate) coordinates, efficiency ratios against
//! the frontier, and the recommended-policy search.

use serde::{Deserialize, Serialize};

use crate::control::{ConstantControl, ControlPolicy, ProblemSpec};
use crate::epidemic::{sigmoid, NoiseVector};
use crate::error::{Error, Result};
use crate::mobility::MobilityVector;
use crate::parallel::map_chunks;
use crate::rng::streams;
use crate::solver::{
    cross_validate_penalties, sample_noise_paths, train, NetworkLayout, PenaltySelection,
    PolicyStack, TrainConfig,
};

/// Sigmoid of the mean log-odds over one horizon path.
pub fn aggregated_infection_rate(beta_path: &[f64]) -> f64 {
    assert!(!beta_path.is_empty(), "empty log-odds path");
    sigmoid(beta_path.iter().sum::<f64>() / beta_path.len() as f64)
}

/// Coordinates of a policy on a common evaluation batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    /// RMSE of return deviations pooled over every path-day.
    pub tracking_error: f64,
    /// Mean over paths of the per-path aggregated infection rate.
    pub infection_rate: f64,
    /// Per-step mean control over the evaluation paths.
    pub mean_controls: Vec<MobilityVector>,
}

/// Rolls the policy over every evaluation path and pools the coordinates.
pub fn evaluate_policy(
    policy: &dyn ControlPolicy,
    spec: &ProblemSpec,
    eval_paths: &[Vec<NoiseVector>],
    threads: usize,
) -> PolicyEvaluation {
    let h = spec.cost.horizon;
    let n = eval_paths.len();
    assert!(n > 0, "empty evaluation batch");

    struct Partial {
        sq_dev: f64,
        rate_sum: f64,
        control_sums: Vec<[f64; 6]>,
    }

    let partials = map_chunks(n, threads, |range| {
        let mut acc = Partial { sq_dev: 0.0, rate_sum: 0.0, control_sums: vec![[0.0; 6]; h] };
        for p in range {
            let roll = crate::control::rollout(&spec.initial_state, policy, &eval_paths[p], spec);
            for (step, &value) in roll.econ_values.iter().enumerate() {
                let dev = spec.cost.target.deviation(value, step);
                acc.sq_dev += dev * dev;
            }
            acc.rate_sum += aggregated_infection_rate(&roll.betas);
            for (step, alpha) in roll.controls.iter().enumerate() {
                for k in 0..6 {
                    acc.control_sums[step][k] += alpha.0[k];
                }
            }
        }
        acc
    });

    let mut sq_dev = 0.0;
    let mut rate_sum = 0.0;
    let mut control_sums = vec![[0.0; 6]; h];
    for part in partials {
        sq_dev += part.sq_dev;
        rate_sum += part.rate_sum;
        for step in 0..h {
            for k in 0..6 {
                control_sums[step][k] += part.control_sums[step][k];
            }
        }
    }
    PolicyEvaluation {
        tracking_error: (sq_dev / (n * h) as f64).sqrt(),
        infection_rate: rate_sum / n as f64,
        mean_controls: control_sums
            .into_iter()
            .map(|sums| MobilityVector(sums.map(|v| v / n as f64)))
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub tracking_error: f64,
    pub infection_rate: f64,
    pub mean_controls: Vec<MobilityVector>,
    /// Another point achieves strictly lower TE and infection rate;
    /// dominated points are kept so training noise stays visible.
    pub dominated: bool,
    pub policy: PolicyStack,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frontier {
    /// Sorted by lambda ascending.
    pub points: Vec<FrontierPoint>,
    pub eval_seed: u64,
    pub n_eval_paths: usize,
}

impl Frontier {
    pub fn new(
        mut points: Vec<FrontierPoint>,
        eval_seed: u64,
        n_eval_paths: usize,
        allow_single_point: bool,
    ) -> Result<Self> {
        if points.len() < 2 && !allow_single_point {
            return Err(Error::DegenerateFrontier { got: points.len() });
        }
        points.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
        for pair in points.windows(2) {
            if pair[1].lambda <= pair[0].lambda {
                return Err(Error::InvalidArgument(format!(
                    "lambda grid values must be strictly increasing, got {} then {}",
                    pair[0].lambda, pair[1].lambda
                )));
            }
        }
        for j in 0..points.len() {
            points[j].dominated = (0..points.len()).any(|k| {
                k != j
                    && points[k].tracking_error < points[j].tracking_error
                    && points[k].infection_rate < points[j].infection_rate
            });
        }
        Ok(Self { points, eval_seed, n_eval_paths })
    }

    /// Non-dominated vertices sorted by tracking error, the curve that ER
    /// and the recommendation interpolate.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        let mut vertices: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| !p.dominated)
            .map(|p| (p.tracking_error, p.infection_rate))
            .collect();
        vertices.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        vertices
    }

    /// CSV export: `lambda,te,infection_rate,dominated_flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,te,infection_rate,dominated_flag\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::ingest::format_f64(p.lambda),
                crate::ingest::format_f64(p.tracking_error),
                crate::ingest::format_f64(p.infection_rate),
                u8::from(p.dominated)
            ));
        }
        out
    }

    /// CSV export of per-step mean controls: `lambda,step,rr,...,re`.
    pub fn mean_controls_csv(&self) -> String {
        let mut out = String::from("lambda,step,rr,gp,pa,ts,wp,re\n");
        for p in &self.points {
            for (step, alpha) in p.mean_controls.iter().enumerate() {
                out.push_str(&crate::ingest::format_f64(p.lambda));
                out.push_str(&format!(",{step}"));
                for v in alpha.0 {
                    out.push(',');
                    out.push_str(&crate::ingest::format_f64(v));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Twelve log-spaced weights spanning [0.001, 0.1].
pub fn default_lambda_grid() -> Vec<f64> {
    log_spaced_grid(1e-3, 1e-1, 12)
}

pub fn log_spaced_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|k| lo * (step * k as f64).exp()).collect()
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub lambda_grid: Vec<f64>,
    pub layout: NetworkLayout,
    pub train: TrainConfig,
    pub eval_seed: u64,
    pub n_eval_paths: usize,
    /// Candidate penalty scales for the shared cross-validation; empty
    /// means keep the template's penalty weights as they are.
    pub penalty_candidates: Vec<f64>,
    pub n_validation_paths: usize,
    pub allow_single_point: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda_grid: default_lambda_grid(),
            layout: NetworkLayout::default(),
            train: TrainConfig::default(),
            eval_seed: 1,
            n_eval_paths: 512,
            penalty_candidates: vec![1.0, 10.0, 100.0, 1000.0],
            n_validation_paths: 256,
            allow_single_point: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub frontier: Frontier,
    /// Per-lambda training failures; the sweep continues past them.
    pub failures: Vec<(f64, String)>,
    pub penalty: Option<PenaltySelection>,
}

/// Trains one policy per lambda (penalty weights shared from a single
/// cross-validation at the smallest lambda), evaluates all of them on a
/// common evaluation batch, and assembles the frontier.
pub fn sweep_lambda(spec_template: &ProblemSpec, config: &SweepConfig) -> Result<SweepOutcome> {
    if config.lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }

    let mut template = spec_template.clone();
    let penalty = if config.penalty_candidates.is_empty() {
        None
    } else {
        // Cross-validate once at the smallest lambda, where the
        // public-health term pushes controls hardest against the bounds.
        let mut cv_spec = template.clone();
        cv_spec.cost.lambda = *config
            .lambda_grid
            .first()
            .expect("non-empty grid");
        let selection = cross_validate_penalties(
            &cv_spec,
            &config.penalty_candidates,
            config.layout,
            &config.train,
            config.n_validation_paths,
        )?;
        template.cost.penalty_weights = selection.weights;
        Some(selection)
    };

    let eval_paths = sample_noise_paths(
        config.eval_seed,
        streams::EVALUATION,
        config.n_eval_paths,
        template.cost.horizon,
    );

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for &lambda in &config.lambda_grid {
        let mut spec = template.clone();
        spec.cost.lambda = lambda;
        match train(&spec, config.layout, &config.train) {
            Ok(result) => {
                let eval = evaluate_policy(&result.stack, &spec, &eval_paths, config.train.threads);
                points.push(FrontierPoint {
                    lambda,
                    tracking_error: eval.tracking_error,
                    infection_rate: eval.infection_rate,
                    mean_controls: eval.mean_controls,
                    dominated: false,
                    policy: result.stack,
                });
            }
            Err(err) => failures.push((lambda, err.to_string())),
        }
    }

    let frontier = Frontier::new(
        points,
        config.eval_seed,
        config.n_eval_paths,
        config.allow_single_point,
    )?;
    Ok(SweepOutcome { frontier, failures, penalty })
}

/// Efficiency of a feasible point against a frontier: the ratio of the
/// public-economic risk areas of the benchmarking frontier point (where
/// the ray from the origin through the point crosses the curve) and of
/// the point itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub point_te: f64,
    pub point_rate: f64,
    pub benchmark_te: f64,
    pub benchmark_rate: f64,
    pub pera: f64,
    pub bepera: f64,
    pub efficiency_ratio: f64,
}

/// Intersects the ray `{(k*te, k*rate) : k > 0}` with the piecewise-linear
/// frontier curve and forms `ER = (te* x rate*) / (te x rate)`.
pub fn efficiency_ratio(te: f64, rate: f64, frontier: &Frontier) -> Result<EfficiencyReport> {
    if !(te > 0.0) || !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "efficiency needs te > 0 and rate in (0,1), got ({te}, {rate})"
        )));
    }
    let curve = frontier.curve();
    if curve.is_empty() {
        return Err(Error::DegenerateFrontier { got: 0 });
    }

    let report = |bench_te: f64, bench_rate: f64| EfficiencyReport {
        point_te: te,
        point_rate: rate,
        benchmark_te: bench_te,
        benchmark_rate: bench_rate,
        pera: te * rate,
        bepera: bench_te * bench_rate,
        efficiency_ratio: (bench_te * bench_rate) / (te * rate),
    };

    // A vertex lying exactly on the ray is the intersection; this keeps
    // self-benchmarks and exact multiples free of interpolation error.
    let mut vertex_hit: Option<(f64, f64, f64)> = None; // (k, te*, rate*)
    for &(x, y) in &curve {
        if rate * x == te * y {
            let k = x / te;
            if k > 0.0 && vertex_hit.map_or(true, |(best, _, _)| k < best) {
                vertex_hit = Some((k, x, y));
            }
        }
    }
    if let Some((_, x, y)) = vertex_hit {
        return Ok(report(x, y));
    }

    // Otherwise solve the linear intersection on each segment.
    let span = curve.last().unwrap().0 - curve.first().unwrap().0;
    let tol = 1e-12 * span.max(1e-300);
    let mut best: Option<(f64, f64, f64)> = None;
    for pair in curve.windows(2) {
        let (x1, y1) = pair[0];
        let (x2, y2) = pair[1];
        if x2 <= x1 {
            continue;
        }
        let slope = (y2 - y1) / (x2 - x1);
        let denom = rate - slope * te;
        if denom == 0.0 {
            continue;
        }
        let k = (y1 - slope * x1) / denom;
        if k <= 0.0 {
            continue;
        }
        let cross_te = k * te;
        if cross_te + tol < x1 || cross_te - tol > x2 {
            continue;
        }
        if best.map_or(true, |(kb, _, _)| k < kb) {
            best = Some((k, cross_te, y1 + slope * (cross_te - x1)));
        }
    }

    match best {
        Some((_, bench_te, bench_rate)) => Ok(report(bench_te, bench_rate)),
        None => Err(Error::NoRayIntersection),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Recommendation {
    pub lambda: f64,
    pub tracking_error: f64,
    pub infection_rate: f64,
    pub mean_controls: Vec<MobilityVector>,
    /// TE and rate of holding the reference mobility fixed over the
    /// horizon.
    pub fixed_te: f64,
    pub fixed_rate: f64,
    /// |TE(lambda) - fixed TE| actually achieved.
    pub te_residual: f64,
    /// Number of bisection retrainings spent.
    pub retrained: usize,
    pub policy: PolicyStack,
}

/// Matches the tracking error of holding the given mobility fixed: picks
/// the lambda whose frontier TE equals it, retraining at log-midpoint
/// iterates between the bracketing grid points up to `max_retrain`
/// rounds, and returns the efficient policy at that lambda.
pub fn recommend_esdp(
    last_friday_alpha: &MobilityVector,
    spec_template: &ProblemSpec,
    frontier: &Frontier,
    layout: NetworkLayout,
    train_config: &TrainConfig,
    max_retrain: usize,
) -> Result<Recommendation> {
    let eval_paths = sample_noise_paths(
        frontier.eval_seed,
        streams::EVALUATION,
        frontier.n_eval_paths,
        spec_template.cost.horizon,
    );
    let fixed = evaluate_policy(
        &ConstantControl(*last_friday_alpha),
        spec_template,
        &eval_paths,
        train_config.threads,
    );
    let te_target = fixed.tracking_error;

    let curve = frontier.curve();
    let (lo, hi) = (curve.first().unwrap().0, curve.last().unwrap().0);
    if te_target < lo || te_target > hi {
        return Err(Error::TeOutsideSpan { te: te_target, lo, hi });
    }

    let recommendation = |point: &FrontierPoint, retrained: usize| Recommendation {
        lambda: point.lambda,
        tracking_error: point.tracking_error,
        infection_rate: point.infection_rate,
        mean_controls: point.mean_controls.clone(),
        fixed_te: fixed.tracking_error,
        fixed_rate: fixed.infection_rate,
        te_residual: (point.tracking_error - te_target).abs(),
        retrained,
        policy: point.policy.clone(),
    };

    // A grid point already matching the target needs no retraining.
    if let Some(point) = frontier.points.iter().find(|p| {
        (p.tracking_error - te_target).abs() <= 1e-12 * te_target.max(1.0)
    }) {
        return Ok(recommendation(point, 0));
    }

    // Bracket the target TE between adjacent grid lambdas.
    let mut bracket: Option<(usize, usize)> = None;
    for j in 0..frontier.points.len().saturating_sub(1) {
        let a = frontier.points[j].tracking_error - te_target;
        let b = frontier.points[j + 1].tracking_error - te_target;
        if a * b <= 0.0 {
            bracket = Some((j, j + 1));
            break;
        }
    }

    let mut best: Option<Recommendation> = None;
    let mut consider = |candidate: Recommendation| {
        if best
            .as_ref()
            .map_or(true, |cur| candidate.te_residual < cur.te_residual)
        {
            best = Some(candidate);
        }
    };
    for point in &frontier.points {
        consider(recommendation(point, 0));
    }

    if let Some((j, k)) = bracket {
        let mut lambda_lo = frontier.points[j].lambda;
        let mut te_lo = frontier.points[j].tracking_error;
        let mut lambda_hi = frontier.points[k].lambda;
        let mut retrained = 0;
        while retrained < max_retrain {
            // Geometric midpoint suits the log-spaced grid.
            let lambda_mid = ((lambda_lo.ln() + lambda_hi.ln()) / 2.0).exp();
            let mut spec = spec_template.clone();
            spec.cost.lambda = lambda_mid;
            let trained = train(&spec, layout, train_config)?;
            retrained += 1;
            let eval = evaluate_policy(&trained.stack, &spec, &eval_paths, train_config.threads);
            let point = FrontierPoint {
                lambda: lambda_mid,
                tracking_error: eval.tracking_error,
                infection_rate: eval.infection_rate,
                mean_controls: eval.mean_controls,
                dominated: false,
                policy: trained.stack,
            };
            consider(recommendation(&point, retrained));
            // TE decreases in lambda along the frontier: keep the side
            // that still brackets the target.
            if (te_lo - te_target) * (eval.tracking_error - te_target) <= 0.0 {
                lambda_hi = lambda_mid;
            } else {
                lambda_lo = lambda_mid;
                te_lo = eval.tracking_error;
            }
        }
    }

    Ok(best.expect("at least the grid points were considered"))
}

//! Command-line pipeline: calibrate from CSVs, simulate scenarios, train
//! policies, sweep the frontier, benchmark efficiency, and recommend a
//! policy. Human-readable tables go to stdout, machine artifacts to files,
//! and every run writes a manifest.

use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::calibrate;
use crate::control::{ControlState, CostConfig, ProblemSpec};
use crate::econ::{predict_value, EconomicTarget};
use crate::error::{Error, Result};
use crate::frontier::{
    efficiency_ratio, evaluate_policy, recommend_esdp, sweep_lambda, Frontier, SweepConfig,
};
use crate::ingest::{self, AlignConfig, MobilityUnits};
use crate::mobility::MobilityVector;
use crate::scenario::{preset_mobility, quantile_curves, simulate, ScenarioSpec, PRESET_NAMES};
use crate::solver::{train, NetworkLayout, TrainConfig};

#[derive(Parser, Debug)]
#[command(
    name = "esdf",
    version,
    about = "Calibrate a mobility-controlled epidemic model and compute efficient social-distancing frontiers"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the epidemic, economic, and feasible-set models from CSVs.
    Calibrate(CalibrateArgs),
    /// Monte Carlo scenario under a fixed mobility vector.
    Simulate(SimulateArgs),
    /// Train one policy stack at a fixed lambda.
    Solve(SolveArgs),
    /// Sweep lambda and assemble the efficient frontier.
    Frontier(FrontierArgs),
    /// Efficiency ratio of a point or mobility vector against a frontier.
    Efficiency(EfficiencyArgs),
    /// Efficient policy matching the tracking error of a held mobility.
    Recommend(RecommendArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results are identical for any value.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Optional JSON file of tuning overrides (flags win over it).
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Tuning knobs accepted via `--config <json>`; every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    learning_rate: Option<f64>,
    batch_size: Option<usize>,
    train_paths: Option<usize>,
    epochs: Option<usize>,
    heldout_paths: Option<usize>,
    eval_paths: Option<usize>,
    validation_paths: Option<usize>,
    hidden_width: Option<usize>,
    hidden_layers: Option<usize>,
    penalty_candidates: Option<Vec<f64>>,
    quantiles: Option<Vec<f64>>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }

    fn train_config(&self, seed: u64, threads: usize) -> TrainConfig {
        let defaults = TrainConfig::default();
        TrainConfig {
            learning_rate: self.learning_rate.unwrap_or(defaults.learning_rate),
            batch_size: self.batch_size.unwrap_or(defaults.batch_size),
            n_train_paths: self.train_paths.unwrap_or(defaults.n_train_paths),
            epochs: self.epochs.unwrap_or(defaults.epochs),
            n_heldout_paths: self.heldout_paths.unwrap_or(defaults.n_heldout_paths),
            master_seed: seed,
            threads,
            ..defaults
        }
    }

    fn layout(&self) -> NetworkLayout {
        let defaults = NetworkLayout::default();
        NetworkLayout {
            hidden_width: self.hidden_width.unwrap_or(defaults.hidden_width),
            hidden_layers: self.hidden_layers.unwrap_or(defaults.hidden_layers),
            ..defaults
        }
    }
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Mobility CSV: date,rr,gp,pa,ts,wp,re.
    #[arg(long)]
    mobility: PathBuf,
    /// Cases CSV: date,active,recovered,deaths (raw counts).
    #[arg(long)]
    cases: PathBuf,
    /// Index CSV: date,close. Optional; without it the economic model is
    /// marked absent and no problem spec is frozen.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    population: u64,
    /// Units of the mobility file.
    #[arg(long, value_enum, default_value_t = UnitsArg::Fraction)]
    mobility_units: UnitsArg,
    /// First date fed to the infection regression.
    #[arg(long)]
    beta_start: NaiveDate,
    /// First date fed to the recovery/death fits (also the cleaning
    /// cutoff for non-monotone confirmed counts).
    #[arg(long)]
    gamma_delta_start: NaiveDate,
    /// Horizon recorded in the frozen problem spec.
    #[arg(long, default_value_t = 5)]
    horizon: usize,
    /// Economic risk aversion recorded in the frozen problem spec.
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    /// Also fit the difference/relative diagnostic forms.
    #[arg(long)]
    diagnostics: bool,
    /// Leading pairs dropped for the diagnostic forms.
    #[arg(long, default_value_t = 20)]
    truncate_initial: usize,
    /// Log-odds clamp epsilon for dirty increments.
    #[arg(long, default_value_t = 1e-8)]
    clamp_eps: f64,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum UnitsArg {
    Percent,
    Fraction,
}

impl From<UnitsArg> for MobilityUnits {
    fn from(value: UnitsArg) -> Self {
        match value {
            UnitsArg::Percent => MobilityUnits::Percent,
            UnitsArg::Fraction => MobilityUnits::Fraction,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Frozen problem spec JSON from `calibrate`.
    #[arg(long)]
    spec: PathBuf,
    /// Named mobility preset.
    #[arg(long, conflicts_with = "alpha")]
    preset: Option<String>,
    /// Explicit mobility vector, six comma-separated fractions.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 365)]
    days: usize,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long)]
    seed: u64,
    /// Quantile probabilities, comma separated.
    #[arg(long, default_value = "0.45,0.5,0.55")]
    quantiles: String,
    /// Also dump every simulated path (day,path,i,r,d).
    #[arg(long)]
    dump_paths: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    seed: u64,
    /// Uniform penalty scale applied to all six weights (overrides the
    /// spec's stored weights).
    #[arg(long)]
    penalty_scale: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Args, Debug)]
struct FrontierArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Comma-separated ascending lambda grid; default is 12 log-spaced
    /// values in [0.001, 0.1].
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Accept a single-point frontier instead of erroring.
    #[arg(long)]
    allow_single_point: bool,
}

#[derive(Args, Debug)]
struct EfficiencyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    spec: PathBuf,
    /// Frontier JSON from `frontier`.
    #[arg(long)]
    frontier: PathBuf,
    /// Evaluate an explicit (te, rate) point.
    #[arg(long, requires = "rate")]
    te: Option<f64>,
    #[arg(long, requires = "te")]
    rate: Option<f64>,
    /// Or evaluate holding a mobility vector fixed over the horizon.
    #[arg(long, conflicts_with_all = ["te", "rate"], allow_hyphen_values = true)]
    alpha: Option<String>,
}

#[derive(Args, Debug)]
struct RecommendArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    frontier: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Mobility vector to match, six comma-separated fractions.
    #[arg(long, conflicts_with = "aligned", allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Canonical aligned CSV; the most recent Friday's mobility is used.
    #[arg(long)]
    aligned: Option<PathBuf>,
    /// Bisection retraining budget.
    #[arg(long, default_value_t = 6)]
    retrain_budget: usize,
}

/// Parses argv-style input and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Frontier(args) => cmd_frontier(args),
        Command::Efficiency(args) => cmd_efficiency(args),
        Command::Recommend(args) => cmd_recommend(args),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_spec(path: &Path) -> Result<ProblemSpec> {
    let spec: ProblemSpec = serde_json::from_str(&read_to_string(path)?)?;
    spec.validate()?;
    Ok(spec)
}

fn load_frontier(path: &Path) -> Result<Frontier> {
    Ok(serde_json::from_str(&read_to_string(path)?)?)
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} entry `{s}`")))
        })
        .collect()
}

fn parse_alpha(text: &str) -> Result<MobilityVector> {
    let values = parse_f64_list(text, "mobility component")?;
    if values.len() != 6 {
        return Err(Error::InvalidArgument(format!(
            "mobility vector needs 6 components, got {}",
            values.len()
        )));
    }
    let mut out = [0.0; 6];
    out.copy_from_slice(&values);
    MobilityVector::validated(out, "--alpha")
}

fn resolve_mobility(preset: Option<&str>, alpha: Option<&str>) -> Result<MobilityVector> {
    match (preset, alpha) {
        (Some(name), None) => preset_mobility(name),
        (None, Some(text)) => parse_alpha(text),
        _ => Err(Error::InvalidArgument(format!(
            "provide exactly one of --preset ({}) or --alpha",
            PRESET_NAMES.join("|")
        ))),
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    inputs: Vec<String>,
    outputs: Vec<String>,
    seed: Option<u64>,
    threads: usize,
    config_hash: String,
    elapsed_ms: u128,
}

fn write_manifest(
    dir: &Path,
    command: &str,
    inputs: &[&Path],
    outputs: &[&Path],
    seed: Option<u64>,
    threads: usize,
    resolved_config: &str,
    started: std::time::Instant,
) -> Result<()> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        seed,
        threads,
        config_hash: format!("{:016x}", fnv1a(resolved_config)),
        elapsed_ms: started.elapsed().as_millis(),
    };
    write_file(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let started = std::time::Instant::now();
    ensure_out_dir(&args.common.out)?;

    let mobility = ingest::load_mobility_csv(&args.mobility, args.mobility_units.into())?;
    let (cases, warnings) =
        ingest::load_cases_csv(&args.cases, args.population, Some(args.gamma_delta_start))?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let index = match &args.index {
        Some(path) => ingest::load_index_csv(path)?,
        None => ingest::IndexTimeSeries::empty(),
    };
    let dataset = ingest::align(
        &mobility,
        &cases,
        &index,
        AlignConfig {
            beta_start: args.beta_start,
            gamma_delta_start: args.gamma_delta_start,
        },
    )?;

    let calibration = calibrate::calibrate(&dataset, args.clamp_eps)?;
    for event in &calibration.extraction.clamp_events {
        eprintln!(
            "warning: clamped {} rate argument {} at {}",
            event.component, event.raw_argument, event.date
        );
    }

    let mut report = serde_json::to_value(calibration.report(&dataset))?;
    if args.diagnostics {
        let mut diagnostics = serde_json::Map::new();
        for form in [calibrate::DependentForm::Difference, calibrate::DependentForm::Relative] {
            let label = format!("{form:?}").to_lowercase();
            match calibrate::fit_infection_diagnostic(
                &dataset,
                &calibration.extraction,
                form,
                args.truncate_initial,
            ) {
                Ok((fit, normality)) => {
                    diagnostics.insert(
                        label,
                        serde_json::json!({
                            "coefficients": fit.coefficients,
                            "r_squared": fit.r_squared,
                            "shapiro_p": normality.p_value,
                            "n": fit.n_observations,
                        }),
                    );
                }
                Err(err) => {
                    diagnostics.insert(label, serde_json::json!({ "error": err.to_string() }));
                }
            }
        }
        report["diagnostics"] = serde_json::Value::Object(diagnostics);
    }

    let report_path = args.common.out.join("calibration_report.json");
    write_file(&report_path, &serde_json::to_string_pretty(&report)?)?;
    let aligned_path = args.common.out.join("aligned.csv");
    dataset.write_csv(&aligned_path)?;

    let mut outputs = vec![report_path.clone(), aligned_path.clone()];
    match &calibration.economic {
        Some(econ_fit) => {
            let n = dataset.dates.len();
            let last_state = dataset.epidemic[n - 1];
            let initial_state = ControlState {
                i: last_state.i,
                r: last_state.r,
                d: last_state.d,
                log_odds: *calibration.extraction.triples.last().expect("nonempty extraction"),
                lagged_controls: [
                    dataset.mobility[n - 4],
                    dataset.mobility[n - 3],
                    dataset.mobility[n - 2],
                    dataset.mobility[n - 1],
                ],
            };
            let spx0 = predict_value(&econ_fit.model, &dataset.mobility[n - 1], &last_state);
            let spec = ProblemSpec {
                infection_model: calibration.infection.model,
                dynamics: calibration.dynamics,
                econ: econ_fit.model,
                feasible: calibration.pca.clone(),
                cost: CostConfig {
                    lambda: args.lambda,
                    penalty_weights: [0.0; 6],
                    horizon: args.horizon,
                    target: EconomicTarget::new(spx0),
                },
                initial_state,
            };
            let spec_path = args.common.out.join("problem_spec.json");
            write_file(&spec_path, &serde_json::to_string_pretty(&spec)?)?;
            outputs.push(spec_path);
        }
        None => {
            println!("economic model: absent (no index prices); problem spec not frozen");
        }
    }

    let infection = &calibration.infection;
    println!("infection regression (n = {}):", infection.regression.n_observations);
    println!(
        "  c0 = {:.4} (se {:.4}), R^2 = {:.4}, residual SW p = {:.4}",
        infection.model.c0,
        infection.regression.standard_errors[0],
        infection.regression.r_squared,
        infection.residual_normality.p_value
    );
    for (k, name) in crate::mobility::MOBILITY_NAMES.iter().enumerate() {
        println!(
            "  c[{name}] = {:.4} (se {:.4})",
            infection.model.c[k],
            infection.regression.standard_errors[k + 1]
        );
    }
    println!(
        "dynamics: mu_gamma = {:.4}, sigma_gamma = {:.4}, mu_delta = {:.4}, sigma_delta = {:.4}, sigma_beta = {:.4}",
        calibration.dynamics.mu_gamma,
        calibration.dynamics.sigma_gamma,
        calibration.dynamics.mu_delta,
        calibration.dynamics.sigma_delta,
        calibration.dynamics.sigma_beta
    );
    if let Some(econ_fit) = &calibration.economic {
        println!(
            "economic regression: kappa0 = {:.1}, R^2 = {:.4}, residual SW p = {:.4}",
            econ_fit.model.kappa0,
            econ_fit.regression.r_squared,
            econ_fit.residual_normality.p_value
        );
    }

    let inputs: Vec<&Path> = [Some(args.mobility.as_path()), Some(args.cases.as_path()), args.index.as_deref()]
        .into_iter()
        .flatten()
        .collect();
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    let resolved = format!(
        "calibrate population={} units={:?} beta_start={} gamma_delta_start={} horizon={} lambda={}",
        args.population, args.mobility_units, args.beta_start, args.gamma_delta_start, args.horizon, args.lambda
    );
    write_manifest(
        &args.common.out,
        "calibrate",
        &inputs,
        &output_refs,
        None,
        args.common.threads,
        &resolved,
        started,
    )
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let started = std::time::Instant::now();
    ensure_out_dir(&args.common.out)?;
    let config = ConfigFile::load(args.common.config.as_deref())?;
    if args.days == 0 || args.paths == 0 {
        return Err(Error::InvalidArgument("--days and --paths must be at least 1".into()));
    }
    let spec = load_spec(&args.spec)?;
    let mobility = resolve_mobility(args.preset.as_deref(), args.alpha.as_deref())?;
    let probabilities = match &config.quantiles {
        Some(qs) => qs.clone(),
        None => parse_f64_list(&args.quantiles, "quantile")?,
    };

    let scenario = ScenarioSpec {
        fixed_mobility: mobility,
        horizon_days: args.days,
        n_paths: args.paths,
        seed: args.seed,
        initial_state: spec.initial_state.epidemic_state(),
        initial_log_odds: spec.initial_state.log_odds,
        infection: spec.infection_model,
        dynamics: spec.dynamics,
    };
    let ensemble = simulate(&scenario, args.common.threads);
    let curves = quantile_curves(&ensemble, &probabilities)?;
    let csv_path = args.common.out.join("scenario.csv");
    write_file(&csv_path, &curves.to_csv())?;
    let mut outputs = vec![csv_path.clone()];
    if args.dump_paths {
        let dump_path = args.common.out.join("paths.csv");
        write_file(&dump_path, &ensemble.to_csv())?;
        outputs.push(dump_path);
    }

    let median_idx = probabilities
        .iter()
        .position(|&p| (p - 0.5).abs() < 1e-12)
        .unwrap_or(probabilities.len() / 2);
    let last = args.days - 1;
    println!(
        "scenario over {} days x {} paths: final median I = {:.6}, R = {:.6}, D = {:.6}",
        args.days,
        args.paths,
        curves.i[median_idx][last],
        curves.r[median_idx][last],
        curves.d[median_idx][last]
    );

    let resolved = format!(
        "simulate alpha={:?} days={} paths={} quantiles={:?}",
        mobility.0, args.days, args.paths, probabilities
    );
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(
        &args.common.out,
        "simulate",
        &[args.spec.as_path()],
        &output_refs,
        Some(args.seed),
        args.common.threads,
        &resolved,
        started,
    )
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let started = std::time::Instant::now();
    ensure_out_dir(&args.common.out)?;
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let mut spec = load_spec(&args.spec)?;
    spec.cost.lambda = args.lambda;
    if let Some(scale) = args.penalty_scale {
        spec.cost.penalty_weights = [scale; 6];
    }
    if let Some(h) = args.horizon {
        spec.cost.horizon = h;
    }
    spec.validate()?;

    let train_config = config.train_config(args.seed, args.common.threads);
    let result = train(&spec, config.layout(), &train_config)?;

    let policy_path = args.common.out.join("policy.json");
    write_file(&policy_path, &result.stack.to_json())?;
    let curve_path = args.common.out.join("training_curve.csv");
    write_file(&curve_path, &result.curve_csv())?;

    println!(
        "trained {} epochs at lambda = {}: held-out J {:.6} -> best {:.6}",
        train_config.epochs,
        args.lambda,
        result.curve.first().map_or(f64::NAN, |r| r.heldout_j),
        result.best_heldout
    );

    let resolved = format!(
        "solve lambda={} penalty_scale={:?} horizon={} train={}",
        args.lambda,
        args.penalty_scale,
        spec.cost.horizon,
        serde_json::to_string(&train_config)?
    );
    write_manifest(
        &args.common.out,
        "solve",
        &[args.spec.as_path()],
        &[policy_path.as_path(), curve_path.as_path()],
        Some(args.seed),
        args.common.threads,
        &resolved,
        started,
    )
}

// ---------------------------------------------------------------------------
// frontier
// ---------------------------------------------------------------------------

fn cmd_frontier(args: FrontierArgs) -> Result<()> {
    let started = std::time::Instant::now();
    ensure_out_dir(&args.common.out)?;
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let mut spec = load_spec(&args.spec)?;
    if let Some(h) = args.horizon {
        spec.cost.horizon = h;
    }
    spec.validate()?;

    let lambda_grid = match &args.lambda_grid {
        Some(text) => parse_f64_list(text, "lambda")?,
        None => crate::frontier::default_lambda_grid(),
    };
    let sweep_config = SweepConfig {
        lambda_grid,
        layout: config.layout(),
        train: config.train_config(args.seed, args.common.threads),
        eval_seed: args.seed,
        n_eval_paths: config.eval_paths.unwrap_or(512),
        penalty_candidates: config
            .penalty_candidates
            .clone()
            .unwrap_or_else(|| vec![1.0, 10.0, 100.0, 1000.0]),
        n_validation_paths: config.validation_paths.unwrap_or(256),
        allow_single_point: args.allow_single_point,
    };

    let outcome = sweep_lambda(&spec, &sweep_config)?;
    for (lambda, message) in &outcome.failures {
        eprintln!("warning: training failed at lambda = {lambda}: {message}");
    }
    let n_failures = outcome.failures.len();
    if let Some(penalty) = &outcome.penalty {
        if !penalty.enforced {
            eprintln!(
                "warning: no candidate penalty scale enforced the constraints; using {}",
                penalty.scale
            );
        }
    }

    let frontier_json = args.common.out.join("frontier.json");
    write_file(&frontier_json, &serde_json::to_string(&outcome.frontier)?)?;
    let frontier_csv = args.common.out.join("frontier.csv");
    write_file(&frontier_csv, &outcome.frontier.to_csv())?;
    let controls_csv = args.common.out.join("mean_controls.csv");
    write_file(&controls_csv, &outcome.frontier.mean_controls_csv())?;

    println!("lambda        te            infection_rate  dominated");
    for p in &outcome.frontier.points {
        println!(
            "{:<12.6} {:<13.8} {:<15.8} {}",
            p.lambda, p.tracking_error, p.infection_rate, p.dominated
        );
    }

    let resolved = format!(
        "frontier grid={:?} eval_paths={} penalty_candidates={:?}",
        outcome.frontier.points.iter().map(|p| p.lambda).collect::<Vec<_>>(),
        sweep_config.n_eval_paths,
        sweep_config.penalty_candidates
    );
    write_manifest(
        &args.common.out,
        "frontier",
        &[args.spec.as_path()],
        &[frontier_json.as_path(), frontier_csv.as_path(), controls_csv.as_path()],
        Some(args.seed),
        args.common.threads,
        &resolved,
        started,
    )?;
    if n_failures > 0 {
        // The partial frontier is on disk; the exit code still reports
        // the solver failures.
        return Err(Error::SweepFailures { failed: n_failures });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// efficiency
// ---------------------------------------------------------------------------

fn cmd_efficiency(args: EfficiencyArgs) -> Result<()> {
    let started = std::time::Instant::now();
    ensure_out_dir(&args.common.out)?;
    let spec = load_spec(&args.spec)?;
    let frontier = load_frontier(&args.frontier)?;

    let (te, rate) = match (args.te, args.rate, &args.alpha) {
        (Some(te), Some(rate), None) => (te, rate),
        (None, None, Some(alpha_text)) => {
            let alpha = parse_alpha(alpha_text)?;
            let eval_paths = crate::solver::sample_noise_paths(
                frontier.eval_seed,
                crate::rng::streams::EVALUATION,
                frontier.n_eval_paths,
                spec.cost.horizon,
            );
            let eval = evaluate_policy(
                &crate::control::ConstantControl(alpha),
                &spec,
                &eval_paths,
                args.common.threads,
            );
            (eval.tracking_error, eval.infection_rate)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "provide either --te with --rate, or --alpha".into(),
            ))
        }
    };

    let report = efficiency_ratio(te, rate, &frontier)?;
    let report_path = args.common.out.join("efficiency.json");
    write_file(&report_path, &serde_json::to_string_pretty(&report)?)?;
    println!(
        "point (te = {:.8}, rate = {:.8}) vs benchmark (te = {:.8}, rate = {:.8}): ER = {:.6}",
        report.point_te,
        report.point_rate,
        report.benchmark_te,
        report.benchmark_rate,
        report.efficiency_ratio
    );

    let resolved = format!("efficiency te={te} rate={rate}");
    write_manifest(
        &args.common.out,
        "efficiency",
        &[args.spec.as_path(), args.frontier.as_path()],
        &[report_path.as_path()],
        None,
        args.common.threads,
        &resolved,
        started,
    )
}

// ---------------------------------------------------------------------------
// recommend
// ---------------------------------------------------------------------------

/// Mobility vector of the most recent Friday in a canonical aligned CSV.
fn last_friday_mobility(path: &Path) -> Result<MobilityVector> {
    let text = read_to_string(path)?;
    let mut found: Option<MobilityVector> = None;
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 7 {
            return Err(Error::Csv {
                file: path.display().to_string(),
                line: idx + 1,
                message: "expected the canonical aligned layout".into(),
            });
        }
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d").map_err(|e| Error::Csv {
            file: path.display().to_string(),
            line: idx + 1,
            message: format!("bad date `{}`: {e}", fields[0]),
        })?;
        if date.weekday() != Weekday::Fri {
            continue;
        }
        let mut v = [0.0; 6];
        for k in 0..6 {
            v[k] = fields[1 + k].parse::<f64>().map_err(|_| Error::Csv {
                file: path.display().to_string(),
                line: idx + 1,
                message: format!("unparseable value `{}`", fields[1 + k]),
            })?;
        }
        found = Some(MobilityVector(v));
    }
    found.ok_or_else(|| Error::InvalidArgument("no Friday found in the aligned CSV".into()))
}

fn cmd_recommend(args: RecommendArgs) -> Result<()> {
    let started = std::time::Instant::now();
    ensure_out_dir(&args.common.out)?;
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let spec = load_spec(&args.spec)?;
    let frontier = load_frontier(&args.frontier)?;

    let alpha = match (&args.alpha, &args.aligned) {
        (Some(text), None) => parse_alpha(text)?,
        (None, Some(path)) => last_friday_mobility(path)?,
        _ => {
            return Err(Error::InvalidArgument(
                "provide exactly one of --alpha or --aligned".into(),
            ))
        }
    };

    let train_config = config.train_config(args.seed, args.common.threads);
    let recommendation = recommend_esdp(
        &alpha,
        &spec,
        &frontier,
        config.layout(),
        &train_config,
        args.retrain_budget,
    )?;

    let json_path = args.common.out.join("recommendation.json");
    write_file(&json_path, &serde_json::to_string_pretty(&recommendation)?)?;
    let mut controls_csv = String::from("step,rr,gp,pa,ts,wp,re\n");
    for (step, alpha) in recommendation.mean_controls.iter().enumerate() {
        controls_csv.push_str(&step.to_string());
        for v in alpha.0 {
            controls_csv.push(',');
            controls_csv.push_str(&ingest::format_f64(v));
        }
        controls_csv.push('\n');
    }
    let controls_path = args.common.out.join("recommended_controls.csv");
    write_file(&controls_path, &controls_csv)?;

    println!(
        "held-fixed mobility: te = {:.8}, rate = {:.8}",
        recommendation.fixed_te, recommendation.fixed_rate
    );
    println!(
        "recommended lambda* = {:.6}: te = {:.8} (residual {:.2e}), rate = {:.8}, retrained {}x",
        recommendation.lambda,
        recommendation.tracking_error,
        recommendation.te_residual,
        recommendation.infection_rate,
        recommendation.retrained
    );

    let resolved = format!(
        "recommend alpha={:?} retrain_budget={} train={}",
        alpha.0,
        args.retrain_budget,
        serde_json::to_string(&train_config)?
    );
    write_manifest(
        &args.common.out,
        "recommend",
        &[args.spec.as_path(), args.frontier.as_path()],
        &[json_path.as_path(), controls_path.as_path()],
        Some(args.seed),
        args.common.threads,
        &resolved,
        started,
    )
}

//! Statistical estimation: least squares with diagnostics, Shapiro-Wilk
//! normality testing, log-odds dynamics parameters, and the PCA feasible
//! set for mobility controls.

use serde::{Deserialize, Serialize};

use crate::econ;
use crate::epidemic::{InfectionRegressionModel, LogOddsDynamicsParams, LogOddsExtraction};
use crate::error::{Error, Result};
use crate::ingest::{AlignedDataset, MobilityTimeSeries};
use crate::linalg::{lstsq_qr, symmetric_eigen, Mat};
use crate::mobility::{MobilityVector, MOBILITY_NAMES};

/// Ordinary least-squares fit with the diagnostics the reports need.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Intercept first when one was requested.
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub n_observations: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormalityTestResult {
    pub w_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Historical feasible set of mobility controls in principal-component
/// coordinates: rows of `a_matrix` are orthonormal directions of the
/// centred sample covariance, and `lower`/`upper` bound the historical
/// scores componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSetPCA {
    pub a_matrix: [[f64; 6]; 6],
    pub lower: [f64; 6],
    pub upper: [f64; 6],
    pub center: [f64; 6],
}

impl FeasibleSetPCA {
    /// Principal-component scores of a control, centred on the training
    /// mean.
    pub fn scores(&self, alpha: &MobilityVector) -> [f64; 6] {
        let mut p = [0.0; 6];
        for (k, row) in self.a_matrix.iter().enumerate() {
            p[k] = (0..6).map(|j| row[j] * (alpha.0[j] - self.center[j])).sum();
        }
        p
    }

    /// Largest componentwise distance outside `[lower, upper]` in score
    /// space; zero iff the control is feasible.
    pub fn max_violation(&self, alpha: &MobilityVector) -> f64 {
        let p = self.scores(alpha);
        (0..6)
            .map(|k| (self.lower[k] - p[k]).max(p[k] - self.upper[k]).max(0.0))
            .fold(0.0f64, f64::max)
    }
}

/// Least squares via Householder QR. The intercept column, when requested,
/// is prepended so it comes first in the coefficient vector.
pub fn ols_fit(
    design_rows: &[Vec<f64>],
    responses: &[f64],
    include_intercept: bool,
) -> Result<RegressionFit> {
    let n = design_rows.len();
    assert_eq!(n, responses.len(), "design/response length mismatch");
    let p_in = design_rows.first().map_or(0, Vec::len);
    let p = p_in + usize::from(include_intercept);
    if n < p || p == 0 {
        return Err(Error::TooFewObservations { n, p });
    }

    let mut x = Mat::zeros(n, p);
    for (i, row) in design_rows.iter().enumerate() {
        assert_eq!(row.len(), p_in, "ragged design row");
        let mut col = 0;
        if include_intercept {
            *x.at_mut(i, 0) = 1.0;
            col = 1;
        }
        for (j, &v) in row.iter().enumerate() {
            *x.at_mut(i, col + j) = v;
        }
    }

    let solution = lstsq_qr(&x, responses)?;
    let b = solution.coefficients;

    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let fitted: f64 = (0..p).map(|j| x.at(i, j) * b[j]).sum();
            responses[i] - fitted
        })
        .collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();

    let mean_y = responses.iter().sum::<f64>() / n as f64;
    let sst: f64 = if include_intercept {
        responses.iter().map(|y| (y - mean_y) * (y - mean_y)).sum()
    } else {
        responses.iter().map(|y| y * y).sum()
    };
    let r_squared = if sst <= 1e-300 {
        if ssr <= 1e-300 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    };

    let sigma2 = if n > p { ssr / (n - p) as f64 } else { 0.0 };
    let standard_errors = solution
        .inv_gram_diag
        .iter()
        .map(|&g| (sigma2 * g).max(0.0).sqrt())
        .collect();

    Ok(RegressionFit {
        coefficients: b,
        standard_errors,
        r_squared,
        residuals,
        n_observations: n,
    })
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk (Royston AS R94, the finite-n approximation used by R's
// shapiro.test, valid for 3 <= n <= 5000)
// ---------------------------------------------------------------------------

fn poly(coefficients: &[f64], x: f64) -> f64 {
    coefficients
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * x + c)
}

/// Standard normal quantile (Acklam's rational approximation).
fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Standard normal CDF via the Abramowitz-Stegun 7.1.26 erf polynomial.
fn normal_cdf(x: f64) -> f64 {
    const A1: f64 = 0.254829592;
    const A2: f64 = -0.284496736;
    const A3: f64 = 1.421413741;
    const A4: f64 = -1.453152027;
    const A5: f64 = 1.061405429;
    const P: f64 = 0.3275911;

    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let z = (x.abs()) * std::f64::consts::FRAC_1_SQRT_2;
    let t = 1.0 / (1.0 + P * z);
    let erf = 1.0 - ((((A5 * t + A4) * t + A3) * t + A2) * t + A1) * t * (-z * z).exp();
    0.5 * (1.0 + sign * erf)
}

/// Shapiro-Wilk normality test using Royston's approximation of the
/// coefficients and the p-value transformation.
pub fn shapiro_wilk(sample: &[f64]) -> Result<NormalityTestResult> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::SampleSize { n, min: 3, max: 5000 });
    }

    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample value"));
    let range = x[n - 1] - x[0];
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::ZeroVariance);
    }

    // Half-coefficients, 1-based as in AS R94.
    let nn2 = n / 2;
    let mut a = vec![0.0; nn2 + 1];
    if n == 3 {
        a[1] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        let an = n as f64;
        let an25 = an + 0.25;
        let mut summ2 = 0.0;
        for i in 1..=nn2 {
            a[i] = normal_quantile((i as f64 - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / an.sqrt();
        const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
        const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
        let a1 = poly(&C1, rsn) - a[1] / ssumm2;
        let (i1, fac) = if n > 5 {
            let a2 = -a[2] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            a[2] = a2;
            (3, fac)
        } else {
            let fac = ((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            (2, fac)
        };
        a[1] = a1;
        for item in a.iter_mut().take(nn2 + 1).skip(i1) {
            *item /= -fac;
        }
    }

    // Full antisymmetric weight vector over the ascending order statistics.
    let mut weights = vec![0.0; n];
    for i in 0..nn2 {
        weights[i] = -a[i + 1];
        weights[n - 1 - i] = a[i + 1];
    }

    let sx = x.iter().map(|v| v / range).sum::<f64>() / n as f64;
    let sa = weights.iter().sum::<f64>() / n as f64;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let asa = weights[i] - sa;
        let xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = (1.0 - w1).clamp(0.0, 1.0);

    Ok(NormalityTestResult {
        w_statistic: w,
        p_value: shapiro_wilk_p_value(w, n),
        n,
    })
}

fn shapiro_wilk_p_value(w: f64, n: usize) -> f64 {
    if w >= 1.0 {
        return 1.0;
    }
    if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::FRAC_PI_3;
        return (pi6 * (w.sqrt().asin() - stqr)).clamp(0.0, 1.0);
    }

    let an = n as f64;
    let y = (1.0 - w).ln();
    const G: [f64; 2] = [-2.273, 0.459];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

    let (z, mean, sd) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-99;
        }
        (-(gamma - y).ln(), poly(&C3, an), poly(&C4, an).exp())
    } else {
        let log_n = an.ln();
        (y, poly(&C5, log_n), poly(&C6, log_n).exp())
    };

    (1.0 - normal_cdf((z - mean) / sd)).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Model-specific fits
// ---------------------------------------------------------------------------

/// Which transformation of the infection log-odds a diagnostic regression
/// uses as its dependent variable. Only `Level` feeds the forward model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DependentForm {
    Level,
    Difference,
    Relative,
}

#[derive(Debug, Clone)]
pub struct InfectionFit {
    pub model: InfectionRegressionModel,
    pub sigma_beta: f64,
    pub regression: RegressionFit,
    pub residual_normality: NormalityTestResult,
}

fn infection_pairs(
    dataset: &AlignedDataset,
    extraction: &LogOddsExtraction,
) -> Vec<(usize, MobilityVector, f64)> {
    // Pair the response of the transition into date t+1 with the
    // moving-average regressor observed at date t; usable from the beta
    // start date onward.
    let mut pairs = Vec::new();
    for (t, triple) in extraction.triples.iter().enumerate() {
        if dataset.dates[t + 1] < dataset.beta_start {
            continue;
        }
        if let Some(ma) = dataset.mobility_ma[t] {
            pairs.push((t, ma, triple.beta));
        }
    }
    pairs
}

/// Regresses the next-day infection log-odds on the trailing mobility mean.
/// The residual standard deviation becomes the model's noise scale, and the
/// residuals' Shapiro-Wilk result is returned as a diagnostic.
pub fn fit_infection_model(
    dataset: &AlignedDataset,
    extraction: &LogOddsExtraction,
) -> Result<InfectionFit> {
    let pairs = infection_pairs(dataset, extraction);
    if pairs.len() < 20 {
        return Err(Error::NotEnoughData {
            context: "infection regression".into(),
            required: 20,
            got: pairs.len(),
        });
    }
    let rows: Vec<Vec<f64>> = pairs.iter().map(|(_, ma, _)| ma.0.to_vec()).collect();
    let responses: Vec<f64> = pairs.iter().map(|&(_, _, beta)| beta).collect();
    let regression = ols_fit(&rows, &responses, true)?;

    let mut c = [0.0; 6];
    c.copy_from_slice(&regression.coefficients[1..7]);
    let model = InfectionRegressionModel { c0: regression.coefficients[0], c };
    let sigma_beta = sample_std(&regression.residuals);
    let residual_normality = shapiro_wilk(&regression.residuals)?;

    Ok(InfectionFit {
        model,
        sigma_beta,
        regression,
        residual_normality,
    })
}

/// Diagnostic-only refit using an alternative dependent form; the first
/// `truncate_initial` pairs may be dropped for the difference and relative
/// forms where early data are unreliable.
pub fn fit_infection_diagnostic(
    dataset: &AlignedDataset,
    extraction: &LogOddsExtraction,
    form: DependentForm,
    truncate_initial: usize,
) -> Result<(RegressionFit, NormalityTestResult)> {
    let pairs = infection_pairs(dataset, extraction);
    let mut rows = Vec::new();
    let mut responses = Vec::new();
    for &(t, ma, beta) in &pairs {
        let value = match form {
            DependentForm::Level => Some(beta),
            DependentForm::Difference | DependentForm::Relative => {
                // Needs the previous transition's log-odds.
                if t == 0 {
                    None
                } else {
                    let prev = extraction.triples[t - 1].beta;
                    match form {
                        DependentForm::Difference => Some(beta - prev),
                        _ if prev != 0.0 => Some(beta / prev - 1.0),
                        _ => None,
                    }
                }
            }
        };
        if let Some(v) = value {
            rows.push(ma.0.to_vec());
            responses.push(v);
        }
    }
    let skip = if form == DependentForm::Level { 0 } else { truncate_initial.min(rows.len()) };
    let rows = &rows[skip..];
    let responses = &responses[skip..];
    if rows.len() < 20 {
        return Err(Error::NotEnoughData {
            context: format!("diagnostic regression ({form:?})"),
            required: 20,
            got: rows.len(),
        });
    }
    let fit = ols_fit(rows, responses, true)?;
    let normality = shapiro_wilk(&fit.residuals)?;
    Ok((fit, normality))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RelativeIncrementFit {
    pub mu: f64,
    pub sigma: f64,
    pub n_increments: usize,
    /// True when only one increment was available, in which case sigma is
    /// reported as zero.
    pub degenerate: bool,
}

/// Mean and sample standard deviation of `x_{t+1}/x_t - 1`.
pub fn fit_relative_increment(series: &[f64]) -> Result<RelativeIncrementFit> {
    if series.len() < 2 {
        return Err(Error::NotEnoughData {
            context: "relative increments".into(),
            required: 2,
            got: series.len(),
        });
    }
    for (index, &v) in series.iter().enumerate() {
        if v == 0.0 {
            return Err(Error::ZeroElement { index });
        }
    }
    let increments: Vec<f64> = series.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    let m = increments.len();
    let mu = increments.iter().sum::<f64>() / m as f64;
    let (sigma, degenerate) = if m < 2 {
        (0.0, true)
    } else {
        let var = increments.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (m - 1) as f64;
        (var.sqrt(), false)
    };
    Ok(RelativeIncrementFit {
        mu,
        sigma,
        n_increments: m,
        degenerate,
    })
}

/// Sample standard deviation with the n-1 denominator.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Principal directions of the centred mobility covariance, with the
/// historical score range as the feasible box. Directions are ordered by
/// descending eigenvalue and signed so each row's largest-magnitude entry
/// is positive.
pub fn fit_pca_bounds(history: &MobilityTimeSeries) -> Result<FeasibleSetPCA> {
    let n = history.values.len();
    if n < 7 {
        return Err(Error::NotEnoughData {
            context: "PCA feasible set".into(),
            required: 7,
            got: n,
        });
    }

    let mut center = [0.0; 6];
    for v in &history.values {
        for k in 0..6 {
            center[k] += v.0[k];
        }
    }
    for c in &mut center {
        *c /= n as f64;
    }

    let mut cov = Mat::zeros(6, 6);
    for v in &history.values {
        let dev: Vec<f64> = (0..6).map(|k| v.0[k] - center[k]).collect();
        for r in 0..6 {
            for c in 0..6 {
                *cov.at_mut(r, c) += dev[r] * dev[c];
            }
        }
    }
    for entry in &mut cov.data {
        *entry /= (n - 1) as f64;
    }
    let trace: f64 = (0..6).map(|k| cov.at(k, k)).sum();
    if trace <= 1e-30 {
        return Err(Error::DegenerateCovariance);
    }

    let (_, vectors) = symmetric_eigen(&cov);
    let mut a_matrix = [[0.0; 6]; 6];
    for r in 0..6 {
        let mut row = [0.0; 6];
        for c in 0..6 {
            row[c] = vectors.at(r, c);
        }
        // Deterministic sign: the largest-magnitude entry is positive.
        let lead = row
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(k, _)| k)
            .unwrap();
        if row[lead] < 0.0 {
            for entry in &mut row {
                *entry = -*entry;
            }
        }
        a_matrix[r] = row;
    }

    let mut set = FeasibleSetPCA {
        a_matrix,
        lower: [f64::INFINITY; 6],
        upper: [f64::NEG_INFINITY; 6],
        center,
    };
    for v in &history.values {
        let p = set.scores(v);
        for k in 0..6 {
            set.lower[k] = set.lower[k].min(p[k]);
            set.upper[k] = set.upper[k].max(p[k]);
        }
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// Full-dataset calibration
// ---------------------------------------------------------------------------

/// Everything the calibration stage produces from one aligned dataset.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub infection: InfectionFit,
    pub gamma_fit: RelativeIncrementFit,
    pub delta_fit: RelativeIncrementFit,
    pub dynamics: LogOddsDynamicsParams,
    pub economic: Option<econ::EconomicFit>,
    pub pca: FeasibleSetPCA,
    pub extraction: LogOddsExtraction,
}

/// Runs the full calibration pipeline: log-odds extraction, infection
/// regression, recovery/death increment fits, the economic regression when
/// price data are present, and the PCA feasible set.
pub fn calibrate(dataset: &AlignedDataset, clamp_eps: f64) -> Result<Calibration> {
    let series = dataset.epidemic_series();
    let extraction = crate::epidemic::extract_log_odds(&series, clamp_eps)?;

    let infection = fit_infection_model(dataset, &extraction)?;

    let gamma_series: Vec<f64> = extraction
        .triples
        .iter()
        .enumerate()
        .filter(|(t, _)| dataset.dates[t + 1] >= dataset.gamma_delta_start)
        .map(|(_, triple)| triple.gamma)
        .collect();
    let delta_series: Vec<f64> = extraction
        .triples
        .iter()
        .enumerate()
        .filter(|(t, _)| dataset.dates[t + 1] >= dataset.gamma_delta_start)
        .map(|(_, triple)| triple.delta)
        .collect();
    let gamma_fit = fit_relative_increment(&gamma_series)?;
    let delta_fit = fit_relative_increment(&delta_series)?;

    let dynamics = LogOddsDynamicsParams {
        mu_gamma: gamma_fit.mu,
        sigma_gamma: gamma_fit.sigma,
        mu_delta: delta_fit.mu,
        sigma_delta: delta_fit.sigma,
        sigma_beta: infection.sigma_beta,
    };

    let economic = if dataset.index_close.iter().any(Option::is_some) {
        Some(econ::fit_economic_model(dataset)?)
    } else {
        None
    };

    let mobility_history = MobilityTimeSeries {
        dates: dataset.dates.clone(),
        values: dataset.mobility.clone(),
    };
    let pca = fit_pca_bounds(&mobility_history)?;

    Ok(Calibration {
        infection,
        gamma_fit,
        delta_fit,
        dynamics,
        economic,
        pca,
        extraction,
    })
}

// ---------------------------------------------------------------------------
// Report export (JSON), mirroring the regression-table layout
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionReport {
    pub intercept: f64,
    pub coefficients: std::collections::BTreeMap<String, f64>,
    pub standard_errors: std::collections::BTreeMap<String, f64>,
    pub r_squared: f64,
    pub shapiro_w: f64,
    pub shapiro_p: f64,
    pub n: usize,
}

impl RegressionReport {
    fn new(fit: &RegressionFit, normality: &NormalityTestResult, names: &[&str]) -> Self {
        let mut coefficients = std::collections::BTreeMap::new();
        let mut standard_errors = std::collections::BTreeMap::new();
        for (k, name) in names.iter().enumerate() {
            coefficients.insert(name.to_string(), fit.coefficients[k + 1]);
            standard_errors.insert(name.to_string(), fit.standard_errors[k + 1]);
        }
        standard_errors.insert("intercept".into(), fit.standard_errors[0]);
        Self {
            intercept: fit.coefficients[0],
            coefficients,
            standard_errors,
            r_squared: fit.r_squared,
            shapiro_w: normality.w_statistic,
            shapiro_p: normality.p_value,
            n: fit.n_observations,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub mu_gamma: f64,
    pub sigma_gamma: f64,
    pub mu_delta: f64,
    pub sigma_delta: f64,
    pub sigma_beta: f64,
    pub n_gamma_increments: usize,
    pub n_delta_increments: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub beta_start: chrono::NaiveDate,
    pub gamma_delta_start: chrono::NaiveDate,
    pub infection: RegressionReport,
    pub dynamics: DynamicsReport,
    /// Absent when the run had no index prices.
    pub economic: Option<RegressionReport>,
    pub pca: FeasibleSetPCA,
    pub clamp_events: usize,
}

impl Calibration {
    pub fn report(&self, dataset: &AlignedDataset) -> CalibrationReport {
        let econ_names = ["rr", "gp", "pa", "ts", "wp", "re", "i", "r", "d"];
        CalibrationReport {
            beta_start: dataset.beta_start,
            gamma_delta_start: dataset.gamma_delta_start,
            infection: RegressionReport::new(
                &self.infection.regression,
                &self.infection.residual_normality,
                &MOBILITY_NAMES,
            ),
            dynamics: DynamicsReport {
                mu_gamma: self.dynamics.mu_gamma,
                sigma_gamma: self.dynamics.sigma_gamma,
                mu_delta: self.dynamics.mu_delta,
                sigma_delta: self.dynamics.sigma_delta,
                sigma_beta: self.dynamics.sigma_beta,
                n_gamma_increments: self.gamma_fit.n_increments,
                n_delta_increments: self.delta_fit.n_increments,
            },
            economic: self
                .economic
                .as_ref()
                .map(|e| RegressionReport::new(&e.regression, &e.residual_normality, &econ_names)),
            pca: self.pca.clone(),
            clamp_events: self.extraction.clamp_events.len(),
        }
    }
}

//! Deep-learning solution of the control problem: the unrolled stochastic
//! objective with exact reverse-mode gradients, minibatch Adam training
//! with best-checkpoint selection, and penalty-weight cross-validation.

use serde::{Deserialize, Serialize};

use crate::control::{cumulative_cost, transition, ControlPolicy, ProblemSpec};
use crate::epidemic::NoiseVector;
use crate::error::{Error, Result};
use crate::parallel::map_chunks;
use crate::rng::{streams, StreamRng};
use crate::solver::adam::AdamState;
use crate::solver::network::{Activation, InputNormalizer, NetworkLayout, PolicyStack};
use crate::solver::tape::{NodeId, Tape};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub n_train_paths: usize,
    pub epochs: usize,
    pub master_seed: u64,
    pub n_heldout_paths: usize,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 256,
            n_train_paths: 20_000,
            epochs: 100,
            master_seed: 1,
            n_heldout_paths: 2_000,
            threads: 1,
        }
    }
}

impl TrainConfig {
    /// Reduced budget for fixtures and desk-scale sweeps.
    pub fn desk_scale(master_seed: u64) -> Self {
        Self {
            learning_rate: 3e-3,
            batch_size: 128,
            n_train_paths: 1_024,
            epochs: 30,
            master_seed,
            n_heldout_paths: 256,
            ..Self::default()
        }
    }
}

/// Independent noise paths of the given horizon, one stream per path.
pub fn sample_noise_paths(
    seed: u64,
    stream_base: u64,
    count: usize,
    horizon: usize,
) -> Vec<Vec<NoiseVector>> {
    (0..count)
        .map(|p| {
            let mut rng = StreamRng::new(seed, stream_base + p as u64);
            (0..horizon)
                .map(|_| NoiseVector {
                    z_beta: rng.next_normal(),
                    z_gamma: rng.next_normal(),
                    z_delta: rng.next_normal(),
                })
                .collect()
        })
        .collect()
}

/// Builds one path's unrolled cost graph and returns the scalar root.
fn build_path_cost(
    tape: &mut Tape,
    stack: &PolicyStack,
    spec: &ProblemSpec,
    noise: &[NoiseVector],
) -> Result<NodeId> {
    let feasible = &spec.feasible;
    let mut a_flat = [0.0; 36];
    let mut pca_bias = [0.0; 6];
    for r in 0..6 {
        for c in 0..6 {
            a_flat[r * 6 + c] = feasible.a_matrix[r][c];
            pca_bias[r] -= feasible.a_matrix[r][c] * feasible.center[c];
        }
    }
    let inv_scale = stack.normalizer.inv_scale();

    let one = tape.scalar(1.0);
    let w0 = &spec.initial_state;
    let mut i_node = tape.scalar(w0.i);
    let mut r_node = tape.scalar(w0.r);
    let mut d_node = tape.scalar(w0.d);
    let mut beta_node = tape.scalar(w0.log_odds.beta);
    let mut gamma_node = tape.scalar(w0.log_odds.gamma);
    let mut delta_node = tape.scalar(w0.log_odds.delta);
    let mut lags: [NodeId; 4] = [
        tape.constant(w0.lagged_controls[0].0.to_vec()),
        tape.constant(w0.lagged_controls[1].0.to_vec()),
        tape.constant(w0.lagged_controls[2].0.to_vec()),
        tape.constant(w0.lagged_controls[3].0.to_vec()),
    ];

    let mut step_costs: Vec<(f64, NodeId)> = Vec::with_capacity(noise.len());
    for (s, eta) in noise.iter().enumerate() {
        // Policy network for this step.
        let input = tape.concat(&[
            i_node, r_node, d_node, beta_node, gamma_node, delta_node, lags[0], lags[1], lags[2],
            lags[3],
        ]);
        let mut cur = tape.normalize(&stack.normalizer.shift, &inv_scale, input);
        let layers = stack.layer_offsets(s);
        let last = layers.len() - 1;
        for (idx, (w_off, b_off, rows, cols)) in layers.into_iter().enumerate() {
            cur = tape.affine(w_off, b_off, rows, cols, cur);
            cur = if idx < last {
                match stack.layout.hidden_activation {
                    Activation::Relu => tape.relu(cur),
                    Activation::Tanh => tape.tanh(cur),
                }
            } else {
                tape.tanh(cur)
            };
        }
        let alpha = cur;

        // Log-odds dynamics under the 5-day mobility mean.
        let ma = tape.lincomb(&[
            (0.2, lags[0]),
            (0.2, lags[1]),
            (0.2, lags[2]),
            (0.2, lags[3]),
            (0.2, alpha),
        ]);
        let drift = tape.dot_const(&spec.infection_model.c, ma);
        let beta_shift =
            tape.scalar(spec.infection_model.c0 + spec.dynamics.sigma_beta * eta.z_beta);
        let beta_next = tape.lincomb(&[(1.0, drift), (1.0, beta_shift)]);
        let gamma_factor = 1.0 + spec.dynamics.mu_gamma + spec.dynamics.sigma_gamma * eta.z_gamma;
        let gamma_next = tape.lincomb(&[(gamma_factor, gamma_node)]);
        let delta_factor = 1.0 + spec.dynamics.mu_delta + spec.dynamics.sigma_delta * eta.z_delta;
        let delta_next = tape.lincomb(&[(delta_factor, delta_node)]);

        // SIRD step; the relu realizes the clamp at I = 0 with zero
        // gradient when active.
        let sb = tape.sigmoid(beta_next);
        let sg = tape.sigmoid(gamma_next);
        let sd = tape.sigmoid(delta_next);
        let s_frac = tape.lincomb(&[(1.0, one), (-1.0, i_node), (-1.0, r_node), (-1.0, d_node)]);
        let s_sb = tape.mul(s_frac, sb);
        let growth = tape.lincomb(&[(1.0, one), (1.0, s_sb), (-1.0, sg), (-1.0, sd)]);
        let i_raw = tape.mul(i_node, growth);
        let i_next = tape.relu(i_raw);
        let i_sg = tape.mul(i_node, sg);
        let r_next = tape.lincomb(&[(1.0, r_node), (1.0, i_sg)]);
        let i_sd = tape.mul(i_node, sd);
        let d_next = tape.lincomb(&[(1.0, d_node), (1.0, i_sd)]);

        // Running cost: new log-odds plus weighted squared tracking
        // deviation of the economic value.
        let kappa_alpha = tape.dot_const(&spec.econ.kappa, alpha);
        let kappa0 = tape.scalar(spec.econ.kappa0);
        let value = tape.lincomb(&[
            (1.0, kappa0),
            (1.0, kappa_alpha),
            (spec.econ.kappa_i, i_next),
            (spec.econ.kappa_r, r_next),
            (spec.econ.kappa_d, d_next),
        ]);
        let target = tape.scalar(spec.cost.target.level_at(s));
        let dev = tape.lincomb(&[(1.0, value), (-1.0, target)]);
        let dev_sq = tape.mul(dev, dev);
        let running = tape.lincomb(&[(1.0, beta_next), (spec.cost.lambda, dev_sq)]);

        // Feasibility penalty in score space.
        let scores = tape.matvec_const(&a_flat, &pca_bias, 6, 6, alpha);
        let penalty = tape.hinge_sq_sum(
            &feasible.lower,
            &feasible.upper,
            &spec.cost.penalty_weights,
            scores,
        );
        let step_cost = tape.lincomb(&[(1.0, running), (1.0, penalty)]);
        if !tape.scalar_value(step_cost).is_finite() {
            return Err(Error::NonFinite { context: "cumulative cost".into(), step: s });
        }
        step_costs.push((1.0, step_cost));

        i_node = i_next;
        r_node = r_next;
        d_node = d_next;
        beta_node = beta_next;
        gamma_node = gamma_next;
        delta_node = delta_next;
        lags = [lags[1], lags[2], lags[3], alpha];
    }

    Ok(tape.lincomb(&step_costs))
}

/// Batch-mean cumulative penalized cost and its gradient with respect to
/// every stack parameter. The reduction order is fixed by chunk index, so
/// the result is bit-identical for any thread count.
pub fn objective_and_gradient(
    stack: &PolicyStack,
    spec: &ProblemSpec,
    noise_batch: &[Vec<NoiseVector>],
    threads: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = noise_batch.len();
    assert!(n > 0, "empty noise batch");
    let n_params = stack.params.len();

    let chunks = map_chunks(n, threads, |range| -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; n_params];
        let mut cost_sum = 0.0;
        for path in range {
            let mut tape = Tape::new(&stack.params);
            let root = build_path_cost(&mut tape, stack, spec, &noise_batch[path])?;
            cost_sum += tape.scalar_value(root);
            tape.backward(root, &mut grad);
        }
        Ok((cost_sum, grad))
    });

    let mut total_cost = 0.0;
    let mut total_grad = vec![0.0; n_params];
    for chunk in chunks {
        let (cost, grad) = chunk?;
        total_cost += cost;
        for (acc, g) in total_grad.iter_mut().zip(&grad) {
            *acc += g;
        }
    }
    let scale = 1.0 / n as f64;
    for g in &mut total_grad {
        *g *= scale;
    }
    Ok((total_cost * scale, total_grad))
}

/// Mean cumulative cost over noise paths under plain (gradient-free)
/// rollouts; chunk-ordered reduction keeps it thread-count invariant.
pub fn mean_cost(
    policy: &dyn ControlPolicy,
    spec: &ProblemSpec,
    paths: &[Vec<NoiseVector>],
    threads: usize,
) -> f64 {
    let sums = map_chunks(paths.len(), threads, |range| {
        range
            .map(|p| cumulative_cost(&spec.initial_state, policy, &paths[p], spec))
            .sum::<f64>()
    });
    sums.into_iter().sum::<f64>() / paths.len() as f64
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_j: f64,
    pub heldout_j: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub stack: PolicyStack,
    pub curve: Vec<EpochStats>,
    pub best_heldout: f64,
}

impl TrainResult {
    /// Training-curve CSV: `epoch,train_J,heldout_J`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("epoch,train_J,heldout_J\n");
        for row in &self.curve {
            out.push_str(&format!(
                "{},{},{}\n",
                row.epoch,
                crate::ingest::format_f64(row.train_j),
                crate::ingest::format_f64(row.heldout_j)
            ));
        }
        out
    }
}

/// Network inputs visited by a policy over the given noise paths.
fn visited_inputs(
    stack: &PolicyStack,
    spec: &ProblemSpec,
    paths: &[Vec<NoiseVector>],
) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(paths.len() * spec.cost.horizon);
    for path in paths {
        let mut w = spec.initial_state;
        for (s, eta) in path.iter().enumerate() {
            rows.push(w.to_vector().to_vec());
            let alpha = stack.forward(s, &w);
            w = transition(&w, &alpha, eta, spec);
        }
    }
    rows
}

fn shuffled_indices(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = StreamRng::new(seed, streams::SHUFFLE + epoch as u64);
    for k in (1..n).rev() {
        let j = (rng.next_u64() % (k as u64 + 1)) as usize;
        order.swap(k, j);
    }
    order
}

/// Trains a policy stack: pre-sampled noise paths, minibatch Adam over the
/// configured epochs, input normalization fitted on a pilot rollout of the
/// initial policy, and best-held-out-checkpoint selection (the initial
/// stack is the first candidate, so training can never end worse than it
/// started on the selection criterion).
pub fn train(spec: &ProblemSpec, layout: NetworkLayout, config: &TrainConfig) -> Result<TrainResult> {
    let horizon = spec.cost.horizon;
    assert!(horizon >= 1, "horizon must be at least 1");
    let seed = config.master_seed;

    let train_paths = sample_noise_paths(seed, streams::TRAIN, config.n_train_paths, horizon);
    let heldout_paths = sample_noise_paths(seed, streams::HELDOUT, config.n_heldout_paths, horizon);

    let mut stack = PolicyStack::init(layout, horizon, seed);
    let pilot = &train_paths[..train_paths.len().min(256)];
    let inputs = visited_inputs(&stack, spec, pilot);
    stack.normalizer = InputNormalizer::fit(&inputs, layout.input_dim);

    let mut adam = AdamState::new(stack.params.len());
    let heldout_j0 = mean_cost(&stack, spec, &heldout_paths, config.threads);
    let train_j0 = mean_cost(&stack, spec, &train_paths, config.threads);
    let mut curve = vec![EpochStats { epoch: 0, train_j: train_j0, heldout_j: heldout_j0 }];
    let mut best = (heldout_j0, stack.params.clone());

    for epoch in 1..=config.epochs {
        let order = shuffled_indices(train_paths.len(), seed, epoch);
        let mut cost_sum = 0.0;
        let mut seen = 0usize;
        for batch_idx in order.chunks(config.batch_size.max(1)) {
            let batch: Vec<Vec<NoiseVector>> =
                batch_idx.iter().map(|&p| train_paths[p].clone()).collect();
            let (j, grad) = objective_and_gradient(&stack, spec, &batch, config.threads)?;
            if !j.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            cost_sum += j * batch.len() as f64;
            seen += batch.len();
            adam.step(
                &mut stack.params,
                &grad,
                config.learning_rate,
                config.beta1,
                config.beta2,
                config.epsilon,
            );
        }
        let train_j = cost_sum / seen as f64;
        if !train_j.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let heldout_j = mean_cost(&stack, spec, &heldout_paths, config.threads);
        curve.push(EpochStats { epoch, train_j, heldout_j });
        if heldout_j < best.0 {
            best = (heldout_j, stack.params.clone());
        }
    }

    stack.params = best.1;
    Ok(TrainResult { stack, curve, best_heldout: best.0 })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PenaltyCandidate {
    pub scale: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenaltySelection {
    pub weights: [f64; 6],
    pub scale: f64,
    /// False when no candidate achieved feasibility and the largest scale
    /// was returned as a fallback.
    pub enforced: bool,
    pub candidates: Vec<PenaltyCandidate>,
}

/// Violation tolerance for the cross-validated constraints.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Worst feasible-set violation of a policy's controls over noise paths:
/// the PCA box in score space plus any excess outside `[-1, 1]`.
pub fn max_control_violation(
    policy: &dyn ControlPolicy,
    spec: &ProblemSpec,
    paths: &[Vec<NoiseVector>],
    threads: usize,
) -> f64 {
    let maxima = map_chunks(paths.len(), threads, |range| {
        let mut worst = 0.0f64;
        for p in range {
            let mut w = spec.initial_state;
            for (s, eta) in paths[p].iter().enumerate() {
                let alpha = policy.control(s, &w);
                let box_violation = spec.feasible.max_violation(&alpha);
                let cube_violation = (alpha.max_abs_component() - 1.0).max(0.0);
                worst = worst.max(box_violation).max(cube_violation);
                w = transition(&w, &alpha, eta, spec);
            }
        }
        worst
    });
    maxima.into_iter().fold(0.0, f64::max)
}

/// Trains one policy per candidate penalty scale and returns the smallest
/// scale whose validation-set controls satisfy every constraint within
/// [`FEASIBILITY_TOL`]; falls back to the largest scale when none does.
pub fn cross_validate_penalties(
    spec: &ProblemSpec,
    candidate_scales: &[f64],
    layout: NetworkLayout,
    config: &TrainConfig,
    n_validation_paths: usize,
) -> Result<PenaltySelection> {
    if candidate_scales.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let validation = sample_noise_paths(
        config.master_seed,
        streams::VALIDATION,
        n_validation_paths,
        spec.cost.horizon,
    );

    let mut candidates = Vec::with_capacity(candidate_scales.len());
    for &scale in candidate_scales {
        let mut candidate_spec = spec.clone();
        candidate_spec.cost.penalty_weights = [scale; 6];
        let trained = train(&candidate_spec, layout, config)?;
        let violation =
            max_control_violation(&trained.stack, &candidate_spec, &validation, config.threads);
        candidates.push(PenaltyCandidate { scale, max_violation: violation });
        if violation <= FEASIBILITY_TOL {
            return Ok(PenaltySelection {
                weights: [scale; 6],
                scale,
                enforced: true,
                candidates,
            });
        }
    }

    let last = *candidate_scales.last().unwrap();
    Ok(PenaltySelection {
        weights: [last; 6],
        scale: last,
        enforced: false,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::FeasibleSetPCA;
    use crate::control::{ControlState, CostConfig};
    use crate::econ::{EconomicModel, EconomicTarget};
    use crate::epidemic::{InfectionRegressionModel, LogOddsDynamicsParams, LogOddsTriple};
    use crate::mobility::MobilityVector;

    fn identity_feasible(bound: f64) -> FeasibleSetPCA {
        let mut a = [[0.0; 6]; 6];
        for (k, row) in a.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        FeasibleSetPCA { a_matrix: a, lower: [-bound; 6], upper: [bound; 6], center: [0.0; 6] }
    }

    fn fixture_spec(lambda: f64, horizon: usize) -> ProblemSpec {
        ProblemSpec {
            infection_model: InfectionRegressionModel {
                c0: -2.0,
                c: [-1.7, 0.45, -0.14, 2.85, 0.38, 3.47],
            },
            dynamics: LogOddsDynamicsParams {
                mu_gamma: 0.0176,
                sigma_gamma: 0.19,
                mu_delta: 0.0061,
                sigma_delta: 0.045,
                sigma_beta: 0.51,
            },
            econ: EconomicModel {
                kappa0: 2900.0,
                kappa: [1100.0, -1100.0, -300.0, 1000.0, -180.0, 1200.0],
                kappa_i: 5.0e4,
                kappa_r: 4.0e4,
                kappa_d: -2.0e6,
            },
            feasible: identity_feasible(0.5),
            cost: CostConfig {
                lambda,
                penalty_weights: [0.2; 6],
                horizon,
                target: EconomicTarget::new(2900.0),
            },
            initial_state: ControlState {
                i: 0.01,
                r: 0.005,
                d: 0.001,
                log_odds: LogOddsTriple { beta: -2.0, gamma: -3.0, delta: -6.0 },
                lagged_controls: [MobilityVector::ZERO; 4],
            },
        }
    }

    #[test]
    fn tape_cost_matches_plain_rollout() {
        let spec = fixture_spec(1e-4, 5);
        let stack = PolicyStack::init(NetworkLayout::small(8), 5, 3);
        let paths = sample_noise_paths(9, streams::TRAIN, 4, 5);
        for path in &paths {
            let mut tape = Tape::new(&stack.params);
            let root = build_path_cost(&mut tape, &stack, &spec, path).unwrap();
            let plain = cumulative_cost(&spec.initial_state, &stack, path, &spec);
            let taped = tape.scalar_value(root);
            assert!(
                (taped - plain).abs() <= 1e-10 * plain.abs().max(1.0),
                "tape {taped} vs rollout {plain}"
            );
        }
    }

    #[test]
    fn duplicated_batch_gives_identical_objective_and_gradient() {
        let spec = fixture_spec(1e-4, 3);
        let stack = PolicyStack::init(NetworkLayout::small(6), 3, 5);
        let paths = sample_noise_paths(2, streams::TRAIN, 6, 3);
        let (j1, g1) = objective_and_gradient(&stack, &spec, &paths, 1).unwrap();
        let doubled: Vec<Vec<NoiseVector>> =
            paths.iter().chain(paths.iter()).cloned().collect();
        let (j2, g2) = objective_and_gradient(&stack, &spec, &doubled, 1).unwrap();
        assert!((j1 - j2).abs() < 1e-12 * j1.abs().max(1.0));
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-6));
        }
    }

    #[test]
    fn gradient_is_thread_count_invariant() {
        let spec = fixture_spec(1e-4, 4);
        let stack = PolicyStack::init(NetworkLayout::small(6), 4, 5);
        let paths = sample_noise_paths(2, streams::TRAIN, 96, 4);
        let (j1, g1) = objective_and_gradient(&stack, &spec, &paths, 1).unwrap();
        let (j4, g4) = objective_and_gradient(&stack, &spec, &paths, 4).unwrap();
        assert_eq!(j1.to_bits(), j4.to_bits());
        assert!(g1.iter().zip(&g4).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    fn finite_difference_gradient(
        stack: &PolicyStack,
        spec: &ProblemSpec,
        paths: &[Vec<NoiseVector>],
        eps: f64,
    ) -> Vec<f64> {
        let mut fd = vec![0.0; stack.params.len()];
        let mut perturbed = stack.clone();
        for k in 0..stack.params.len() {
            perturbed.params[k] = stack.params[k] + eps;
            let (up, _) = objective_and_gradient(&perturbed, spec, paths, 1).unwrap();
            perturbed.params[k] = stack.params[k] - eps;
            let (dn, _) = objective_and_gradient(&perturbed, spec, paths, 1).unwrap();
            perturbed.params[k] = stack.params[k];
            fd[k] = (up - dn) / (2.0 * eps);
        }
        fd
    }

    #[test]
    fn reverse_gradient_matches_finite_differences() {
        // Small relu network on a 2-step problem with noise and active
        // penalties.
        let mut spec = fixture_spec(2e-4, 2);
        spec.cost.penalty_weights = [5.0; 6];
        spec.feasible = identity_feasible(0.05);
        let stack = PolicyStack::init(NetworkLayout::small(4), 2, 11);
        let paths = sample_noise_paths(4, streams::TRAIN, 8, 2);

        let (_, grad) = objective_and_gradient(&stack, &spec, &paths, 1).unwrap();
        let fd = finite_difference_gradient(&stack, &spec, &paths, 1e-5);
        for k in 0..grad.len() {
            let denom = fd[k].abs().max(1e-7);
            assert!(
                (grad[k] - fd[k]).abs() / denom < 1e-4,
                "param {k}: reverse {} vs fd {}",
                grad[k],
                fd[k]
            );
        }
    }

    #[test]
    fn one_parameter_one_step_gradient_matches_chain_rule() {
        // Freeze everything except a single output bias on a 1-step,
        // zero-volatility problem with no penalty: the objective reduces
        // to c(alpha(b)) with alpha = tanh(b) on one component.
        let mut spec = fixture_spec(0.0, 1);
        spec.cost.penalty_weights = [0.0; 6];
        spec.dynamics.sigma_beta = 0.0;
        spec.dynamics.sigma_gamma = 0.0;
        spec.dynamics.sigma_delta = 0.0;
        let layout = NetworkLayout {
            input_dim: 30,
            hidden_layers: 0,
            hidden_width: 0,
            output_dim: 6,
            hidden_activation: Activation::Relu,
        };
        let mut stack = PolicyStack::init(layout, 1, 1);
        stack.params.iter_mut().for_each(|p| *p = 0.0);
        let offsets = stack.layer_offsets(0);
        let (_, b_off, _, _) = offsets[0];
        let bias_index = b_off; // bias of output component 0 (RR)
        stack.params[bias_index] = 0.3;

        let paths = sample_noise_paths(1, streams::TRAIN, 1, 1);
        let (_, grad) = objective_and_gradient(&stack, &spec, &paths, 1).unwrap();

        // Hand chain rule: alpha_rr = tanh(b); beta_1 = c0 + c_rr*alpha/5;
        // d beta/d b = (c_rr/5)(1 - tanh^2 b). The lambda term is off, so
        // the economic part contributes nothing.
        let t = 0.3f64.tanh();
        let want = spec.infection_model.c[0] / 5.0 * (1.0 - t * t);
        assert!((grad[bias_index] - want).abs() < 1e-12, "{} vs {want}", grad[bias_index]);
    }

    #[test]
    fn training_improves_heldout_objective() {
        let spec = fixture_spec(0.0, 2);
        let config = TrainConfig {
            learning_rate: 5e-3,
            batch_size: 64,
            n_train_paths: 256,
            epochs: 8,
            master_seed: 7,
            n_heldout_paths: 128,
            ..Default::default()
        };
        let result = train(&spec, NetworkLayout::small(8), &config).unwrap();
        let first = result.curve.first().unwrap();
        assert!(result.best_heldout <= first.heldout_j);
        assert_eq!(result.curve.len(), config.epochs + 1);
        // Best checkpoint is the minimum of the held-out curve.
        let min_heldout = result
            .curve
            .iter()
            .map(|row| row.heldout_j)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(result.best_heldout, min_heldout);
    }

    #[test]
    fn training_is_seed_deterministic() {
        let spec = fixture_spec(1e-4, 2);
        let config = TrainConfig {
            batch_size: 32,
            n_train_paths: 64,
            epochs: 3,
            master_seed: 13,
            n_heldout_paths: 32,
            learning_rate: 1e-3,
            ..Default::default()
        };
        let a = train(&spec, NetworkLayout::small(4), &config).unwrap();
        let b = train(&spec, NetworkLayout::small(4), &config).unwrap();
        assert_eq!(a.stack.params, b.stack.params);
        for (x, y) in a.curve.iter().zip(&b.curve) {
            assert_eq!(x.train_j.to_bits(), y.train_j.to_bits());
            assert_eq!(x.heldout_j.to_bits(), y.heldout_j.to_bits());
        }
    }

    #[test]
    fn zero_only_candidate_takes_the_fallback_path() {
        // Exterior unconstrained optimum with no penalty available: the
        // largest (only) scale comes back unenforced.
        let mut spec = fixture_spec(0.0, 2);
        spec.feasible = identity_feasible(0.01);
        spec.cost.penalty_weights = [0.0; 6];
        let config = TrainConfig {
            learning_rate: 1e-2,
            batch_size: 16,
            n_train_paths: 32,
            epochs: 6,
            master_seed: 3,
            n_heldout_paths: 16,
            ..Default::default()
        };
        let selection =
            cross_validate_penalties(&spec, &[0.0], NetworkLayout::small(4), &config, 16).unwrap();
        assert!(!selection.enforced);
        assert_eq!(selection.scale, 0.0);
        assert!(selection.candidates[0].max_violation > FEASIBILITY_TOL);
    }

    #[test]
    fn empty_candidates_are_rejected() {
        let spec = fixture_spec(1e-4, 1);
        let config = TrainConfig::desk_scale(1);
        assert!(matches!(
            cross_validate_penalties(&spec, &[], NetworkLayout::small(4), &config, 16),
            Err(Error::EmptyCandidates)
        ));
    }
}

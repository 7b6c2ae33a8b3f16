//! Per-timestep feedforward policy networks with bounded outputs.

use serde::{Deserialize, Serialize};

use crate::control::ControlState;
use crate::mobility::MobilityVector;
use crate::rng::{streams, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

/// Shape of one policy network. The output activation is always tanh so
/// controls land in (-1, 1) per component by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub output_dim: usize,
    pub hidden_activation: Activation,
}

impl Default for NetworkLayout {
    fn default() -> Self {
        Self {
            input_dim: ControlState::DIM,
            hidden_layers: 2,
            hidden_width: 64,
            output_dim: 6,
            hidden_activation: Activation::Relu,
        }
    }
}

impl NetworkLayout {
    /// Small layout for fixtures and desk-scale runs.
    pub fn small(hidden_width: usize) -> Self {
        Self {
            hidden_layers: 1,
            hidden_width,
            ..Self::default()
        }
    }

    /// (rows, cols) of each affine layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 1);
        let mut input = self.input_dim;
        for _ in 0..self.hidden_layers {
            dims.push((self.hidden_width, input));
            input = self.hidden_width;
        }
        dims.push((self.output_dim, input));
        dims
    }

    pub fn params_per_network(&self) -> usize {
        self.layer_dims().iter().map(|(r, c)| r * c + r).sum()
    }
}

/// Affine input map applied before the first layer:
/// `x_hat = (x - shift) / scale` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputNormalizer {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputNormalizer {
    pub fn identity(dim: usize) -> Self {
        Self { shift: vec![0.0; dim], scale: vec![1.0; dim] }
    }

    /// Floor on the fitted scale. Coordinates quieter than this under the
    /// pilot policy carry no usable signal at the state's natural units,
    /// and amplifying them saturates the first layer once training moves
    /// the visited states off the pilot distribution.
    pub const MIN_SCALE: f64 = 0.05;

    /// Per-coordinate mean and standard deviation of the rows, with the
    /// standard deviation floored at [`Self::MIN_SCALE`].
    pub fn fit(rows: &[Vec<f64>], dim: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mut shift = vec![0.0; dim];
        for row in rows {
            for (k, &v) in row.iter().enumerate() {
                shift[k] += v;
            }
        }
        for s in &mut shift {
            *s /= n;
        }
        let mut scale = vec![0.0; dim];
        for row in rows {
            for (k, &v) in row.iter().enumerate() {
                scale[k] += (v - shift[k]) * (v - shift[k]);
            }
        }
        for s in &mut scale {
            *s = (*s / n).sqrt().max(Self::MIN_SCALE);
        }
        Self { shift, scale }
    }

    pub fn inv_scale(&self) -> Vec<f64> {
        self.scale.iter().map(|s| 1.0 / s).collect()
    }
}

/// One network per horizon step, all parameters in a single flat buffer
/// (per step, per layer: row-major weights then biases).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyStack {
    pub version: u32,
    pub layout: NetworkLayout,
    pub horizon: usize,
    pub normalizer: InputNormalizer,
    pub params: Vec<f64>,
}

impl PolicyStack {
    /// Glorot-uniform weights (zero biases), deterministic in the seed.
    pub fn init(layout: NetworkLayout, horizon: usize, seed: u64) -> Self {
        assert!(horizon >= 1);
        let per_network = layout.params_per_network();
        let mut params = vec![0.0; per_network * horizon];
        for step in 0..horizon {
            let mut offset = step * per_network;
            for (layer, (rows, cols)) in layout.layer_dims().into_iter().enumerate() {
                let mut rng =
                    StreamRng::new(seed, streams::INIT + (step * 64 + layer) as u64);
                let bound = (6.0 / (rows + cols) as f64).sqrt();
                for k in 0..rows * cols {
                    params[offset + k] = (2.0 * rng.next_uniform() - 1.0) * bound;
                }
                offset += rows * cols + rows; // biases stay zero
            }
        }
        Self {
            version: 1,
            layout,
            horizon,
            normalizer: InputNormalizer::identity(layout.input_dim),
            params,
        }
    }

    pub fn network_offset(&self, step: usize) -> usize {
        debug_assert!(step < self.horizon);
        step * self.layout.params_per_network()
    }

    /// (w_offset, b_offset, rows, cols) of each layer of a step's network.
    pub fn layer_offsets(&self, step: usize) -> Vec<(usize, usize, usize, usize)> {
        let mut offset = self.network_offset(step);
        self.layout
            .layer_dims()
            .into_iter()
            .map(|(rows, cols)| {
                let entry = (offset, offset + rows * cols, rows, cols);
                offset += rows * cols + rows;
                entry
            })
            .collect()
    }

    /// Plain forward pass for rollouts and evaluation.
    pub fn forward(&self, step: usize, w: &ControlState) -> MobilityVector {
        let raw = w.to_vector();
        let mut x: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(k, &v)| (v - self.normalizer.shift[k]) / self.normalizer.scale[k])
            .collect();

        let layers = self.layer_offsets(step);
        let last = layers.len() - 1;
        for (idx, (w_off, b_off, rows, cols)) in layers.into_iter().enumerate() {
            let mut y = vec![0.0; rows];
            for r in 0..rows {
                let mut acc = self.params[b_off + r];
                for c in 0..cols {
                    acc += self.params[w_off + r * cols + c] * x[c];
                }
                y[r] = acc;
            }
            if idx < last {
                match self.layout.hidden_activation {
                    Activation::Relu => {
                        for v in &mut y {
                            *v = v.max(0.0);
                        }
                    }
                    Activation::Tanh => {
                        for v in &mut y {
                            *v = v.tanh();
                        }
                    }
                }
            } else {
                for v in &mut y {
                    *v = v.tanh();
                }
            }
            x = y;
        }
        let mut out = [0.0; 6];
        out.copy_from_slice(&x);
        MobilityVector(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy stack serializes")
    }

    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl crate::control::ControlPolicy for PolicyStack {
    fn control(&self, step: usize, w: &ControlState) -> MobilityVector {
        self.forward(step, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemic::LogOddsTriple;

    fn fixture_state() -> ControlState {
        ControlState {
            i: 0.01,
            r: 0.005,
            d: 0.001,
            log_odds: LogOddsTriple { beta: -2.0, gamma: -3.0, delta: -6.0 },
            lagged_controls: [MobilityVector::ZERO; 4],
        }
    }

    #[test]
    fn init_is_seed_deterministic_with_zero_biases() {
        let layout = NetworkLayout::default();
        let a = PolicyStack::init(layout, 5, 42);
        let b = PolicyStack::init(layout, 5, 42);
        assert_eq!(a.params, b.params);
        let c = PolicyStack::init(layout, 5, 43);
        assert_ne!(a.params, c.params);

        // Biases are zero at init.
        for step in 0..5 {
            for (w_off, b_off, rows, cols) in a.layer_offsets(step) {
                assert!(a.params[b_off..b_off + rows].iter().all(|&v| v == 0.0));
                assert!(a.params[w_off..w_off + rows * cols].iter().any(|&v| v != 0.0));
            }
        }
    }

    #[test]
    fn init_weight_variance_matches_glorot() {
        let layout = NetworkLayout::default();
        let stack = PolicyStack::init(layout, 1, 7);
        // Second layer is 64x64.
        let (w_off, _, rows, cols) = stack.layer_offsets(0)[1];
        assert_eq!((rows, cols), (64, 64));
        let bound = (6.0 / 128.0f64).sqrt();
        let want = bound * bound / 3.0;
        let ws = &stack.params[w_off..w_off + rows * cols];
        let var = ws.iter().map(|w| w * w).sum::<f64>() / ws.len() as f64;
        assert!((var - want).abs() / want < 0.10, "var {var} vs {want}");
    }

    #[test]
    fn zero_parameters_emit_zero_control() {
        let layout = NetworkLayout::small(8);
        let mut stack = PolicyStack::init(layout, 2, 1);
        stack.params.iter_mut().for_each(|p| *p = 0.0);
        let out = stack.forward(0, &fixture_state());
        assert_eq!(out, MobilityVector::ZERO);
    }

    #[test]
    fn outputs_never_leave_the_unit_cube() {
        let layout = NetworkLayout::small(16);
        let stack = PolicyStack::init(layout, 3, 9);
        let mut w = fixture_state();
        w.lagged_controls = [MobilityVector([0.9, -0.9, 0.5, -0.5, 0.2, 0.8]); 4];
        for step in 0..3 {
            let out = stack.forward(step, &w);
            assert!(out.0.iter().all(|v| v.abs() < 1.0), "{out:?}");
        }

        // Saturated weights may round tanh to exactly +-1.0 but never
        // beyond.
        let mut saturated = stack.clone();
        for p in &mut saturated.params {
            *p *= 50.0;
        }
        for step in 0..3 {
            let out = saturated.forward(step, &w);
            assert!(out.0.iter().all(|v| v.abs() <= 1.0), "{out:?}");
        }
    }

    #[test]
    fn hand_set_single_unit_matches_hand_evaluation() {
        // One hidden unit, relu, then a 6-output layer; weights chosen by
        // hand on a 30-input network.
        let layout = NetworkLayout {
            input_dim: 30,
            hidden_layers: 1,
            hidden_width: 1,
            output_dim: 6,
            hidden_activation: Activation::Relu,
        };
        let mut stack = PolicyStack::init(layout, 1, 1);
        stack.params.iter_mut().for_each(|p| *p = 0.0);
        let offsets = stack.layer_offsets(0);
        let (w0, b0, _, cols0) = offsets[0];
        assert_eq!(cols0, 30);
        stack.params[w0] = 2.0; // weight on input 0 (the I fraction)
        stack.params[b0] = 0.1;
        let (w1, b1, rows1, _) = offsets[1];
        assert_eq!(rows1, 6);
        stack.params[w1] = 1.5; // output 0 reads the hidden unit
        stack.params[b1 + 2] = -0.4; // output 2 is pure bias

        let mut state = fixture_state();
        state.i = 0.3;
        let out = stack.forward(0, &state);
        let hidden = (2.0 * 0.3 + 0.1f64).max(0.0);
        assert!((out.0[0] - (1.5 * hidden).tanh()).abs() < 1e-15);
        assert!((out.0[2] - (-0.4f64).tanh()).abs() < 1e-15);
        assert_eq!(out.0[1], 0.0);
    }

    #[test]
    fn json_round_trip_preserves_parameters() {
        let stack = PolicyStack::init(NetworkLayout::small(4), 2, 5);
        let back = PolicyStack::from_json(&stack.to_json()).unwrap();
        assert_eq!(stack, back);
    }
}

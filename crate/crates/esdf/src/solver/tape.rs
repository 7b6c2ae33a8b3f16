//! Vector-valued reverse-mode differentiation tape.
//!
//! Nodes hold small value vectors (length 1 for scalars) and are created
//! eagerly in topological order, so the backward pass is a single reverse
//! sweep. Trainable parameters live in one flat buffer outside the tape;
//! `Affine` ops reference them by offset and the backward pass accumulates
//! their gradients straight into a caller-supplied buffer.

pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    Const,
    /// y = W x + b with W (rows x cols, row-major) and b at fixed offsets
    /// in the parameter buffer.
    Affine { w_off: usize, b_off: usize, x: NodeId, rows: usize, cols: usize },
    Relu { x: NodeId },
    Tanh { x: NodeId },
    Sigmoid { x: NodeId },
    /// Componentwise y = sum_j k_j x_j over equal-length inputs.
    LinComb { terms: Vec<(f64, NodeId)> },
    /// Scalar y = c . x.
    DotConst { weights: Vec<f64>, x: NodeId },
    /// Componentwise product of equal-length inputs.
    Mul { a: NodeId, b: NodeId },
    Concat { parts: Vec<NodeId> },
    /// y_i = (x_i - shift_i) * inv_scale_i; only the scale matters backward.
    Normalize { inv_scale: Vec<f64>, x: NodeId },
    /// y = M x + bias with a constant matrix; the bias drops out backward.
    MatVecConst { matrix: Vec<f64>, rows: usize, cols: usize, x: NodeId },
    /// Scalar y = sum_i w_i * dist_i^2 with dist_i the distance of x_i
    /// outside [lower_i, upper_i]; gradient is zero at the hinge kinks.
    HingeSqSum { lower: Vec<f64>, upper: Vec<f64>, weights: Vec<f64>, x: NodeId },
}

struct Node {
    value: Vec<f64>,
    grad: Vec<f64>,
    op: Op,
}

pub struct Tape<'p> {
    params: &'p [f64],
    nodes: Vec<Node>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p [f64]) -> Self {
        Self { params, nodes: Vec::with_capacity(256) }
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        let grad = vec![0.0; value.len()];
        self.nodes.push(Node { value, grad, op });
        self.nodes.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id].value
    }

    pub fn scalar_value(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id].value.len(), 1);
        self.nodes[id].value[0]
    }

    pub fn constant(&mut self, value: Vec<f64>) -> NodeId {
        self.push(value, Op::Const)
    }

    pub fn scalar(&mut self, value: f64) -> NodeId {
        self.constant(vec![value])
    }

    pub fn affine(&mut self, w_off: usize, b_off: usize, rows: usize, cols: usize, x: NodeId) -> NodeId {
        debug_assert_eq!(self.nodes[x].value.len(), cols);
        let mut y = vec![0.0; rows];
        for r in 0..rows {
            let row = &self.params[w_off + r * cols..w_off + (r + 1) * cols];
            let mut acc = self.params[b_off + r];
            for (w, xv) in row.iter().zip(&self.nodes[x].value) {
                acc += w * xv;
            }
            y[r] = acc;
        }
        self.push(y, Op::Affine { w_off, b_off, x, rows, cols })
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let y: Vec<f64> = self.nodes[x].value.iter().map(|&v| v.max(0.0)).collect();
        self.push(y, Op::Relu { x })
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let y: Vec<f64> = self.nodes[x].value.iter().map(|&v| v.tanh()).collect();
        self.push(y, Op::Tanh { x })
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let y: Vec<f64> = self.nodes[x]
            .value
            .iter()
            .map(|&v| crate::epidemic::sigmoid(v))
            .collect();
        self.push(y, Op::Sigmoid { x })
    }

    pub fn lincomb(&mut self, terms: &[(f64, NodeId)]) -> NodeId {
        debug_assert!(!terms.is_empty());
        let len = self.nodes[terms[0].1].value.len();
        let mut y = vec![0.0; len];
        for &(k, id) in terms {
            debug_assert_eq!(self.nodes[id].value.len(), len);
            for (acc, v) in y.iter_mut().zip(&self.nodes[id].value) {
                *acc += k * v;
            }
        }
        self.push(y, Op::LinComb { terms: terms.to_vec() })
    }

    pub fn dot_const(&mut self, weights: &[f64], x: NodeId) -> NodeId {
        debug_assert_eq!(self.nodes[x].value.len(), weights.len());
        let y: f64 = weights.iter().zip(&self.nodes[x].value).map(|(w, v)| w * v).sum();
        self.push(vec![y], Op::DotConst { weights: weights.to_vec(), x })
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        debug_assert_eq!(self.nodes[a].value.len(), self.nodes[b].value.len());
        let y: Vec<f64> = self.nodes[a]
            .value
            .iter()
            .zip(&self.nodes[b].value)
            .map(|(x, z)| x * z)
            .collect();
        self.push(y, Op::Mul { a, b })
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut y = Vec::new();
        for &p in parts {
            y.extend_from_slice(&self.nodes[p].value);
        }
        self.push(y, Op::Concat { parts: parts.to_vec() })
    }

    pub fn normalize(&mut self, shift: &[f64], inv_scale: &[f64], x: NodeId) -> NodeId {
        let y: Vec<f64> = self.nodes[x]
            .value
            .iter()
            .enumerate()
            .map(|(k, &v)| (v - shift[k]) * inv_scale[k])
            .collect();
        self.push(y, Op::Normalize { inv_scale: inv_scale.to_vec(), x })
    }

    pub fn matvec_const(
        &mut self,
        matrix: &[f64],
        bias: &[f64],
        rows: usize,
        cols: usize,
        x: NodeId,
    ) -> NodeId {
        debug_assert_eq!(matrix.len(), rows * cols);
        debug_assert_eq!(self.nodes[x].value.len(), cols);
        let mut y = bias.to_vec();
        for r in 0..rows {
            for c in 0..cols {
                y[r] += matrix[r * cols + c] * self.nodes[x].value[c];
            }
        }
        self.push(y, Op::MatVecConst { matrix: matrix.to_vec(), rows, cols, x })
    }

    pub fn hinge_sq_sum(
        &mut self,
        lower: &[f64],
        upper: &[f64],
        weights: &[f64],
        x: NodeId,
    ) -> NodeId {
        let mut total = 0.0;
        for (k, &v) in self.nodes[x].value.iter().enumerate() {
            let outside = (lower[k] - v).max(v - upper[k]).max(0.0);
            total += weights[k] * outside * outside;
        }
        self.push(
            vec![total],
            Op::HingeSqSum {
                lower: lower.to_vec(),
                upper: upper.to_vec(),
                weights: weights.to_vec(),
                x,
            },
        )
    }

    /// Reverse sweep from `root` (a scalar node), accumulating parameter
    /// gradients into `param_grad`.
    pub fn backward(&mut self, root: NodeId, param_grad: &mut [f64]) {
        debug_assert_eq!(self.nodes[root].value.len(), 1);
        debug_assert_eq!(param_grad.len(), self.params.len());
        self.nodes[root].grad[0] = 1.0;
        let params = self.params;

        for i in (0..=root).rev() {
            let (before, rest) = self.nodes.split_at_mut(i);
            let node = &rest[0];
            if node.grad.iter().all(|&g| g == 0.0) {
                continue;
            }
            match &node.op {
                Op::Const => {}
                Op::Affine { w_off, b_off, x, rows, cols } => {
                    for r in 0..*rows {
                        let gy = node.grad[r];
                        if gy == 0.0 {
                            continue;
                        }
                        param_grad[b_off + r] += gy;
                        let w_row = &params[w_off + r * cols..w_off + (r + 1) * cols];
                        let g_row = &mut param_grad[w_off + r * cols..w_off + (r + 1) * cols];
                        let input = &mut before[*x];
                        for c in 0..*cols {
                            g_row[c] += gy * input.value[c];
                            input.grad[c] += gy * w_row[c];
                        }
                    }
                }
                Op::Relu { x } => {
                    for (k, &gy) in node.grad.iter().enumerate() {
                        if before[*x].value[k] > 0.0 {
                            before[*x].grad[k] += gy;
                        }
                    }
                }
                Op::Tanh { x } => {
                    for (k, &gy) in node.grad.iter().enumerate() {
                        let y = node.value[k];
                        before[*x].grad[k] += gy * (1.0 - y * y);
                    }
                }
                Op::Sigmoid { x } => {
                    for (k, &gy) in node.grad.iter().enumerate() {
                        let y = node.value[k];
                        before[*x].grad[k] += gy * y * (1.0 - y);
                    }
                }
                Op::LinComb { terms } => {
                    for &(coeff, id) in terms {
                        for (k, &gy) in node.grad.iter().enumerate() {
                            before[id].grad[k] += coeff * gy;
                        }
                    }
                }
                Op::DotConst { weights, x } => {
                    let gy = node.grad[0];
                    for (k, &w) in weights.iter().enumerate() {
                        before[*x].grad[k] += gy * w;
                    }
                }
                Op::Mul { a, b } => {
                    for (k, &gy) in node.grad.iter().enumerate() {
                        let av = before[*a].value[k];
                        let bv = before[*b].value[k];
                        before[*a].grad[k] += gy * bv;
                        before[*b].grad[k] += gy * av;
                    }
                }
                Op::Concat { parts } => {
                    let mut offset = 0;
                    for &p in parts {
                        let len = before[p].value.len();
                        for k in 0..len {
                            before[p].grad[k] += node.grad[offset + k];
                        }
                        offset += len;
                    }
                }
                Op::Normalize { inv_scale, x } => {
                    for (k, &gy) in node.grad.iter().enumerate() {
                        before[*x].grad[k] += gy * inv_scale[k];
                    }
                }
                Op::MatVecConst { matrix, rows, cols, x } => {
                    for r in 0..*rows {
                        let gy = node.grad[r];
                        if gy == 0.0 {
                            continue;
                        }
                        for c in 0..*cols {
                            before[*x].grad[c] += gy * matrix[r * cols + c];
                        }
                    }
                }
                Op::HingeSqSum { lower, upper, weights, x } => {
                    let gy = node.grad[0];
                    for (k, &v) in before[*x].value.iter().enumerate() {
                        let slope = if v < lower[k] {
                            -(lower[k] - v)
                        } else if v > upper[k] {
                            v - upper[k]
                        } else {
                            0.0
                        };
                        before[*x].grad[k] += gy * weights[k] * 2.0 * slope;
                    }
                }
            }
        }
    }
}

// A `Mul` with identical operands doubles correctly because both partials
// accumulate into the same slot, so squares need no dedicated op.

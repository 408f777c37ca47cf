//! Feedforward networks with hand-rolled backprop.
//!
//! Layers are dense with tanh hidden activations and a linear output. The
//! flat parameter view backs both the optimizers and finite-difference
//! checks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Dense network parameters. `weights[l]` is row-major `(sizes[l+1] x
/// sizes[l])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-layer activations recorded on the forward pass; `activations[0]` is
/// the input and the last entry is the linear output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Vec<f64>>,
}

/// Gradient accumulator with the same shapes as [`Mlp`].
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// Hidden layers get Xavier-uniform weights; the output layer starts at
    /// zero so a policy head opens with the uniform distribution.
    pub fn new(sizes: Vec<usize>, rng: &mut ChaCha8Rng, zero_output: bool) -> Mlp {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let last = l == sizes.len() - 2;
            let w = if last && zero_output {
                vec![0.0; fan_in * fan_out]
            } else {
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                (0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect()
            };
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Mlp { sizes, weights, biases }
    }

    /// Fully random parameters (used by gradient checks).
    pub fn random(sizes: Vec<usize>, rng: &mut ChaCha8Rng) -> Mlp {
        let mut mlp = Mlp::new(sizes, rng, false);
        for b in &mut mlp.biases {
            for v in b.iter_mut() {
                *v = rng.random_range(-0.1..0.1);
            }
        }
        mlp
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_cached(input).0
    }

    pub fn forward_cached(&self, input: &[f64]) -> (Vec<f64>, ForwardCache) {
        debug_assert_eq!(input.len(), self.sizes[0]);
        let layers = self.weights.len();
        let mut activations = Vec::with_capacity(layers + 1);
        activations.push(input.to_vec());
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &activations[l];
            let mut out = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut z = self.biases[l][o];
                for (w, a) in row.iter().zip(prev.iter()) {
                    z += w * a;
                }
                out.push(if l + 1 == layers { z } else { z.tanh() });
            }
            activations.push(out);
        }
        let output = activations.last().unwrap().clone();
        (output, ForwardCache { activations })
    }

    /// Accumulate gradients for one sample given dL/d(output).
    pub fn backward(&self, cache: &ForwardCache, d_output: &[f64], grads: &mut MlpGrads) {
        let layers = self.weights.len();
        let mut delta = d_output.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &cache.activations[l];
            for o in 0..n_out {
                grads.biases[l][o] += delta[o];
                let row = &mut grads.weights[l][o * n_in..(o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(prev.iter()) {
                    *g += delta[o] * a;
                }
            }
            if l > 0 {
                let mut prev_delta = vec![0.0; n_in];
                for o in 0..n_out {
                    let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                    for (pd, w) in prev_delta.iter_mut().zip(row.iter()) {
                        *pd += w * delta[o];
                    }
                }
                // tanh' through the hidden activation.
                for (pd, a) in prev_delta.iter_mut().zip(prev.iter()) {
                    *pd *= 1.0 - a * a;
                }
                delta = prev_delta;
            }
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.num_params());
        for l in 0..self.weights.len() {
            flat.extend_from_slice(&self.weights[l]);
            flat.extend_from_slice(&self.biases[l]);
        }
        flat
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        debug_assert_eq!(flat.len(), self.num_params());
        let mut at = 0;
        for l in 0..self.weights.len() {
            let wl = self.weights[l].len();
            self.weights[l].copy_from_slice(&flat[at..at + wl]);
            at += wl;
            let bl = self.biases[l].len();
            self.biases[l].copy_from_slice(&flat[at..at + bl]);
            at += bl;
        }
    }
}

impl MlpGrads {
    pub fn zeros_like(mlp: &Mlp) -> MlpGrads {
        MlpGrads {
            weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v *= factor;
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for l in 0..self.weights.len() {
            flat.extend_from_slice(&self.weights[l]);
            flat.extend_from_slice(&self.biases[l]);
        }
        flat
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().flatten().chain(self.biases.iter().flatten()).all(|v| v.is_finite())
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Shannon entropy of a probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Gradient-descent state for one network.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64, t: u64, m: Vec<f64>, v: Vec<f64> },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, num_params: usize) -> Optimizer {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
            OptimizerKind::Adam => Optimizer::Adam {
                lr,
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
                t: 0,
                m: vec![0.0; num_params],
                v: vec![0.0; num_params],
            },
        }
    }

    /// Descend `params` along `grads` (gradients of the loss to minimize).
    pub fn step(&mut self, params: &mut Mlp, grads: &MlpGrads) {
        let flat_grads = grads.flatten();
        let mut flat = params.flatten();
        match self {
            Optimizer::Sgd { lr } => {
                for (p, g) in flat.iter_mut().zip(&flat_grads) {
                    *p -= *lr * g;
                }
            }
            Optimizer::Adam { lr, beta1, beta2, eps, t, m, v } => {
                *t += 1;
                let b1t = 1.0 - beta1.powi(*t as i32);
                let b2t = 1.0 - beta2.powi(*t as i32);
                for i in 0..flat.len() {
                    m[i] = *beta1 * m[i] + (1.0 - *beta1) * flat_grads[i];
                    v[i] = *beta2 * v[i] + (1.0 - *beta2) * flat_grads[i] * flat_grads[i];
                    let m_hat = m[i] / b1t;
                    let v_hat = v[i] / b2t;
                    flat[i] -= *lr * m_hat / (v_hat.sqrt() + *eps);
                }
            }
        }
        params.assign_flat(&flat);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zero_output_layer_gives_uniform_softmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = Mlp::new(vec![4, 8, 3], &mut rng, true);
        let p = softmax(&mlp.forward(&[0.3, -0.2, 0.9, 0.0]));
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_extremes_and_normalization() {
        let p = softmax(&[10.0, -10.0]);
        assert!(p[0] > 0.999_999);
        assert!(p[1] < 1e-8);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn entropy_bounds() {
        let uniform = vec![0.25; 4];
        assert!((entropy(&uniform) - 4.0f64.ln()).abs() < 1e-12);
        let peaked = vec![1.0, 0.0, 0.0, 0.0];
        assert_eq!(entropy(&peaked), 0.0);
    }

    #[test]
    fn flatten_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mlp = Mlp::random(vec![3, 5, 2], &mut rng);
        let flat = mlp.flatten();
        assert_eq!(flat.len(), mlp.num_params());
        let mut other = Mlp::new(vec![3, 5, 2], &mut rng, false);
        other.assign_flat(&flat);
        assert_eq!(mlp, other);
    }

    #[test]
    fn backward_matches_finite_difference_on_scalar_loss() {
        // Loss = sum of outputs; gradient check on a tiny net.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mlp = Mlp::random(vec![3, 4, 2], &mut rng);
        let x = [0.1, -0.5, 0.8];

        let mut grads = MlpGrads::zeros_like(&mlp);
        let (_, cache) = mlp.forward_cached(&x);
        mlp.backward(&cache, &[1.0, 1.0], &mut grads);
        let analytic = grads.flatten();

        let flat = mlp.flatten();
        let h = 1e-6;
        for (i, &a) in analytic.iter().enumerate() {
            let mut plus = flat.clone();
            plus[i] += h;
            let mut minus = flat.clone();
            minus[i] -= h;
            let mut net = mlp.clone();
            net.assign_flat(&plus);
            let lp: f64 = net.forward(&x).iter().sum();
            net.assign_flat(&minus);
            let lm: f64 = net.forward(&x).iter().sum();
            let numeric = (lp - lm) / (2.0 * h);
            assert!(
                (a - numeric).abs() < 1e-6,
                "param {i}: analytic {a} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn sgd_moves_against_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut mlp = Mlp::random(vec![2, 2], &mut rng);
        let before = mlp.flatten();
        let mut grads = MlpGrads::zeros_like(&mlp);
        grads.weights[0][0] = 1.0;
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, mlp.num_params());
        opt.step(&mut mlp, &grads);
        let after = mlp.flatten();
        assert!((after[0] - (before[0] - 0.1)).abs() < 1e-15);
        assert_eq!(after[1], before[1]);
    }
}

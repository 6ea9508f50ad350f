//! Dense feed-forward networks with tanh hidden layers.
//!
//! Parameters live in plain nested `Vec<f64>` so they serialize directly
//! into checkpoints and flatten losslessly for the optimizer. Reverse-mode
//! gradients are hand-written; the network shape is fixed at construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A multilayer perceptron. Hidden layers apply tanh, the output layer is
/// linear. `weights[l]` is row-major `sizes[l+1] x sizes[l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Post-activation values captured by [`Mlp::forward`] for the backward
/// pass. `layers[0]` is the input, `layers.last()` the network output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    layers: Vec<Vec<f64>>,
}

impl ForwardCache {
    /// The cached network output.
    pub fn output(&self) -> &[f64] {
        self.layers.last().expect("cache always holds the input layer")
    }
}

/// Parameter gradients mirroring the [`Mlp`] layout, plus the gradient
/// with respect to the network input.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input: Vec<f64>,
}

impl Mlp {
    /// Builds a network with uniform `U[-1/sqrt(fan_in), 1/sqrt(fan_in)]`
    /// weights and zero biases. `sizes` lists layer widths, input first.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least an input and an output layer");
        assert!(sizes.iter().all(|&s| s > 0), "zero-width layer");
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        Self { sizes: sizes.to_vec(), weights, biases }
    }

    /// Multiplies the output layer's weights and biases by `factor`.
    /// Policy networks use 0.01 so the initial policy is near uniform.
    pub fn scale_final_layer(&mut self, factor: f64) {
        for w in self.weights.last_mut().expect("at least one layer") {
            *w *= factor;
        }
        for b in self.biases.last_mut().expect("at least one layer") {
            *b *= factor;
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("sizes never empty")
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Runs the network, returning every post-activation layer for reuse
    /// in [`Mlp::backward`].
    pub fn forward(&self, input: &[f64]) -> ForwardCache {
        assert_eq!(input.len(), self.sizes[0], "input width mismatch");
        let depth = self.sizes.len() - 1;
        let mut layers = Vec::with_capacity(depth + 1);
        layers.push(input.to_vec());
        for l in 0..depth {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &layers[l];
            let mut next = self.biases[l].clone();
            for o in 0..fan_out {
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                next[o] += row.iter().zip(prev).map(|(w, x)| w * x).sum::<f64>();
            }
            if l + 1 < depth {
                for v in &mut next {
                    *v = v.tanh();
                }
            }
            layers.push(next);
        }
        ForwardCache { layers }
    }

    /// Backpropagates `upstream` (dLoss/dOutput) through the cached forward
    /// pass, producing parameter gradients and the input gradient.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> MlpGradients {
        let depth = self.sizes.len() - 1;
        assert_eq!(cache.layers.len(), depth + 1, "cache depth mismatch");
        assert_eq!(upstream.len(), self.output_dim(), "upstream width mismatch");
        let mut weights: Vec<Vec<f64>> =
            self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut biases: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut delta = upstream.to_vec();
        for l in (0..depth).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &cache.layers[l];
            let mut below = vec![0.0; fan_in];
            for o in 0..fan_out {
                biases[l][o] = delta[o];
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                let grad_row = &mut weights[l][o * fan_in..(o + 1) * fan_in];
                for i in 0..fan_in {
                    grad_row[i] = delta[o] * prev[i];
                    below[i] += row[i] * delta[o];
                }
            }
            if l > 0 {
                // Hidden activations are tanh; its derivative falls out of
                // the cached post-activation value.
                for (d, a) in below.iter_mut().zip(&cache.layers[l]) {
                    *d *= 1.0 - a * a;
                }
            }
            delta = below;
        }
        MlpGradients { weights, biases, input: delta }
    }

    /// Copies every parameter into one flat vector, layer by layer,
    /// weights before biases.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for l in 0..self.weights.len() {
            flat.extend_from_slice(&self.weights[l]);
            flat.extend_from_slice(&self.biases[l]);
        }
        flat
    }

    /// Overwrites every parameter from a flat vector laid out as in
    /// [`Mlp::flatten_params`].
    pub fn load_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count(), "flat parameter width mismatch");
        let mut at = 0;
        for l in 0..self.weights.len() {
            let w = self.weights[l].len();
            self.weights[l].copy_from_slice(&flat[at..at + w]);
            at += w;
            let b = self.biases[l].len();
            self.biases[l].copy_from_slice(&flat[at..at + b]);
            at += b;
        }
    }
}

impl MlpGradients {
    /// Flattens gradients in the same order as [`Mlp::flatten_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for l in 0..self.weights.len() {
            flat.extend_from_slice(&self.weights[l]);
            flat.extend_from_slice(&self.biases[l]);
        }
        flat
    }

    /// Adds another gradient set elementwise, for accumulation over a
    /// minibatch.
    pub fn accumulate(&mut self, other: &MlpGradients) {
        for (mine, theirs) in self.weights.iter_mut().zip(&other.weights) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t;
            }
        }
        for (mine, theirs) in self.biases.iter_mut().zip(&other.biases) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t;
            }
        }
        for (m, t) in self.input.iter_mut().zip(&other.input) {
            *m += t;
        }
    }

    /// Scales every gradient component, e.g. by 1/batch.
    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for g in w {
                *g *= factor;
            }
        }
        for b in &mut self.biases {
            for g in b {
                *g *= factor;
            }
        }
        for g in &mut self.input {
            *g *= factor;
        }
    }
}

//! Policy distribution heads.
//!
//! The scheduler picks one of finitely many channel assignments through a
//! categorical head over logits; the power allocator draws a vector from a
//! diagonal Gaussian whose mean is squashed into the legal power interval.
//! Both heads expose analytic gradients of log-probability and entropy so
//! the policy networks can be updated without generic autodiff.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Lower clamp for the Gaussian head's log standard deviation.
pub const LOG_STD_MIN: f64 = -5.0;
/// Upper clamp for the Gaussian head's log standard deviation.
pub const LOG_STD_MAX: f64 = 2.0;

/// Numerically stable `log(softmax(logits))`.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    assert!(!logits.is_empty(), "empty logit vector");
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|z| z - log_sum).collect()
}

/// Softmax probabilities; strictly positive, summing to 1.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).iter().map(|lp| lp.exp()).collect()
}

/// Entropy of the categorical distribution over `logits`.
pub fn categorical_entropy(logits: &[f64]) -> f64 {
    log_softmax(logits).iter().map(|lp| -lp.exp() * lp).sum()
}

/// Log-probability of one action under the categorical distribution.
pub fn categorical_log_prob(logits: &[f64], action: usize) -> f64 {
    log_softmax(logits)[action]
}

/// Draws an action by inverse-CDF over the softmax probabilities.
pub fn categorical_sample<R: Rng>(logits: &[f64], rng: &mut R) -> usize {
    let probs = softmax(logits);
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (a, p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return a;
        }
    }
    probs.len() - 1
}

/// Gradient of `c_lp * logProb(action) + c_h * entropy` with respect to the
/// logits. Uses `dlogp_a/dz_i = [i = a] - p_i` and
/// `dH/dz_i = -p_i (log p_i + H)`.
pub fn categorical_logits_grad(
    logits: &[f64],
    action: usize,
    c_lp: f64,
    c_h: f64,
) -> Vec<f64> {
    assert!(action < logits.len(), "action index out of range");
    let log_probs = log_softmax(logits);
    let entropy: f64 = log_probs.iter().map(|lp| -lp.exp() * lp).sum();
    log_probs
        .iter()
        .enumerate()
        .map(|(i, lp)| {
            let p = lp.exp();
            let indicator = if i == action { 1.0 } else { 0.0 };
            c_lp * (indicator - p) + c_h * (-p * (lp + entropy))
        })
        .collect()
}

/// Diagonal Gaussian head for power vectors. The raw network output is
/// squashed so the mean always lies inside `[low, high]`; the log standard
/// deviation is a learnable vector independent of the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianHead {
    pub log_std: Vec<f64>,
    pub low: f64,
    pub high: f64,
}

/// One draw from the head: the raw sample feeds later updates, the clipped
/// copy is what the environment executes.
#[derive(Debug, Clone)]
pub struct GaussianSample {
    pub pre_clip: Vec<f64>,
    pub clipped: Vec<f64>,
    pub log_prob: f64,
    pub entropy: f64,
}

/// Gradients of a scalar through the Gaussian head: with respect to the raw
/// (pre-squash) mean inputs and to the log-std vector.
#[derive(Debug, Clone)]
pub struct GaussianGrads {
    pub raw: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl GaussianHead {
    /// A head of dimension `dim` bounded to `[low, high]`, log-std zero.
    pub fn new(dim: usize, low: f64, high: f64) -> Self {
        assert!(dim > 0, "zero-dimensional head");
        assert!(low < high, "power bounds inverted");
        Self { log_std: vec![0.0; dim], low, high }
    }

    pub fn dim(&self) -> usize {
        self.log_std.len()
    }

    /// Squashes raw outputs into the mean vector:
    /// `low + (tanh(raw)+1)/2 * (high - low)`.
    pub fn mean(&self, raw: &[f64]) -> Vec<f64> {
        assert_eq!(raw.len(), self.dim(), "raw output width mismatch");
        raw.iter().map(|u| self.low + (u.tanh() + 1.0) / 2.0 * (self.high - self.low)).collect()
    }

    /// Log-density of the pre-clip sample `x` and the distribution entropy
    /// for the mean produced by `raw`.
    pub fn log_prob_entropy(&self, raw: &[f64], x: &[f64]) -> (f64, f64) {
        assert_eq!(x.len(), self.dim(), "sample width mismatch");
        let mean = self.mean(raw);
        let mut log_prob = -(self.dim() as f64) / 2.0 * (2.0 * std::f64::consts::PI).ln();
        let mut entropy = 0.0;
        for j in 0..self.dim() {
            let std = self.log_std[j].exp();
            let z = (x[j] - mean[j]) / std;
            log_prob -= 0.5 * z * z + self.log_std[j];
            entropy += self.log_std[j] + 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        }
        (log_prob, entropy)
    }

    /// Samples a power vector. The log-probability is taken on the raw
    /// sample before clipping into the legal interval.
    pub fn sample<R: Rng>(&self, raw: &[f64], rng: &mut R) -> GaussianSample {
        let mean = self.mean(raw);
        let pre_clip: Vec<f64> = mean
            .iter()
            .zip(&self.log_std)
            .map(|(m, ls)| m + ls.exp() * standard_normal(rng))
            .collect();
        let clipped: Vec<f64> = pre_clip.iter().map(|x| x.clamp(self.low, self.high)).collect();
        let (log_prob, entropy) = self.log_prob_entropy(raw, &pre_clip);
        GaussianSample { pre_clip, clipped, log_prob, entropy }
    }

    /// Gradient of `c_lp * logProb(x) + c_h * entropy` with respect to the
    /// raw mean inputs and the log-std vector.
    pub fn grads(&self, raw: &[f64], x: &[f64], c_lp: f64, c_h: f64) -> GaussianGrads {
        let mean = self.mean(raw);
        let half_range = (self.high - self.low) / 2.0;
        let mut d_raw = vec![0.0; self.dim()];
        let mut d_log_std = vec![0.0; self.dim()];
        for j in 0..self.dim() {
            let var = (2.0 * self.log_std[j]).exp();
            let centered = x[j] - mean[j];
            // dlogp/dmean = (x - mean)/var, chained through the tanh squash.
            let t = raw[j].tanh();
            d_raw[j] = c_lp * (centered / var) * half_range * (1.0 - t * t);
            // dlogp/dlogstd = (x - mean)^2/var - 1; dH/dlogstd = 1.
            d_log_std[j] = c_lp * (centered * centered / var - 1.0) + c_h;
        }
        GaussianGrads { raw: d_raw, log_std: d_log_std }
    }

    /// Clamps the log-std vector into its legal interval, applied after
    /// every optimizer step.
    pub fn clamp_log_std(&mut self) {
        for ls in &mut self.log_std {
            *ls = ls.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }
}

/// One standard normal draw via the Box-Muller transform.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

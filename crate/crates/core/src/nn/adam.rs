//! Bias-corrected Adam over flat parameter vectors.

use serde::{Deserialize, Serialize};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Adam optimizer state for one parameter group. Moments are kept flat in
/// the same layout as the parameters they update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64, param_count: usize) -> Self {
        assert!(learning_rate > 0.0, "learning rate must be positive");
        Self { learning_rate, step: 0, m: vec![0.0; param_count], v: vec![0.0; param_count] }
    }

    /// Descends `params` along `grads` one step. Pass the gradient of the
    /// quantity to MINIMIZE.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter width mismatch");
        assert_eq!(grads.len(), self.m.len(), "gradient width mismatch");
        self.step += 1;
        let t = self.step as i32;
        let m_corr = 1.0 - BETA1.powi(t);
        let v_corr = 1.0 - BETA2.powi(t);
        for k in 0..params.len() {
            self.m[k] = BETA1 * self.m[k] + (1.0 - BETA1) * grads[k];
            self.v[k] = BETA2 * self.v[k] + (1.0 - BETA2) * grads[k] * grads[k];
            let m_hat = self.m[k] / m_corr;
            let v_hat = self.v[k] / v_corr;
            params[k] -= self.learning_rate * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }
}

//! The two stage policies: categorical channel assignment and Gaussian
//! power allocation.

use crate::env::actions::uplink_action_count;
use crate::env::ScenarioConfig;
use crate::nn::{
    categorical_log_prob, categorical_sample, log_softmax, softmax, GaussianHead, Mlp,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Scale applied to the final layer of policy networks at construction so
/// the initial action distributions are near uniform.
const POLICY_FINAL_SCALE: f64 = 0.01;

/// Picks one encoded channel assignment out of `(M+1)^N` via a categorical
/// distribution over network logits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UplinkActor {
    pub net: Mlp,
}

/// Emits a raw mean vector that the Gaussian head squashes into the legal
/// power interval; the log-std lives in the head and trains with the net.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DownlinkActor {
    pub net: Mlp,
    pub head: GaussianHead,
}

/// One sampled power decision.
#[derive(Debug, Clone)]
pub struct PowerSample {
    /// The raw Gaussian draw; log-probabilities refer to this vector.
    pub pre_clip: Vec<f64>,
    /// The draw clipped into bounds, as executed by the environment.
    pub clipped: Vec<f64>,
    pub log_prob: f64,
}

impl UplinkActor {
    pub fn new<R: Rng>(cfg: &ScenarioConfig, hidden: &[usize], rng: &mut R) -> Self {
        let actions = usize::try_from(uplink_action_count(cfg.num_users, cfg.num_channels))
            .expect("uplink action space too large to enumerate");
        let mut sizes = vec![cfg.uplink_state_dim()];
        sizes.extend_from_slice(hidden);
        sizes.push(actions);
        let mut net = Mlp::new(&sizes, rng);
        net.scale_final_layer(POLICY_FINAL_SCALE);
        Self { net }
    }

    /// Samples an encoded assignment and its log-probability.
    pub fn sample<R: Rng>(&self, s_u: &[f64], rng: &mut R) -> (usize, f64) {
        let logits = self.net.forward(s_u).output().to_vec();
        let action = categorical_sample(&logits, rng);
        (action, categorical_log_prob(&logits, action))
    }

    /// Highest-probability assignment, ties to the lowest index.
    pub fn greedy(&self, s_u: &[f64]) -> usize {
        let logits = self.net.forward(s_u).output().to_vec();
        let mut best = 0;
        for (a, &z) in logits.iter().enumerate() {
            if z > logits[best] {
                best = a;
            }
        }
        best
    }

    /// Action probabilities at `s_u`, for diagnostics.
    pub fn probabilities(&self, s_u: &[f64]) -> Vec<f64> {
        softmax(self.net.forward(s_u).output())
    }

    /// Log-probability of a stored action under the current parameters.
    pub fn log_prob(&self, s_u: &[f64], action: usize) -> f64 {
        log_softmax(self.net.forward(s_u).output())[action]
    }
}

impl DownlinkActor {
    pub fn new<R: Rng>(cfg: &ScenarioConfig, hidden: &[usize], rng: &mut R) -> Self {
        let mut sizes = vec![cfg.downlink_state_dim()];
        sizes.extend_from_slice(hidden);
        sizes.push(cfg.num_users);
        let mut net = Mlp::new(&sizes, rng);
        net.scale_final_layer(POLICY_FINAL_SCALE);
        Self { net, head: GaussianHead::new(cfg.num_users, cfg.dl_power_min, cfg.dl_power_max) }
    }

    /// Samples a power vector; the clipped copy is safe to execute.
    pub fn sample<R: Rng>(&self, s_d: &[f64], rng: &mut R) -> PowerSample {
        let raw = self.net.forward(s_d).output().to_vec();
        let draw = self.head.sample(&raw, rng);
        PowerSample { pre_clip: draw.pre_clip, clipped: draw.clipped, log_prob: draw.log_prob }
    }

    /// Deterministic power decision: the squashed mean, already within
    /// bounds.
    pub fn greedy(&self, s_d: &[f64]) -> Vec<f64> {
        self.head.mean(self.net.forward(s_d).output())
    }

    /// Log-probability of a stored pre-clip draw under current parameters.
    pub fn log_prob(&self, s_d: &[f64], pre_clip: &[f64]) -> f64 {
        let raw = self.net.forward(s_d).output().to_vec();
        self.head.log_prob_entropy(&raw, pre_clip).0
    }

    /// Flat trainable parameters: network weights, then the log-std tail.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut flat = self.net.flatten_params();
        flat.extend_from_slice(&self.head.log_std);
        flat
    }

    /// Loads parameters in [`DownlinkActor::flatten_params`] layout and
    /// clamps the log-std into its legal interval.
    pub fn load_params(&mut self, flat: &[f64]) {
        let net_len = self.net.param_count();
        assert_eq!(flat.len(), net_len + self.head.dim(), "parameter width mismatch");
        self.net.load_params(&flat[..net_len]);
        self.head.log_std.copy_from_slice(&flat[net_len..]);
        self.head.clamp_log_std();
    }

    pub fn param_count(&self) -> usize {
        self.net.param_count() + self.head.dim()
    }
}

//! Value estimation with one or more input-specific branches.
//!
//! The hybrid critic holds three branches reading the uplink state, the
//! downlink state, and their concatenation; the baselines reuse the same
//! machinery with two branches (independent agents) or one (centralized).
//! Branch parameters are disjoint, so one optimizer over the concatenated
//! parameter vector steps every branch from the summed loss in a single
//! pass.

use crate::aahc::buffer::TrainRecord;
use crate::env::ScenarioConfig;
use crate::nn::{Adam, Mlp};
use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which observation a value branch reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchInput {
    Uplink,
    Downlink,
    Joint,
}

impl BranchInput {
    pub fn dim(&self, cfg: &ScenarioConfig) -> usize {
        match self {
            BranchInput::Uplink => cfg.uplink_state_dim(),
            BranchInput::Downlink => cfg.downlink_state_dim(),
            BranchInput::Joint => cfg.uplink_state_dim() + cfg.downlink_state_dim(),
        }
    }

    /// Extracts this branch's observation from a rollout record.
    pub fn state(&self, record: &TrainRecord) -> Vec<f64> {
        match self {
            BranchInput::Uplink => record.s_u.clone(),
            BranchInput::Downlink => record.s_d.clone(),
            BranchInput::Joint => record.joint_state(),
        }
    }
}

/// One value branch: its input kind, the reward mix it learns to predict,
/// and its network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueBranch {
    pub input: BranchInput,
    pub reward_weights: [f64; 3],
    pub net: Mlp,
}

/// A multi-branch critic with a frozen target copy of every branch and a
/// single optimizer across all branch parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Critic {
    pub branches: Vec<ValueBranch>,
    pub target_nets: Vec<Mlp>,
    pub loss_weights: Vec<f64>,
    pub opt: Adam,
}

impl Critic {
    /// Builds branches per `specs` (input kind, reward weights, loss
    /// weight), with `hidden` layer widths and a shared learning rate.
    pub fn new<R: Rng>(
        specs: &[(BranchInput, [f64; 3], f64)],
        cfg: &ScenarioConfig,
        hidden: &[usize],
        learning_rate: f64,
        rng: &mut R,
    ) -> Self {
        assert!(!specs.is_empty(), "critic needs at least one branch");
        let mut branches = Vec::with_capacity(specs.len());
        let mut loss_weights = Vec::with_capacity(specs.len());
        for &(input, reward_weights, loss_weight) in specs {
            let mut sizes = vec![input.dim(cfg)];
            sizes.extend_from_slice(hidden);
            sizes.push(1);
            branches.push(ValueBranch { input, reward_weights, net: Mlp::new(&sizes, rng) });
            loss_weights.push(loss_weight);
        }
        let target_nets = branches.iter().map(|b| b.net.clone()).collect();
        let param_count: usize = branches.iter().map(|b| b.net.param_count()).sum();
        let opt = Adam::new(learning_rate, param_count);
        Self { branches, target_nets, loss_weights, opt }
    }

    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    /// Current-network value of `state` under branch `b`.
    pub fn value(&self, b: usize, state: &[f64]) -> f64 {
        self.branches[b].net.forward(state).output()[0]
    }

    /// Target-network (frozen copy) value of `state` under branch `b`.
    pub fn target_value(&self, b: usize, state: &[f64]) -> f64 {
        self.target_nets[b].forward(state).output()[0]
    }

    /// Copies the live branch networks over the target copies.
    pub fn sync_targets(&mut self) {
        self.target_nets = self.branches.iter().map(|b| b.net.clone()).collect();
    }

    fn flatten_params(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for b in &self.branches {
            flat.extend(b.net.flatten_params());
        }
        flat
    }

    fn load_params(&mut self, flat: &[f64]) {
        let mut at = 0;
        for b in &mut self.branches {
            let len = b.net.param_count();
            b.net.load_params(&flat[at..at + len]);
            at += len;
        }
        assert_eq!(at, flat.len(), "critic parameter width mismatch");
    }

    /// Regresses every branch onto its frozen targets: `epochs` passes
    /// over shuffled minibatches, minimizing the loss-weighted sum of
    /// per-branch mean squared errors in one optimizer step per batch.
    /// `data[b]` holds `(state, target)` pairs, index-aligned across
    /// branches. Returns the per-branch unweighted mean squared error
    /// observed during the final epoch.
    pub fn update<R: Rng>(
        &mut self,
        data: &[Vec<(Vec<f64>, f64)>],
        epochs: usize,
        batch_size: usize,
        shuffle_rng: &mut R,
    ) -> Result<Vec<f64>> {
        assert_eq!(data.len(), self.num_branches(), "branch data mismatch");
        let t_len = data[0].len();
        assert!(data.iter().all(|d| d.len() == t_len), "branches must be index-aligned");
        let mut indices: Vec<usize> = (0..t_len).collect();
        let mut last_epoch_losses = vec![0.0; self.num_branches()];
        for epoch in 0..epochs {
            indices.shuffle(shuffle_rng);
            let mut epoch_losses = vec![0.0; self.num_branches()];
            let mut batches = 0usize;
            for chunk in indices.chunks_exact(batch_size) {
                let mut flat_grads = Vec::with_capacity(self.flatten_params().len());
                for (b, branch) in self.branches.iter().enumerate() {
                    let mut grads: Option<crate::nn::MlpGradients> = None;
                    let mut mse = 0.0;
                    for &i in chunk {
                        let (state, target) = &data[b][i];
                        let cache = branch.net.forward(state);
                        let err = cache.output()[0] - target;
                        mse += err * err;
                        let upstream =
                            [self.loss_weights[b] * 2.0 * err / batch_size as f64];
                        let g = branch.net.backward(&cache, &upstream);
                        match &mut grads {
                            Some(acc) => acc.accumulate(&g),
                            None => grads = Some(g),
                        }
                    }
                    mse /= batch_size as f64;
                    if !mse.is_finite() {
                        bail!(
                            "non-finite critic loss on branch {b} \
                             (epoch {epoch}): {mse}"
                        );
                    }
                    epoch_losses[b] += mse;
                    flat_grads.extend(grads.expect("non-empty batch").flatten());
                }
                let mut params = self.flatten_params();
                self.opt.step(&mut params, &flat_grads);
                self.load_params(&params);
                batches += 1;
            }
            if batches > 0 && epoch == epochs - 1 {
                for (l, total) in last_epoch_losses.iter_mut().zip(&epoch_losses) {
                    *l = total / batches as f64;
                }
            }
        }
        Ok(last_epoch_losses)
    }
}

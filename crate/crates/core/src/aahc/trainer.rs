//! Rollout collection and clipped-surrogate training for the coupled
//! two-stage schedulers.
//!
//! One trainer owns the environment, the two stage actors, and a
//! multi-branch critic. Three wiring plans share the machinery:
//!
//! * the hybrid plan trains three value branches (uplink state, downlink
//!   state, joint state) and drives each actor with its own stage
//!   advantage plus the shared one;
//! * the independent plan trains two self-contained agents whose branch
//!   rewards fold the shared component into each stage;
//! * the centralized plan trains one joint-state branch on the summed
//!   reward and drives both actors with its advantage.
//!
//! Updates follow the usual clipped-surrogate recipe: fill the trajectory
//! buffer to its floor (finishing the open episode), compute advantages
//! and value targets once from the frozen target critic, run several
//! epochs of shuffled minibatches over both actors and the critic, then
//! empty the buffer and refill.

use crate::aahc::buffer::{TrainRecord, TrajectoryBuffer};
use crate::aahc::critic::{BranchInput, Critic};
use crate::aahc::gae::compute_gae;
use crate::aahc::hyper::Hyperparams;
use crate::aahc::policy::{DownlinkActor, UplinkActor};
use crate::aahc::ppo::ppo_clip_grad;
use crate::env::actions::decode_uplink_action;
use crate::env::{Env, KpiSummary, ScenarioConfig};
use crate::harness::rng::RngStreams;
use crate::nn::{categorical_logits_grad, log_softmax, Adam, MlpGradients};
use anyhow::{bail, ensure, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// The selectable training schemes plus the untrained baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Asynchronous actors with the three-branch hybrid critic.
    Aahc,
    /// Two independent actor-critic agents, one per stage.
    IteRl,
    /// One centralized joint-state critic shared by both actors.
    Ctrl,
    /// Uniform assignment and power draws, nothing trained.
    Random,
}

/// How a scheme wires rewards and advantages: the critic branch specs
/// (input kind, reward weights, loss weight) and the per-branch mixing
/// coefficients that form each actor's advantage.
#[derive(Debug, Clone)]
pub struct BranchPlan {
    pub specs: Vec<(BranchInput, [f64; 3], f64)>,
    pub ul_mix: Vec<f64>,
    pub dl_mix: Vec<f64>,
}

impl Algorithm {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "aahc" => Some(Algorithm::Aahc),
            "iterl" => Some(Algorithm::IteRl),
            "ctrl" => Some(Algorithm::Ctrl),
            "random" => Some(Algorithm::Random),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Aahc => "aahc",
            Algorithm::IteRl => "iterl",
            Algorithm::Ctrl => "ctrl",
            Algorithm::Random => "random",
        }
    }

    pub fn is_trainable(&self) -> bool {
        !matches!(self, Algorithm::Random)
    }

    /// The critic layout and advantage mixing of this scheme. Loss
    /// weights apply to the hybrid plan's three branches; the baselines
    /// weight their branches equally.
    pub fn branch_plan(&self, head_weights: [f64; 3]) -> BranchPlan {
        let [w_u, w_d, w_g] = head_weights;
        match self {
            Algorithm::Aahc => BranchPlan {
                specs: vec![
                    (BranchInput::Uplink, [1.0, 0.0, 0.0], w_u),
                    (BranchInput::Downlink, [0.0, 1.0, 0.0], w_d),
                    (BranchInput::Joint, [0.0, 0.0, 1.0], w_g),
                ],
                ul_mix: vec![1.0, 0.0, 1.0],
                dl_mix: vec![0.0, 1.0, 1.0],
            },
            Algorithm::IteRl => BranchPlan {
                specs: vec![
                    (BranchInput::Uplink, [1.0, 0.0, 1.0], 1.0),
                    (BranchInput::Downlink, [0.0, 1.0, 1.0], 1.0),
                ],
                ul_mix: vec![1.0, 0.0],
                dl_mix: vec![0.0, 1.0],
            },
            Algorithm::Ctrl => BranchPlan {
                specs: vec![(BranchInput::Joint, [1.0, 1.0, 1.0], 1.0)],
                ul_mix: vec![1.0],
                dl_mix: vec![1.0],
            },
            Algorithm::Random => panic!("the random baseline has no training plan"),
        }
    }
}

/// Aggregates logged once per buffer cycle (fill plus update phase).
/// Reward means run over the cycle's iterations; the KPI fields are means
/// over the episodes completed inside the cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleStats {
    /// Environment iterations consumed so far.
    pub env_step: usize,
    /// Episodes completed during this cycle.
    pub episodes: usize,
    pub mean_ru: f64,
    pub mean_rd: f64,
    pub mean_rg: f64,
    pub mean_iterations: f64,
    pub retrans_pct: f64,
    pub max_ul_rate_gbps: f64,
    pub energy_j: f64,
    pub total_delay_ms: f64,
    /// Milliseconds since training started, taken as the cycle closed.
    pub wall_clock_ms: f64,
    /// Final-epoch mean squared error per critic branch.
    pub critic_losses: Vec<f64>,
}

/// Reward and KPI accumulation across one buffer cycle.
#[derive(Debug, Default)]
struct CycleAccum {
    steps: usize,
    sum_ru: f64,
    sum_rd: f64,
    sum_rg: f64,
    episodes: Vec<KpiSummary>,
}

impl CycleAccum {
    fn add_step(&mut self, r_u: f64, r_d: f64, r_g: f64) {
        self.steps += 1;
        self.sum_ru += r_u;
        self.sum_rd += r_d;
        self.sum_rg += r_g;
    }

    fn finish(self, env_step: usize, wall_clock_ms: f64, critic_losses: Vec<f64>) -> CycleStats {
        let n = self.steps.max(1) as f64;
        let e = self.episodes.len().max(1) as f64;
        CycleStats {
            env_step,
            episodes: self.episodes.len(),
            mean_ru: self.sum_ru / n,
            mean_rd: self.sum_rd / n,
            mean_rg: self.sum_rg / n,
            mean_iterations: self.episodes.iter().map(|s| s.iterations as f64).sum::<f64>() / e,
            retrans_pct: self.episodes.iter().map(|s| s.retrans_pct).sum::<f64>() / e,
            max_ul_rate_gbps: self.episodes.iter().map(|s| s.max_ul_rate_gbps).sum::<f64>() / e,
            energy_j: self.episodes.iter().map(|s| s.energy_j).sum::<f64>() / e,
            total_delay_ms: self.episodes.iter().map(|s| s.total_delay_ms).sum::<f64>() / e,
            wall_clock_ms,
            critic_losses,
        }
    }
}

/// Serializable snapshot of everything a trainer learns, sufficient to
/// resume updates or to evaluate the trained policies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainerState {
    pub algo: Algorithm,
    pub hyper: Hyperparams,
    pub ul_actor: UplinkActor,
    pub dl_actor: DownlinkActor,
    pub critic: Critic,
    pub opt_ul: Adam,
    pub opt_dl: Adam,
    pub env_step: usize,
    pub update_phases: usize,
}

/// One training run: environment, actors, critic, optimizers, counters.
#[derive(Debug)]
pub struct Trainer {
    pub algo: Algorithm,
    pub hyper: Hyperparams,
    pub env: Env,
    pub ul_actor: UplinkActor,
    pub dl_actor: DownlinkActor,
    pub critic: Critic,
    pub opt_ul: Adam,
    pub opt_dl: Adam,
    ul_mix: Vec<f64>,
    dl_mix: Vec<f64>,
    pub env_step: usize,
    pub update_phases: usize,
}

impl Trainer {
    /// Builds a fresh trainer. The uplink policy stream initializes the
    /// assignment actor; the downlink policy stream initializes the power
    /// actor and then the critic, so each actor's starting weights depend
    /// only on its own stream.
    pub fn new(
        algo: Algorithm,
        config: ScenarioConfig,
        hyper: Hyperparams,
        streams: &mut RngStreams,
    ) -> Self {
        assert!(algo.is_trainable(), "the random baseline has nothing to train");
        hyper.validate();
        let plan = algo.branch_plan(hyper.head_weights);
        let ul_actor = UplinkActor::new(&config, &hyper.hidden, &mut streams.policy_ul.rng);
        let dl_actor = DownlinkActor::new(&config, &hyper.hidden, &mut streams.policy_dl.rng);
        let critic = Critic::new(
            &plan.specs,
            &config,
            &hyper.hidden,
            hyper.lr_critic,
            &mut streams.policy_dl.rng,
        );
        let opt_ul = Adam::new(hyper.lr_actor_ul, ul_actor.net.param_count());
        let opt_dl = Adam::new(hyper.lr_actor_dl, dl_actor.param_count());
        Self {
            algo,
            hyper,
            env: Env::new(config),
            ul_actor,
            dl_actor,
            critic,
            opt_ul,
            opt_dl,
            ul_mix: plan.ul_mix,
            dl_mix: plan.dl_mix,
            env_step: 0,
            update_phases: 0,
        }
    }

    /// Snapshots the learned parameters and counters.
    pub fn state(&self) -> TrainerState {
        TrainerState {
            algo: self.algo,
            hyper: self.hyper.clone(),
            ul_actor: self.ul_actor.clone(),
            dl_actor: self.dl_actor.clone(),
            critic: self.critic.clone(),
            opt_ul: self.opt_ul.clone(),
            opt_dl: self.opt_dl.clone(),
            env_step: self.env_step,
            update_phases: self.update_phases,
        }
    }

    /// Rebuilds a trainer around a snapshot, checking that the network
    /// shapes fit `config`.
    pub fn from_state(config: ScenarioConfig, state: TrainerState) -> Result<Self> {
        state.hyper.validate();
        ensure!(state.algo.is_trainable(), "snapshot carries the untrainable random baseline");
        ensure!(
            state.ul_actor.net.input_dim() == config.uplink_state_dim(),
            "assignment actor reads {} inputs but the scenario provides {}",
            state.ul_actor.net.input_dim(),
            config.uplink_state_dim()
        );
        ensure!(
            state.dl_actor.net.input_dim() == config.downlink_state_dim(),
            "power actor reads {} inputs but the scenario provides {}",
            state.dl_actor.net.input_dim(),
            config.downlink_state_dim()
        );
        let plan = state.algo.branch_plan(state.hyper.head_weights);
        ensure!(
            state.critic.num_branches() == plan.specs.len(),
            "snapshot holds {} critic branches where the scheme defines {}",
            state.critic.num_branches(),
            plan.specs.len()
        );
        for (b, (input, _, _)) in plan.specs.iter().enumerate() {
            ensure!(
                state.critic.branches[b].net.input_dim() == input.dim(&config),
                "critic branch {b} input width does not fit the scenario"
            );
        }
        Ok(Self {
            algo: state.algo,
            env: Env::new(config),
            ul_actor: state.ul_actor,
            dl_actor: state.dl_actor,
            critic: state.critic,
            opt_ul: state.opt_ul,
            opt_dl: state.opt_dl,
            ul_mix: plan.ul_mix,
            dl_mix: plan.dl_mix,
            env_step: state.env_step,
            update_phases: state.update_phases,
            hyper: state.hyper,
        })
    }

    /// Runs the full rollout/update loop until the step budget is spent.
    /// Returns one stats entry per completed buffer cycle. A budget too
    /// small to fill the buffer trains nothing and returns no entries.
    pub fn train(&mut self, streams: &mut RngStreams) -> Result<Vec<CycleStats>> {
        let started = Instant::now();
        let mut stats = Vec::new();
        let mut buffer = TrajectoryBuffer::new(self.hyper.trajectory_length);
        self.env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
        while self.env_step < self.hyper.total_steps {
            let mut cycle = CycleAccum::default();
            while !buffer.is_ready() {
                if self.env_step >= self.hyper.total_steps && buffer.len() < buffer.capacity() {
                    // The budget ran out below the buffer floor; the
                    // leftover rollout is discarded untrained.
                    return Ok(stats);
                }
                self.rollout_step(&mut buffer, streams, &mut cycle);
            }
            let critic_losses = self.update_phase(buffer.records(), streams)?;
            buffer.clear();
            stats.push(cycle.finish(
                self.env_step,
                started.elapsed().as_secs_f64() * 1e3,
                critic_losses,
            ));
        }
        Ok(stats)
    }

    /// One environment iteration: uplink decision, downlink decision,
    /// record storage, and episode bookkeeping.
    fn rollout_step(
        &mut self,
        buffer: &mut TrajectoryBuffer,
        streams: &mut RngStreams,
        cycle: &mut CycleAccum,
    ) {
        let (num_users, num_channels) =
            (self.env.config().num_users, self.env.config().num_channels);
        let s_u = self.env.build_uplink_state();
        let (a_u, logp_u) = self.ul_actor.sample(&s_u, &mut streams.policy_ul.rng);
        let gamma = decode_uplink_action(a_u as u64, num_users, num_channels);
        let ul = self.env.uplink_step(&gamma, &mut streams.augment.rng);
        let power = self.dl_actor.sample(&ul.s_d, &mut streams.policy_dl.rng);
        let dl = self.env.downlink_step(&power.clipped, &mut streams.fading.rng);
        cycle.add_step(ul.r_u, dl.r_d, dl.r_g);
        buffer.push(TrainRecord {
            s_u,
            a_u,
            logp_u,
            s_d: ul.s_d,
            a_d: power.pre_clip,
            logp_d: power.log_prob,
            r_u: ul.r_u,
            r_d: dl.r_d,
            r_g: dl.r_g,
            done: dl.done,
        });
        self.env_step += 1;
        if dl.done {
            cycle.episodes.push(self.env.kpi_summary());
            self.env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
        }
    }

    /// Advantages, actor updates, critic update, target sync.
    fn update_phase(
        &mut self,
        records: &[TrainRecord],
        streams: &mut RngStreams,
    ) -> Result<Vec<f64>> {
        let (advantages, data) = self.compute_advantages(records);
        let adv_ul = mix_advantages(&advantages, &self.ul_mix);
        let adv_dl = mix_advantages(&advantages, &self.dl_mix);
        self.update_actors(records, &adv_ul, &adv_dl, &mut streams.shuffle.rng)?;
        let losses = self.critic.update(
            &data,
            self.hyper.epochs,
            self.hyper.batch_size,
            &mut streams.shuffle.rng,
        )?;
        self.update_phases += 1;
        if self.update_phases % self.hyper.target_sync_period == 0 {
            self.critic.sync_targets();
        }
        Ok(losses)
    }

    /// Per-branch advantages and critic regression pairs, all computed
    /// from the frozen target critic so they stay fixed across the epoch
    /// loop. The value target pairs the same-iteration state value with
    /// the advantage, discounted unless the conventional form is chosen.
    pub fn compute_advantages(
        &self,
        records: &[TrainRecord],
    ) -> (Vec<Vec<f64>>, Vec<Vec<(Vec<f64>, f64)>>) {
        let t_len = records.len();
        assert!(t_len > 0, "empty rollout");
        assert!(
            records[t_len - 1].done,
            "stored trajectories must close their final episode"
        );
        let dones: Vec<bool> = records.iter().map(|r| r.done).collect();
        let bootstrap = if self.hyper.conventional_target { 1.0 } else { self.hyper.gamma };
        let mut advantages = Vec::with_capacity(self.critic.num_branches());
        let mut data = Vec::with_capacity(self.critic.num_branches());
        for (b, branch) in self.critic.branches.iter().enumerate() {
            let states: Vec<Vec<f64>> =
                records.iter().map(|r| branch.input.state(r)).collect();
            let values: Vec<f64> =
                states.iter().map(|s| self.critic.target_value(b, s)).collect();
            let next_values: Vec<f64> = (0..t_len)
                .map(|t| if dones[t] { 0.0 } else { values[t + 1] })
                .collect();
            let rewards: Vec<f64> =
                records.iter().map(|r| r.reward_mix(branch.reward_weights)).collect();
            let adv = compute_gae(
                &rewards,
                &values,
                &next_values,
                &dones,
                self.hyper.gamma,
                self.hyper.gae_lambda,
            );
            let pairs: Vec<(Vec<f64>, f64)> = states
                .into_iter()
                .zip(adv.iter().zip(&values))
                .map(|(s, (a, v))| (s, a + bootstrap * v))
                .collect();
            advantages.push(adv);
            data.push(pairs);
        }
        (advantages, data)
    }

    /// Runs the clipped-surrogate epochs over both actors. `adv_ul` and
    /// `adv_dl` are the premixed per-iteration advantages; each is
    /// normalized per minibatch before use. Every minibatch takes one
    /// optimizer step per actor; each actor only ever reads its own
    /// states, actions, and stored log-probabilities.
    pub fn update_actors<R: Rng>(
        &mut self,
        records: &[TrainRecord],
        adv_ul: &[f64],
        adv_dl: &[f64],
        rng: &mut R,
    ) -> Result<()> {
        assert_eq!(records.len(), adv_ul.len(), "uplink advantage length mismatch");
        assert_eq!(records.len(), adv_dl.len(), "downlink advantage length mismatch");
        let batch = self.hyper.batch_size;
        let eps = self.hyper.clip_epsilon;
        let ent = self.hyper.entropy_coef;
        let mut order: Vec<usize> = (0..records.len()).collect();
        for epoch in 0..self.hyper.epochs {
            order.shuffle(rng);
            for chunk in order.chunks_exact(batch) {
                self.step_uplink_actor(records, adv_ul, chunk, eps, ent)
                    .map_err(|e| e.context(format!("uplink actor update, epoch {epoch}")))?;
                self.step_downlink_actor(records, adv_dl, chunk, eps, ent)
                    .map_err(|e| e.context(format!("downlink actor update, epoch {epoch}")))?;
            }
        }
        Ok(())
    }

    /// One minibatch step of the assignment actor.
    fn step_uplink_actor(
        &mut self,
        records: &[TrainRecord],
        adv: &[f64],
        chunk: &[usize],
        eps: f64,
        ent: f64,
    ) -> Result<()> {
        let scale = -1.0 / chunk.len() as f64;
        let normalized = normalize_over(chunk, adv);
        let mut acc: Option<MlpGradients> = None;
        for (&t, &a_hat) in chunk.iter().zip(&normalized) {
            let rec = &records[t];
            let cache = self.ul_actor.net.forward(&rec.s_u);
            let logits = cache.output();
            let logp_new = log_softmax(logits)[rec.a_u];
            let coeff = ppo_clip_grad(logp_new, rec.logp_u, a_hat, eps);
            if !logp_new.is_finite() || !coeff.is_finite() {
                bail!("non-finite surrogate at iteration {t}: logp {logp_new}, clip {coeff}");
            }
            let mut upstream = categorical_logits_grad(logits, rec.a_u, coeff, ent);
            for g in &mut upstream {
                *g *= scale;
            }
            let grads = self.ul_actor.net.backward(&cache, &upstream);
            match &mut acc {
                Some(total) => total.accumulate(&grads),
                None => acc = Some(grads),
            }
        }
        let grads = acc.expect("chunks_exact never yields an empty chunk").flatten();
        let mut flat = self.ul_actor.net.flatten_params();
        self.opt_ul.step(&mut flat, &grads);
        self.ul_actor.net.load_params(&flat);
        Ok(())
    }

    /// One minibatch step of the power actor: network parameters and the
    /// log-std vector move together, then the log-std is re-clamped.
    fn step_downlink_actor(
        &mut self,
        records: &[TrainRecord],
        adv: &[f64],
        chunk: &[usize],
        eps: f64,
        ent: f64,
    ) -> Result<()> {
        let scale = -1.0 / chunk.len() as f64;
        let normalized = normalize_over(chunk, adv);
        let mut acc: Option<MlpGradients> = None;
        let mut log_std_grads = vec![0.0; self.dl_actor.head.dim()];
        for (&t, &a_hat) in chunk.iter().zip(&normalized) {
            let rec = &records[t];
            let cache = self.dl_actor.net.forward(&rec.s_d);
            let raw = cache.output();
            let (logp_new, _) = self.dl_actor.head.log_prob_entropy(raw, &rec.a_d);
            let coeff = ppo_clip_grad(logp_new, rec.logp_d, a_hat, eps);
            if !logp_new.is_finite() || !coeff.is_finite() {
                bail!("non-finite surrogate at iteration {t}: logp {logp_new}, clip {coeff}");
            }
            let head_grads = self.dl_actor.head.grads(raw, &rec.a_d, coeff, ent);
            let mut upstream = head_grads.raw;
            for g in &mut upstream {
                *g *= scale;
            }
            let grads = self.dl_actor.net.backward(&cache, &upstream);
            match &mut acc {
                Some(total) => total.accumulate(&grads),
                None => acc = Some(grads),
            }
            for (sum, g) in log_std_grads.iter_mut().zip(&head_grads.log_std) {
                *sum += g * scale;
            }
        }
        let mut grads = acc.expect("chunks_exact never yields an empty chunk").flatten();
        grads.extend_from_slice(&log_std_grads);
        let mut flat = self.dl_actor.flatten_params();
        self.opt_dl.step(&mut flat, &grads);
        self.dl_actor.load_params(&flat);
        Ok(())
    }
}

/// Weighted sum of per-branch advantage vectors.
fn mix_advantages(advantages: &[Vec<f64>], mix: &[f64]) -> Vec<f64> {
    assert_eq!(advantages.len(), mix.len(), "mix width mismatch");
    let t_len = advantages.first().map_or(0, Vec::len);
    let mut out = vec![0.0; t_len];
    for (weight, branch) in mix.iter().zip(advantages) {
        for (o, a) in out.iter_mut().zip(branch) {
            *o += weight * a;
        }
    }
    out
}

/// Zero-mean, unit-variance normalization of the advantages addressed by
/// `chunk`, with a floor on the deviation so constant advantages map to
/// zero instead of blowing up.
fn normalize_over(chunk: &[usize], adv: &[f64]) -> Vec<f64> {
    let n = chunk.len() as f64;
    let mean = chunk.iter().map(|&t| adv[t]).sum::<f64>() / n;
    let var = chunk.iter().map(|&t| (adv[t] - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    chunk.iter().map(|&t| (adv[t] - mean) / std).collect()
}

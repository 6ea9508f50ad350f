//! Greedy evaluation of trained policies and the random baseline.
//!
//! Evaluation runs fresh episodes on a new environment with the same
//! scenario: trained actors act deterministically (argmax assignment,
//! mean power), the random baseline draws uniformly, and KPIs are
//! averaged over the requested episode count.

use crate::aahc::policy::{DownlinkActor, UplinkActor};
use crate::env::actions::decode_uplink_action;
use crate::env::{Env, ScenarioConfig};
use crate::harness::rng::RngStreams;
use anyhow::{ensure, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// What drives the decisions during evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    /// Greedy trained actors; consumes no policy randomness.
    Trained { ul: &'a UplinkActor, dl: &'a DownlinkActor },
    /// Uniform assignments and uniform power vectors.
    Random,
}

/// Rewards and KPIs averaged over the evaluation episodes: rewards per
/// iteration, KPI fields per episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub episodes: usize,
    pub mean_ru: f64,
    pub mean_rd: f64,
    pub mean_rg: f64,
    pub mean_iterations: f64,
    pub retrans_pct: f64,
    pub max_ul_rate_gbps: f64,
    pub energy_j: f64,
    pub total_delay_ms: f64,
}

/// One uniform channel assignment: every user independently picks idle or
/// one of the `M` channels, all `M + 1` choices equally likely.
pub fn random_assignment<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Vec<usize> {
    (0..config.num_users).map(|_| rng.gen_range(0..=config.num_channels)).collect()
}

/// One uniform power vector over the legal interval.
pub fn random_powers<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Vec<f64> {
    (0..config.num_users)
        .map(|_| rng.gen_range(config.dl_power_min..=config.dl_power_max))
        .collect()
}

/// Plays `episodes` complete episodes under `policy` and averages the
/// results. Episode draws come from the environment streams; only the
/// random baseline touches the policy streams.
pub fn evaluate(
    policy: Policy,
    config: &ScenarioConfig,
    episodes: usize,
    streams: &mut RngStreams,
) -> Result<EvalRecord> {
    ensure!(episodes > 0, "evaluation needs at least one episode");
    if let Policy::Trained { ul, dl } = policy {
        ensure!(
            ul.net.input_dim() == config.uplink_state_dim()
                && dl.net.input_dim() == config.downlink_state_dim(),
            "trained actors do not fit the scenario dimensions"
        );
    }
    let mut env = Env::new(config.clone());
    let mut steps = 0usize;
    let (mut sum_ru, mut sum_rd, mut sum_rg) = (0.0, 0.0, 0.0);
    let (mut sum_iters, mut sum_retrans, mut sum_rate) = (0.0, 0.0, 0.0);
    let (mut sum_energy, mut sum_delay) = (0.0, 0.0);
    for _ in 0..episodes {
        env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
        loop {
            let gamma = match policy {
                Policy::Trained { ul, .. } => {
                    let action = ul.greedy(&env.build_uplink_state()) as u64;
                    decode_uplink_action(action, config.num_users, config.num_channels)
                }
                Policy::Random => random_assignment(config, &mut streams.policy_ul.rng),
            };
            let ul_result = env.uplink_step(&gamma, &mut streams.augment.rng);
            let powers = match policy {
                Policy::Trained { dl, .. } => dl.greedy(&ul_result.s_d),
                Policy::Random => random_powers(config, &mut streams.policy_dl.rng),
            };
            let dl_result = env.downlink_step(&powers, &mut streams.fading.rng);
            steps += 1;
            sum_ru += ul_result.r_u;
            sum_rd += dl_result.r_d;
            sum_rg += dl_result.r_g;
            if dl_result.done {
                break;
            }
        }
        let kpi = env.kpi_summary();
        sum_iters += kpi.iterations as f64;
        sum_retrans += kpi.retrans_pct;
        sum_rate += kpi.max_ul_rate_gbps;
        sum_energy += kpi.energy_j;
        sum_delay += kpi.total_delay_ms;
    }
    let n = steps as f64;
    let e = episodes as f64;
    Ok(EvalRecord {
        episodes,
        mean_ru: sum_ru / n,
        mean_rd: sum_rd / n,
        mean_rg: sum_rg / n,
        mean_iterations: sum_iters / e,
        retrans_pct: sum_retrans / e,
        max_ul_rate_gbps: sum_rate / e,
        energy_j: sum_energy / e,
        total_delay_ms: sum_delay / e,
    })
}

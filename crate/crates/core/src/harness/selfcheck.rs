//! Fast built-in sanity suite.
//!
//! A handful of oracle checks that a healthy build passes in a second or
//! two: closed-form link rates, action-code round trips, advantage
//! recursion arithmetic, reward envelopes under random play, determinism
//! of training updates, and stability of the derived random streams.
//! Each check is isolated, so one broken invariant reports itself without
//! hiding the others.

use crate::aahc::eval::{random_assignment, random_powers};
use crate::aahc::trainer::{Algorithm, Trainer};
use crate::aahc::{compute_gae, Hyperparams};
use crate::env::actions::{decode_uplink_action, encode_uplink_action, uplink_action_count};
use crate::env::{Env, ScenarioConfig};
use crate::harness::rng::RngStreams;
use crate::noma::{downlink_rates, uplink_rates, ChannelAssignment, LinkBudget, PowerGains};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// One check's result: its name plus either a pass detail or a failure
/// description.
#[derive(Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub outcome: Result<String, String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check_assignment_codes_round_trip() -> Result<String, String> {
    // Small scenario exhaustively.
    let (users, channels) = (3usize, 2usize);
    let count = uplink_action_count(users, channels);
    let mut seen = std::collections::HashSet::new();
    for code in 0..count {
        let gamma = decode_uplink_action(code, users, channels);
        if encode_uplink_action(&gamma, channels) != code {
            return Err(format!("code {code} does not round-trip for {channels}-{users}"));
        }
        if !seen.insert(gamma.clone()) {
            return Err(format!("code {code} duplicates an earlier assignment"));
        }
    }
    // Large scenario by sampling.
    let (users, channels) = (8usize, 3usize);
    let count = uplink_action_count(users, channels);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1_000 {
        let code = rng.gen_range(0..count);
        let gamma = decode_uplink_action(code, users, channels);
        if encode_uplink_action(&gamma, channels) != code {
            return Err(format!("code {code} does not round-trip for {channels}-{users}"));
        }
    }
    Ok("27 codes exhaustively, 1000 sampled".to_string())
}

fn check_single_user_rates_match_closed_form() -> Result<String, String> {
    let bandwidth = 1e10;
    let noise_mc = 1e-20;
    let noise_xu = 2e-18;
    let (p_ul, p_dl, gain) = (5e-3, 10.0, 1e-9);
    let assignment = ChannelAssignment::new(vec![1], 1);
    let budget = LinkBudget::new(bandwidth, noise_mc, vec![noise_xu], vec![p_ul], vec![p_dl]);
    let gains = PowerGains::new(vec![gain], 1);
    let ul = uplink_rates(&assignment, &budget, &gains)[0];
    let dl = downlink_rates(&assignment, &budget, &gains)[0];
    let expect_ul = bandwidth * (1.0 + p_ul * gain / (bandwidth * noise_mc)).log2();
    let expect_dl = bandwidth * (1.0 + p_dl * gain / (bandwidth * noise_xu)).log2();
    if relative_gap(ul, expect_ul) > 1e-12 {
        return Err(format!("uplink rate {ul} differs from closed form {expect_ul}"));
    }
    if relative_gap(dl, expect_dl) > 1e-12 {
        return Err(format!("downlink rate {dl} differs from closed form {expect_dl}"));
    }
    Ok(format!("uplink {ul:.3e} bit/s, downlink {dl:.3e} bit/s"))
}

fn check_advantage_recursion_matches_hand_math() -> Result<String, String> {
    // Terminal single step: advantage is reward minus value.
    let single = compute_gae(&[0.7], &[0.2], &[0.0], &[true], 0.9, 0.8)[0];
    if (single - 0.5).abs() > 1e-12 {
        return Err(format!("terminal one-step advantage {single}, expected 0.5"));
    }
    // Two steps by hand: deltas 0.625 and 1.75, so the first advantage is
    // 0.625 + 0.5*0.5*1.75 = 1.0625.
    let two = compute_gae(&[1.0, 2.0], &[0.5, 0.25], &[0.25, 0.0], &[false, true], 0.5, 0.5);
    if (two[1] - 1.75).abs() > 1e-12 || (two[0] - 1.0625).abs() > 1e-12 {
        return Err(format!("two-step advantages {two:?}, expected [1.0625, 1.75]"));
    }
    Ok("one- and two-step recursions match".to_string())
}

fn check_rewards_stay_in_their_envelopes() -> Result<String, String> {
    let config = ScenarioConfig::standard(2, 3);
    let n = config.num_users as f64;
    let (r_d_floor, r_g_floor) = (-1.5 - 0.2 * n, -1.0 - 0.5 * n);
    let mut env = Env::new(config.clone());
    let mut streams = RngStreams::derive(23);
    env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
    let mut steps = 0usize;
    while steps < 300 {
        let gamma = random_assignment(&config, &mut streams.policy_ul.rng);
        let ul = env.uplink_step(&gamma, &mut streams.augment.rng);
        if !(-1.0..=0.0).contains(&ul.r_u) {
            return Err(format!("upload reward {} escaped [-1, 0]", ul.r_u));
        }
        let power = random_powers(&config, &mut streams.policy_dl.rng);
        let dl = env.downlink_step(&power, &mut streams.fading.rng);
        if !(r_d_floor..=0.0).contains(&dl.r_d) {
            return Err(format!("downlink reward {} escaped [{r_d_floor}, 0]", dl.r_d));
        }
        if !(r_g_floor..=-1.0).contains(&dl.r_g) {
            return Err(format!("shared reward {} escaped [{r_g_floor}, -1]", dl.r_g));
        }
        steps += 1;
        if dl.done {
            env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
        }
    }
    Ok(format!("{steps} random iterations stayed inside the reward envelopes"))
}

fn tiny_trained_params(seed: u64) -> Vec<f64> {
    let mut streams = RngStreams::derive(seed);
    let mut trainer = Trainer::new(
        Algorithm::Aahc,
        ScenarioConfig::standard(2, 2),
        Hyperparams {
            trajectory_length: 32,
            batch_size: 8,
            epochs: 1,
            total_steps: 32,
            hidden: vec![8],
            ..Default::default()
        },
        &mut streams,
    );
    trainer.train(&mut streams).expect("tiny training run");
    let mut params = trainer.ul_actor.net.flatten_params();
    params.extend(trainer.dl_actor.flatten_params());
    params
}

fn check_identical_seeds_reproduce_identical_updates() -> Result<String, String> {
    let first = tiny_trained_params(11);
    let second = tiny_trained_params(11);
    if first != second {
        return Err("two runs from seed 11 produced different parameters".to_string());
    }
    Ok(format!("{} parameters reproduced bit for bit", first.len()))
}

fn check_derived_streams_are_stable() -> Result<String, String> {
    let mut a = RngStreams::derive(3);
    let mut b = RngStreams::derive(3);
    let first: Vec<u64> = vec![
        a.env_init.rng.next_u64(),
        a.fading.rng.next_u64(),
        a.augment.rng.next_u64(),
        a.policy_ul.rng.next_u64(),
        a.policy_dl.rng.next_u64(),
        a.shuffle.rng.next_u64(),
    ];
    let again: Vec<u64> = vec![
        b.env_init.rng.next_u64(),
        b.fading.rng.next_u64(),
        b.augment.rng.next_u64(),
        b.policy_ul.rng.next_u64(),
        b.policy_dl.rng.next_u64(),
        b.shuffle.rng.next_u64(),
    ];
    if first != again {
        return Err("re-deriving seed 3 changed the streams".to_string());
    }
    let mut sorted = first.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != first.len() {
        return Err("two named streams produced the same first draw".to_string());
    }
    Ok("6 streams replayable and mutually distinct".to_string())
}

fn run_checks<F: FnMut(&str)>(
    checks: &[(&'static str, fn() -> Result<String, String>)],
    log: &mut F,
) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    for &(name, check) in checks {
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(result) => result,
            Err(payload) => {
                let message = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "no message".to_string());
                Err(format!("panicked: {message}"))
            }
        };
        match &outcome {
            Ok(detail) => log(&format!("ok   {name}: {detail}")),
            Err(detail) => log(&format!("FAIL {name}: {detail}")),
        }
        reports.push(CheckReport { name, outcome });
    }
    reports
}

/// Runs every check, logging one line per check, and returns the reports.
pub fn run_selfcheck<F: FnMut(&str)>(mut log: F) -> Vec<CheckReport> {
    let checks: [(&'static str, fn() -> Result<String, String>); 6] = [
        ("assignment codes round-trip", check_assignment_codes_round_trip),
        ("single-user rates match the closed form", check_single_user_rates_match_closed_form),
        ("advantage recursion matches hand math", check_advantage_recursion_matches_hand_math),
        ("rewards stay in their envelopes", check_rewards_stay_in_their_envelopes),
        (
            "identical seeds reproduce identical updates",
            check_identical_seeds_reproduce_identical_updates,
        ),
        ("derived streams are stable", check_derived_streams_are_stable),
    ];
    run_checks(&checks, &mut log)
}

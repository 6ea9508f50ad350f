//! The release gates, one integration test per gate.
//!
//! Each gate re-derives what it checks through an independent route: link
//! rates against direct-summation oracles, reward components against
//! their closed forms, delivered payload against initial buffers, action
//! codes against exhaustive and sampled round-trips, the advantage
//! recursion against a quadratic reference sum, analytic gradients
//! against central differences, the random baseline against its
//! calibration bands, trained policies against required margins over
//! random, the three training schemes against each other, and repeated
//! runs against byte-level equality.
//!
//! All tests share one lock and run strictly one at a time: several
//! assert wall-clock budgets and the training gates saturate the
//! machine, so timing stays honest only without interleaving. Each test
//! prints its measured numbers, so a `--nocapture` run doubles as a
//! calibration report.

use metalink::aahc::eval::{random_assignment, random_powers};
use metalink::aahc::{
    compute_gae, evaluate, ppo_clip_grad, ppo_clip_surrogate, Algorithm, BranchInput, Critic,
    Hyperparams, Policy, Trainer,
};
use metalink::env::actions::{decode_uplink_action, encode_uplink_action, uplink_action_count};
use metalink::env::{rewards, Env, ScenarioConfig};
use metalink::harness::RngStreams;
use metalink::nn::{
    categorical_entropy, categorical_log_prob, categorical_logits_grad, GaussianHead, Mlp,
    MlpGradients,
};
use metalink::noma::{downlink_rates, uplink_rates, ChannelAssignment, LinkBudget, PowerGains};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

static GATE: Mutex<()> = Mutex::new(());

fn gate() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

/// Relative gap, demanding exact agreement when the reference is zero.
fn rel_gap(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs()
    }
}

/// Selection sort by `key` descending, ties keeping the earlier index.
fn decode_order(members: &[usize], key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut pool = members.to_vec();
    let mut order = Vec::with_capacity(pool.len());
    while !pool.is_empty() {
        let mut best = 0;
        for i in 1..pool.len() {
            if key(pool[i]) > key(pool[best]) {
                best = i;
            }
        }
        order.push(pool.remove(best));
    }
    order
}

fn sinr_rate(bandwidth: f64, signal: f64, interference: f64, noise: f64) -> f64 {
    bandwidth * (1.0 + signal / (interference + noise)).log2()
}

/// Direct-summation uplink reference: sort each channel's members by
/// received power, then charge every rank the explicit sum of the powers
/// decoded after it.
fn oracle_uplink_bps(a: &ChannelAssignment, b: &LinkBudget, g: &PowerGains) -> Vec<f64> {
    let mut rates = vec![0.0; a.num_users()];
    for m in 1..=a.num_channels() {
        let order = decode_order(&a.members(m), |n| b.ul_power[n] * g.get(n, m));
        for (rank, &n) in order.iter().enumerate() {
            let mut interference = 0.0;
            for &j in &order[rank + 1..] {
                interference += b.ul_power[j] * g.get(j, m);
            }
            rates[n] = sinr_rate(
                b.bandwidth,
                b.ul_power[n] * g.get(n, m),
                interference,
                b.bandwidth * b.noise_psd_mc,
            );
        }
    }
    rates
}

/// Direct-summation downlink reference: rank by channel-to-noise ratio,
/// keep the powers ranked ahead as interference at the receiver's own
/// gain.
fn oracle_downlink_bps(a: &ChannelAssignment, b: &LinkBudget, g: &PowerGains) -> Vec<f64> {
    let mut rates = vec![0.0; a.num_users()];
    for m in 1..=a.num_channels() {
        let order = decode_order(&a.members(m), |n| g.get(n, m) / b.noise_psd_xu[n]);
        for (rank, &n) in order.iter().enumerate() {
            let mut interference = 0.0;
            for &j in &order[..rank] {
                interference += b.dl_power[j] * g.get(n, m);
            }
            rates[n] = sinr_rate(
                b.bandwidth,
                b.dl_power[n] * g.get(n, m),
                interference,
                b.bandwidth * b.noise_psd_xu[n],
            );
        }
    }
    rates
}

/// Central-difference check of `analytic` against `loss` at `theta`,
/// asserting every component and returning the worst relative error.
fn check_against_central_diff(
    analytic: &[f64],
    theta: &[f64],
    loss: &mut dyn FnMut(&[f64]) -> f64,
    h: f64,
    label: &str,
) -> f64 {
    assert_eq!(analytic.len(), theta.len(), "{label}: gradient width mismatch");
    let mut worst = 0.0f64;
    for k in 0..theta.len() {
        let mut plus = theta.to_vec();
        plus[k] += h;
        let mut minus = theta.to_vec();
        minus[k] -= h;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
        let err = (analytic[k] - numeric).abs() / numeric.abs().max(1.0);
        assert!(
            err < 1e-5,
            "{label} parameter {k}: analytic {} vs numeric {numeric} (err {err:.3e})",
            analytic[k]
        );
        worst = worst.max(err);
    }
    worst
}

/// Strips the final column (wall-clock milliseconds) from every CSV line.
fn mask_wall_clock(csv: &str) -> String {
    csv.lines()
        .map(|line| &line[..line.rfind(',').expect("row without columns")])
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_01_link_rates_match_direct_summation_oracle() {
    let _gate = gate();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let channels = 3usize;
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for users in 1..=8usize {
        for _ in 0..1000 {
            let gamma: Vec<usize> = (0..users).map(|_| rng.gen_range(0..=channels)).collect();
            let assignment = ChannelAssignment::new(gamma, channels);
            let budget = LinkBudget::new(
                1e10,
                10f64.powf(rng.gen_range(-21.0..-20.0)),
                (0..users).map(|_| 10f64.powf(rng.gen_range(-19.0..-17.0))).collect(),
                (0..users).map(|_| rng.gen_range(3e-3..10e-3)).collect(),
                (0..users)
                    .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..20.0) })
                    .collect(),
            );
            let gains = PowerGains::new(
                (0..users * channels).map(|_| 10f64.powf(rng.gen_range(-11.0..-6.0))).collect(),
                channels,
            );
            let ul = uplink_rates(&assignment, &budget, &gains);
            let dl = downlink_rates(&assignment, &budget, &gains);
            let ul_want = oracle_uplink_bps(&assignment, &budget, &gains);
            let dl_want = oracle_downlink_bps(&assignment, &budget, &gains);
            for n in 0..users {
                for (got, want) in [(ul[n], ul_want[n]), (dl[n], dl_want[n])] {
                    let gap = rel_gap(got, want);
                    assert!(gap < 1e-10, "user {n} of {users}: {got} vs {want} (gap {gap:.3e})");
                    worst = worst.max(gap);
                }
            }
            checked += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "rate oracle sweep took {elapsed:.2} s, budget 5 s");
    println!(
        "criterion 01 pass: {checked} instances (1..=8 users, 3 channels), \
         worst relative gap {worst:.3e}, {elapsed:.2} s"
    );
}

#[test]
fn criterion_02_reward_components_match_independent_formulas() {
    let _gate = gate();
    let started = Instant::now();
    let cfg = ScenarioConfig::standard(3, 4);
    let n = cfg.num_users as f64;
    let mut env = Env::new(cfg.clone());
    let mut streams = RngStreams::derive(202);
    env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
    let total_steps = 100_000usize;
    let mut episodes = 0usize;
    for _ in 0..total_steps {
        let gamma = random_assignment(&cfg, &mut streams.policy_ul.rng);
        let ul = env.uplink_step(&gamma, &mut streams.augment.rng);
        let powers = random_powers(&cfg, &mut streams.policy_dl.rng);
        let initial = env.state().initial_buffers.clone();
        let dl = env.downlink_step(&powers, &mut streams.fading.rng);

        // Upload efficiency, rearranged as (sum D/B0)/N - 1.
        let my_ru =
            ul.payload_bits.iter().zip(&initial).map(|(d, b)| d / b).sum::<f64>() / n - 1.0;
        assert!((-1.0..=0.0).contains(&ul.r_u), "upload penalty {} out of range", ul.r_u);
        assert!((ul.r_u - my_ru).abs() <= 1e-12, "upload penalty {} vs {my_ru}", ul.r_u);

        // The three downlink components, each re-derived, then summed.
        let scheduled: Vec<bool> = gamma.iter().map(|&g| g != 0).collect();
        let my_rdr = -(dl.delays_s.iter().sum::<f64>() / n / cfg.dtti_limit).min(1.0);
        let my_rene = -0.5 * powers.iter().map(|p| p - cfg.dl_power_min).sum::<f64>()
            / ((cfg.dl_power_max - cfg.dl_power_min) * n);
        let leaks = scheduled
            .iter()
            .zip(&powers)
            .filter(|&(&z, &p)| !z && p > rewards::POWER_EPSILON)
            .count();
        let my_rgu = -0.2 * leaks as f64;
        assert!((-1.0..=0.0).contains(&my_rdr), "delay penalty {my_rdr} out of range");
        assert!((-0.5..=0.0).contains(&my_rene), "power penalty {my_rene} out of range");
        assert!(leaks <= cfg.num_users);
        let my_rd = my_rdr + my_rene + my_rgu;
        assert!((dl.r_d - my_rd).abs() <= 1e-12, "downlink reward {} vs {my_rd}", dl.r_d);

        // The shared reward is exact: -1 minus half a point per failure.
        let fails = dl.failures.iter().filter(|&&i| i).count();
        assert_eq!(dl.r_g, -1.0 - 0.5 * fails as f64, "shared reward mismatch");

        // Spent energy: powers of scheduled users over their capped delays.
        let my_energy: f64 = (0..cfg.num_users)
            .filter(|&i| scheduled[i])
            .map(|i| powers[i] * dl.delays_s[i].min(cfg.dtti_limit))
            .sum();
        assert!(
            (dl.energy_j - my_energy).abs() <= 1e-12 * dl.energy_j.abs().max(1.0),
            "energy {} vs {my_energy}",
            dl.energy_j
        );

        if dl.done {
            episodes += 1;
            env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "reward sweep took {elapsed:.2} s, budget 30 s");
    println!(
        "criterion 02 pass: {total_steps} steps across {episodes} completed episodes, \
         every component within 1e-12 of its re-derivation, {elapsed:.2} s"
    );
}

#[test]
fn criterion_03_delivered_bits_conserve_initial_buffers() {
    let _gate = gate();
    let started = Instant::now();
    let cfg = ScenarioConfig::standard(3, 4);
    let mut env = Env::new(cfg.clone());
    let mut streams = RngStreams::derive(303);
    let mut complete = 0usize;
    let mut attempts = 0usize;
    let mut worst = 0.0f64;
    while complete < 100 {
        attempts += 1;
        assert!(attempts <= 1000, "only {complete} drained episodes in 1000 attempts");
        env.reset(&mut streams.env_init.rng, &mut streams.fading.rng);
        let initial = env.state().initial_buffers.clone();
        let mut delivered = vec![0.0; cfg.num_users];
        loop {
            let gamma = random_assignment(&cfg, &mut streams.policy_ul.rng);
            let ul = env.uplink_step(&gamma, &mut streams.augment.rng);
            let powers = random_powers(&cfg, &mut streams.policy_dl.rng);
            let dl = env.downlink_step(&powers, &mut streams.fading.rng);
            for u in 0..cfg.num_users {
                if gamma[u] != 0 && !dl.failures[u] {
                    delivered[u] += ul.payload_bits[u];
                }
            }
            if dl.done {
                break;
            }
        }
        if env.state().buffers.iter().any(|&b| b > 0.0) {
            // The iteration cap fired with data left; skip truncated runs.
            continue;
        }
        complete += 1;
        for u in 0..cfg.num_users {
            let gap = (delivered[u] - initial[u]).abs() / initial[u];
            assert!(
                gap <= 1e-9,
                "attempt {attempts} user {u}: delivered {} of {} (gap {gap:.3e})",
                delivered[u],
                initial[u]
            );
            worst = worst.max(gap);
        }
    }
    println!(
        "criterion 03 pass: 100 drained episodes out of {attempts} attempts, \
         worst relative gap {worst:.3e}, {:.1} s",
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_04_assignment_codes_round_trip() {
    let _gate = gate();
    let channels = 3usize;
    let mut exhaustive = 0u64;
    for users in [4usize, 5] {
        let count = uplink_action_count(users, channels);
        for index in 0..count {
            let gamma = decode_uplink_action(index, users, channels);
            assert_eq!(gamma.len(), users);
            assert!(gamma.iter().all(|&g| g <= channels));
            assert_eq!(encode_uplink_action(&gamma, channels), index, "{users} users");
        }
        exhaustive += count;
    }
    let users = 8usize;
    let count = uplink_action_count(users, channels);
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let sampled = 100_000usize;
    for _ in 0..sampled {
        let index = rng.gen_range(0..count);
        let gamma = decode_uplink_action(index, users, channels);
        assert_eq!(encode_uplink_action(&gamma, channels), index);
    }
    println!(
        "criterion 04 pass: {exhaustive} exhaustive codes (4 and 5 users), \
         {sampled} sampled codes of {count} (8 users), zero mismatches"
    );
}

#[test]
fn criterion_05_advantage_recursion_matches_quadratic_sum() {
    let _gate = gate();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for round in 0..1000 {
        let t_len = rng.gen_range(1..=64);
        let rewards: Vec<f64> = (0..t_len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let values: Vec<f64> = (0..t_len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let dones: Vec<bool> = (0..t_len).map(|_| rng.gen_bool(0.2)).collect();
        let tail = rng.gen_range(-3.0..3.0);
        let next_values: Vec<f64> = (0..t_len)
            .map(|t| {
                if dones[t] {
                    0.0
                } else if t + 1 < t_len {
                    values[t + 1]
                } else {
                    tail
                }
            })
            .collect();
        let gamma = rng.gen_range(0.9..1.0);
        let lambda = rng.gen_range(0.8..1.0);
        let fast = compute_gae(&rewards, &values, &next_values, &dones, gamma, lambda);
        for t in 0..t_len {
            // Explicit weighted sum of residuals, cut after a terminal.
            let mut want = 0.0;
            let mut weight = 1.0;
            for l in t..t_len {
                let cont = if dones[l] { 0.0 } else { 1.0 };
                want += weight * (rewards[l] + gamma * cont * next_values[l] - values[l]);
                if dones[l] {
                    break;
                }
                weight *= gamma * lambda;
            }
            let gap = (fast[t] - want).abs() / want.abs().max(1.0);
            assert!(gap < 1e-10, "round {round} step {t}: {} vs {want} (gap {gap:.3e})", fast[t]);
            worst = worst.max(gap);
        }
    }
    println!("criterion 05 pass: 1000 sequences up to length 64, worst relative gap {worst:.3e}");
}

#[test]
fn criterion_06_analytic_gradients_match_central_differences() {
    let _gate = gate();
    let started = Instant::now();
    let h = 1e-6;
    let eps = 0.2;
    let ent = 0.01;

    // Assignment path: clipped surrogate plus entropy bonus through the
    // categorical logits of a small network. Probability ratios sit
    // strictly inside or strictly outside the clip band so the objective
    // is differentiable at every sample, covering live gradients, the
    // upper clip, and the pessimistic lower arm.
    let worst_cat = {
        let mut rng = ChaCha8Rng::seed_from_u64(601);
        let net = Mlp::new(&[6, 5, 7], &mut rng);
        let plan: [(f64, f64); 6] = [
            (0.05, 1.3),
            (-0.08, -0.7),
            (0.0, 0.4),
            (0.30, 2.0),
            (-0.36, -1.1),
            (-0.36, 0.9),
        ];
        let batch: Vec<(Vec<f64>, usize, f64, f64)> = plan
            .iter()
            .map(|&(offset, adv)| {
                let state: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let action = rng.gen_range(0..7);
                let logp0 = categorical_log_prob(net.forward(&state).output(), action);
                (state, action, adv, logp0 - offset)
            })
            .collect();
        let scale = -1.0 / batch.len() as f64;
        let mut acc: Option<MlpGradients> = None;
        for (state, action, adv, logp_old) in &batch {
            let cache = net.forward(state);
            let logits = cache.output().to_vec();
            let coeff =
                ppo_clip_grad(categorical_log_prob(&logits, *action), *logp_old, *adv, eps);
            let upstream: Vec<f64> = categorical_logits_grad(&logits, *action, coeff, ent)
                .iter()
                .map(|g| g * scale)
                .collect();
            let g = net.backward(&cache, &upstream);
            match &mut acc {
                Some(a) => a.accumulate(&g),
                None => acc = Some(g),
            }
        }
        let analytic = acc.expect("non-empty batch").flatten();
        let mut loss = |flat: &[f64]| {
            let mut probe = net.clone();
            probe.load_params(flat);
            let mut total = 0.0;
            for (state, action, adv, logp_old) in &batch {
                let logits = probe.forward(state).output().to_vec();
                let logp = categorical_log_prob(&logits, *action);
                total += ppo_clip_surrogate(logp, *logp_old, *adv, eps)
                    + ent * categorical_entropy(&logits);
            }
            -total / batch.len() as f64
        };
        check_against_central_diff(&analytic, &net.flatten_params(), &mut loss, h, "categorical")
    };

    // Power path: the same objective through the squashed Gaussian head,
    // differentiated with respect to the network weights and the log-std
    // tail together.
    let worst_gauss = {
        let mut rng = ChaCha8Rng::seed_from_u64(602);
        let net = Mlp::new(&[8, 6, 3], &mut rng);
        let mut head = GaussianHead::new(3, 0.0, 20.0);
        head.log_std = vec![0.2, -0.3, 0.0];
        let plan: [(f64, f64); 5] =
            [(0.04, 0.8), (-0.10, -1.2), (0.0, 1.5), (0.25, 0.9), (-0.30, -0.5)];
        let batch: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = plan
            .iter()
            .map(|&(offset, adv)| {
                let state: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let raw = net.forward(&state).output().to_vec();
                let draw = head.sample(&raw, &mut rng);
                (state, draw.pre_clip, adv, draw.log_prob - offset)
            })
            .collect();
        let scale = -1.0 / batch.len() as f64;
        let mut net_acc: Option<MlpGradients> = None;
        let mut std_acc = vec![0.0; head.dim()];
        for (state, x, adv, logp_old) in &batch {
            let cache = net.forward(state);
            let raw = cache.output().to_vec();
            let (logp, _) = head.log_prob_entropy(&raw, x);
            let coeff = ppo_clip_grad(logp, *logp_old, *adv, eps);
            let g = head.grads(&raw, x, coeff, ent);
            let upstream: Vec<f64> = g.raw.iter().map(|d| d * scale).collect();
            let ng = net.backward(&cache, &upstream);
            match &mut net_acc {
                Some(a) => a.accumulate(&ng),
                None => net_acc = Some(ng),
            }
            for (a, d) in std_acc.iter_mut().zip(&g.log_std) {
                *a += d * scale;
            }
        }
        let mut analytic = net_acc.expect("non-empty batch").flatten();
        analytic.extend(std_acc);
        let net_len = net.param_count();
        let mut theta = net.flatten_params();
        theta.extend_from_slice(&head.log_std);
        let mut loss = |flat: &[f64]| {
            let mut probe = net.clone();
            probe.load_params(&flat[..net_len]);
            let mut probe_head = head.clone();
            probe_head.log_std.copy_from_slice(&flat[net_len..]);
            let mut total = 0.0;
            for (state, x, adv, logp_old) in &batch {
                let raw = probe.forward(state).output().to_vec();
                let (logp, entropy) = probe_head.log_prob_entropy(&raw, x);
                total += ppo_clip_surrogate(logp, *logp_old, *adv, eps) + ent * entropy;
            }
            -total / batch.len() as f64
        };
        check_against_central_diff(&analytic, &theta, &mut loss, h, "gaussian")
    };

    // Value path: the loss-weighted squared-error regression across all
    // three branches at once. The numeric sweep runs over the whole
    // concatenated parameter vector, which also verifies that branches
    // do not leak gradient into each other.
    let worst_critic = {
        let mut rng = ChaCha8Rng::seed_from_u64(603);
        let cfg = ScenarioConfig::standard(2, 2);
        let weights = [0.7, 1.0, 1.3];
        let critic = Critic::new(
            &[
                (BranchInput::Uplink, [1.0, 0.0, 0.0], weights[0]),
                (BranchInput::Downlink, [0.0, 1.0, 0.0], weights[1]),
                (BranchInput::Joint, [0.0, 0.0, 1.0], weights[2]),
            ],
            &cfg,
            &[6],
            1e-3,
            &mut rng,
        );
        let batch = 8usize;
        let data: Vec<Vec<(Vec<f64>, f64)>> = critic
            .branches
            .iter()
            .map(|branch| {
                (0..batch)
                    .map(|_| {
                        let width = branch.net.input_dim();
                        let state: Vec<f64> =
                            (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        (state, rng.gen_range(-1.0..1.0))
                    })
                    .collect()
            })
            .collect();
        let mut analytic = Vec::new();
        for (b, branch) in critic.branches.iter().enumerate() {
            let mut acc: Option<MlpGradients> = None;
            for (state, target) in &data[b] {
                let cache = branch.net.forward(state);
                let err = cache.output()[0] - target;
                let upstream = [weights[b] * 2.0 * err / batch as f64];
                let g = branch.net.backward(&cache, &upstream);
                match &mut acc {
                    Some(a) => a.accumulate(&g),
                    None => acc = Some(g),
                }
            }
            analytic.extend(acc.expect("non-empty batch").flatten());
        }
        let nets: Vec<Mlp> = critic.branches.iter().map(|b| b.net.clone()).collect();
        let theta: Vec<f64> = nets.iter().flat_map(|n| n.flatten_params()).collect();
        let mut loss = |flat: &[f64]| {
            let mut total = 0.0;
            let mut at = 0;
            for (b, base) in nets.iter().enumerate() {
                let len = base.param_count();
                let mut probe = base.clone();
                probe.load_params(&flat[at..at + len]);
                at += len;
                let mut sum = 0.0;
                for (state, target) in &data[b] {
                    let err = probe.forward(state).output()[0] - target;
                    sum += err * err;
                }
                total += weights[b] * sum / batch as f64;
            }
            total
        };
        check_against_central_diff(&analytic, &theta, &mut loss, h, "critic")
    };

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "gradient checks took {elapsed:.2} s, budget 60 s");
    println!(
        "criterion 06 pass: worst relative errors categorical {worst_cat:.3e}, \
         gaussian {worst_gauss:.3e}, critic {worst_critic:.3e}, {elapsed:.2} s"
    );
}

#[test]
fn criterion_07_random_baseline_lands_in_reference_bands() {
    let _gate = gate();
    let cfg = ScenarioConfig::standard(3, 4);
    let mut streams = RngStreams::derive(0);
    let record = evaluate(Policy::Random, &cfg, 200, &mut streams).expect("evaluation failed");
    println!(
        "criterion 07 measured: mean iterations {:.2} (band 51.45..=95.55), \
         retransmission rate {:.2}% (band 14.32..=44.32)",
        record.mean_iterations, record.retrans_pct
    );
    assert!(
        (51.45..=95.55).contains(&record.mean_iterations),
        "mean iterations {:.2} outside 73.5 +/- 30%",
        record.mean_iterations
    );
    assert!(
        (14.32..=44.32).contains(&record.retrans_pct),
        "retransmission rate {:.2}% outside 29.32 +/- 15 points",
        record.retrans_pct
    );
    println!("criterion 07 pass");
}

#[test]
fn criterion_08_trained_policy_beats_random_by_target_margins() {
    let _gate = gate();
    let started = Instant::now();
    let cfg = ScenarioConfig::standard(3, 4);
    let hyper = Hyperparams { total_steps: 200_000, ..Hyperparams::default() };
    let mut streams = RngStreams::derive(0);
    let mut trainer = Trainer::new(Algorithm::Aahc, cfg.clone(), hyper, &mut streams);
    let cycles = trainer.train(&mut streams).expect("training failed");
    assert!(!cycles.is_empty(), "no buffer cycle completed");
    let policy = Policy::Trained { ul: &trainer.ul_actor, dl: &trainer.dl_actor };
    let trained = evaluate(policy, &cfg, 200, &mut streams).expect("evaluation failed");
    let mut fresh = RngStreams::derive(0);
    let random = evaluate(Policy::Random, &cfg, 200, &mut fresh).expect("evaluation failed");
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion 08 measured: trained iterations {:.2} vs random {:.2} \
         (ratio {:.3}, required <= 0.333), trained retransmission {:.2}% (required < 10), \
         trained shared reward {:.3} vs random {:.3}, {elapsed:.0} s",
        trained.mean_iterations,
        random.mean_iterations,
        trained.mean_iterations / random.mean_iterations,
        trained.retrans_pct,
        trained.mean_rg,
        random.mean_rg,
    );
    assert!(
        trained.retrans_pct < 10.0,
        "trained retransmission rate {:.2}% is not under 10%",
        trained.retrans_pct
    );
    assert!(
        trained.mean_iterations <= random.mean_iterations / 3.0,
        "trained policy needs {:.2} mean iterations, more than a third of \
         the random baseline's {:.2}",
        trained.mean_iterations,
        random.mean_iterations
    );
    println!("criterion 08 pass");
}

#[test]
fn criterion_09_hybrid_critic_leads_baselines_on_final_reward() {
    let _gate = gate();
    let started = Instant::now();
    let cfg = ScenarioConfig::standard(3, 4);
    let algos = [Algorithm::Aahc, Algorithm::IteRl, Algorithm::Ctrl];
    let mut finals = [[0.0f64; 3]; 3];
    for (a, &algo) in algos.iter().enumerate() {
        for seed in 0u64..3 {
            let hyper = Hyperparams { total_steps: 500_000, ..Hyperparams::default() };
            let mut streams = RngStreams::derive(seed);
            let mut trainer = Trainer::new(algo, cfg.clone(), hyper, &mut streams);
            let cycles = trainer.train(&mut streams).expect("training failed");
            let last = cycles.last().expect("no buffer cycle completed");
            finals[a][seed as usize] = last.mean_rg;
            println!(
                "criterion 09 run: {} seed {seed} final-cycle shared reward {:.4} ({:.0} s in)",
                algo.name(),
                last.mean_rg,
                started.elapsed().as_secs_f64()
            );
        }
    }
    let mut wins = 0usize;
    for seed in 0..3 {
        let lead = finals[0][seed] >= finals[1][seed] && finals[0][seed] >= finals[2][seed];
        println!(
            "criterion 09 seed {seed}: aahc {:.4}, iterl {:.4}, ctrl {:.4}{}",
            finals[0][seed],
            finals[1][seed],
            finals[2][seed],
            if lead { " (aahc leads)" } else { "" }
        );
        wins += lead as usize;
    }
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion 09 measured: aahc leads both baselines in {wins} of 3 seeds, \
         {elapsed:.0} s total"
    );
    assert!(wins >= 2, "aahc leads in only {wins} of 3 seeds");
    println!("criterion 09 pass");
}

#[test]
fn criterion_10_identical_train_commands_are_byte_identical() {
    let _gate = gate();
    let exe = env!("CARGO_BIN_EXE_metalink");
    let tmp = tempfile::tempdir().expect("no temp dir");
    let run = |out: &Path| {
        let status = Command::new(exe)
            .args([
                "train",
                "--scenario",
                "2-3",
                "--algo",
                "aahc",
                "--seed",
                "3",
                "--total-steps",
                "4000",
                "--eval-episodes",
                "20",
                "--set",
                "hyper.trajectory_length=256",
                "--set",
                "hyper.batch_size=32",
                "--out",
            ])
            .arg(out)
            .output()
            .expect("could not launch the trainer binary");
        assert!(
            status.status.success(),
            "training command failed: {}",
            String::from_utf8_lossy(&status.stderr)
        );
    };
    let dir_a = tmp.path().join("first");
    let dir_b = tmp.path().join("second");
    run(&dir_a);
    run(&dir_b);

    let read = |dir: &Path, name: &str| {
        std::fs::read_to_string(dir.join(name))
            .unwrap_or_else(|e| panic!("missing {name} in {}: {e}", dir.display()))
    };
    let metrics_a = read(&dir_a, "metrics_aahc_2-3_seed3.csv");
    let metrics_b = read(&dir_b, "metrics_aahc_2-3_seed3.csv");
    assert!(metrics_a.lines().count() >= 3, "expected several metric rows");
    assert_eq!(
        mask_wall_clock(&metrics_a),
        mask_wall_clock(&metrics_b),
        "metrics diverge beyond the wall-clock column"
    );
    assert_eq!(
        read(&dir_a, "checkpoint_aahc_2-3_seed3.json"),
        read(&dir_b, "checkpoint_aahc_2-3_seed3.json"),
        "checkpoints diverge"
    );
    assert_eq!(
        read(&dir_a, "resolved.cfg"),
        read(&dir_b, "resolved.cfg"),
        "resolved settings diverge"
    );
    println!(
        "criterion 10 pass: metrics byte-identical with the wall_clock_ms column masked \
         (the one timing-dependent field); checkpoint and resolved settings \
         byte-identical unmasked"
    );
}

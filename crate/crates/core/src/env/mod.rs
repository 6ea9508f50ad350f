//! Two-stage scheduling environment for uplink-then-downlink exchanges.
//!
//! One iteration is an uplink slot followed by a downlink slot. On the
//! uplink every scheduled user pushes as much of its remaining buffer as
//! its NOMA rate allows; the console renders the received chunk into a
//! 5-15x larger frame that the downlink must deliver inside a hard slot
//! deadline. A missed deadline voids the exchange: the chunk stays in the
//! user's buffer and the whole uplink-downlink round repeats later. The
//! episode ends when every buffer is empty or an iteration cap is hit.
//!
//! The two decisions are asynchronous: the channel assignment is chosen
//! before the uplink slot, the power allocation only after the uplink
//! outcome is known. `Env` enforces that strict alternation and panics on
//! out-of-order calls.

pub mod actions;
pub mod rewards;

pub use actions::{decode_uplink_action, encode_uplink_action, uplink_action_count};

use crate::channel::{
    self, channel_coeff, path_gain, sample_small_scale, FadingParams, Topology,
};
use crate::noma::{downlink_rates, uplink_rates, ChannelAssignment, LinkBudget, PowerGains};
use num_complex::Complex64;
use rand::Rng;

/// One megabit in bits.
pub const MBIT: f64 = 1e6;

/// Static description of one scenario. All quantities are SI: Hz, W, W/Hz,
/// seconds, bits, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of shared channels, M.
    pub num_channels: usize,
    /// Number of users, N.
    pub num_users: usize,
    /// Per-channel bandwidth in Hz.
    pub bandwidth: f64,
    /// Noise power spectral density in W/Hz, shared by console and users.
    pub noise_psd: f64,
    /// Uplink slot length in seconds.
    pub utti: f64,
    /// Downlink slot deadline in seconds.
    pub dtti_limit: f64,
    /// Smallest grantable downlink power in W.
    pub dl_power_min: f64,
    /// Largest grantable downlink power in W.
    pub dl_power_max: f64,
    /// Initial buffer draw range in bits.
    pub buffer_init_range: [f64; 2],
    /// Uplink transmit power draw range in W.
    pub ul_power_range: [f64; 2],
    /// Rendered-to-uploaded size ratio draw range.
    pub augment_range: [f64; 2],
    /// Iteration cap per episode.
    pub max_iterations: usize,
    /// Fading model parameters.
    pub fading: FadingParams,
    /// Walk-area side lengths in meters.
    pub area: [f64; 2],
    /// Console antenna height above the user plane in meters.
    pub height: f64,
    /// Per-iteration random-walk step in meters.
    pub walk_step: f64,
    /// Linear factor on the user-side noise PSD (receiver noise figure).
    pub xu_noise_factor: f64,
}

impl ScenarioConfig {
    /// Builds the standard scenario with `m` channels and `n` users.
    pub fn standard(num_channels: usize, num_users: usize) -> Self {
        Self {
            num_channels,
            num_users,
            bandwidth: 1e10,
            noise_psd: 10f64.powf(-20.4), // -174 dBm/Hz
            utti: 0.5e-3,
            dtti_limit: 1.5e-3,
            dl_power_min: 0.0,
            dl_power_max: 20.0,
            buffer_init_range: [10.0 * MBIT, 20.0 * MBIT],
            ul_power_range: [3.0e-3, 10.0e-3],
            augment_range: [5.0, 15.0],
            max_iterations: 100,
            fading: FadingParams::new(2.5e-6, 2.0, 3.0, Complex64::new(1.0, 0.0)),
            area: [100.0, 100.0],
            height: 3.0,
            walk_step: 1.0,
            xu_noise_factor: 200.0,
        }
    }

    /// Parses an "m-n" preset name, e.g. "3-8" for 3 channels and 8 users.
    pub fn preset(name: &str) -> Option<Self> {
        let (m, n) = name.split_once('-')?;
        let m: usize = m.trim().parse().ok()?;
        let n: usize = n.trim().parse().ok()?;
        if m == 0 || n == 0 {
            return None;
        }
        Some(Self::standard(m, n))
    }

    /// Uplink state length: buffers, powers, and the gain table.
    pub fn uplink_state_dim(&self) -> usize {
        self.num_users * (self.num_channels + 2)
    }

    /// Downlink state length: assignment, buffers, rendered sizes, gains.
    pub fn downlink_state_dim(&self) -> usize {
        self.num_users * (self.num_channels + 3)
    }

    /// Normalizer for buffer state components: the largest initial buffer,
    /// so fresh buffers map into (0, 1].
    pub fn buffer_norm_bits(&self) -> f64 {
        self.buffer_init_range[1]
    }

    /// Normalizer for uplink power state components: the largest draw.
    pub fn ul_power_norm_w(&self) -> f64 {
        self.ul_power_range[1]
    }

    /// Normalizer for rendered-frame state components: the largest frame any
    /// episode can produce.
    pub fn augment_norm_bits(&self) -> f64 {
        self.augment_range[1] * self.buffer_init_range[1]
    }

    fn validate(&self) {
        assert!(self.num_channels >= 1, "need at least one channel");
        assert!(self.num_users >= 1, "need at least one user");
        assert!(self.bandwidth > 0.0 && self.noise_psd > 0.0 && self.xu_noise_factor > 0.0);
        assert!(self.utti > 0.0 && self.dtti_limit > 0.0);
        assert!(self.dl_power_min < self.dl_power_max, "power bounds inverted");
        assert!(self.dl_power_min >= 0.0);
        let ordered = |r: [f64; 2]| r[0] <= r[1] && r[0] >= 0.0;
        assert!(ordered(self.buffer_init_range), "buffer range inverted");
        assert!(self.buffer_init_range[0] > 0.0, "buffers must start non-empty");
        assert!(ordered(self.ul_power_range), "uplink power range inverted");
        assert!(self.ul_power_range[0] > 0.0, "uplink power must be positive");
        assert!(ordered(self.augment_range), "augment range inverted");
        assert!(self.max_iterations >= 1);
        assert!(self.walk_step >= 0.0);
    }
}

/// Uplink outcome carried into the matching downlink slot.
#[derive(Debug, Clone)]
pub struct PendingUplink {
    /// The channel assignment in force for this iteration.
    pub assignment: ChannelAssignment,
    /// Uploaded bits per user, `D_n = min(B_n, r_n * utti)`.
    pub payload_bits: Vec<f64>,
    /// Rendered frame sizes per user, `D'_n = c_n * D_n`.
    pub augmented_bits: Vec<f64>,
    /// Achieved uplink rates in bit/s.
    pub ul_rates: Vec<f64>,
}

/// Per-episode KPI accumulators; all grow monotonically within an episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KpiAccumulators {
    /// Completed uplink-downlink iterations.
    pub iterations: usize,
    /// Deliveries that missed the downlink deadline.
    pub retrans_count: usize,
    /// Scheduled transmissions that carried payload.
    pub transmission_count: usize,
    /// Total transmit energy in joules.
    pub energy_j: f64,
    /// Sum over iterations of the largest per-user uplink rate, bit/s.
    pub max_ul_rate_sum_bps: f64,
    /// Accumulated latency in seconds.
    pub total_delay_s: f64,
}

impl KpiAccumulators {
    /// Collapses the accumulators into reporting units.
    pub fn summary(&self) -> KpiSummary {
        let iters = self.iterations;
        KpiSummary {
            iterations: iters,
            total_delay_ms: self.total_delay_s * 1e3,
            retrans_pct: if self.transmission_count == 0 {
                0.0
            } else {
                self.retrans_count as f64 / self.transmission_count as f64 * 100.0
            },
            max_ul_rate_gbps: if iters == 0 {
                0.0
            } else {
                self.max_ul_rate_sum_bps / iters as f64 / 1e9
            },
            energy_j: self.energy_j,
        }
    }
}

/// Episode-level KPIs in reporting units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpiSummary {
    pub iterations: usize,
    pub total_delay_ms: f64,
    /// Failed deliveries per payload-carrying transmission, percent.
    pub retrans_pct: f64,
    /// Mean over iterations of the per-iteration best uplink rate.
    pub max_ul_rate_gbps: f64,
    pub energy_j: f64,
}

/// Mutable state of one episode.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    /// Remaining buffered bits per user.
    pub buffers: Vec<f64>,
    /// Initial buffered bits per user.
    pub initial_buffers: Vec<f64>,
    /// Fixed uplink transmit power per user, W.
    pub ul_power: Vec<f64>,
    /// User and console placement.
    pub topology: Topology,
    /// Channel coefficients, row-major user x channel.
    pub gains: Vec<Complex64>,
    /// Completed iterations.
    pub t: usize,
    /// Uplink outcome awaiting its downlink slot.
    pub pending_ul: Option<PendingUplink>,
    /// KPI accumulators.
    pub kpi: KpiAccumulators,
}

/// Uplink slot outcome.
#[derive(Debug, Clone)]
pub struct UplinkResult {
    /// Upload-efficiency reward `R_u`, in `[-1, 0]`.
    pub r_u: f64,
    /// Downlink decision state.
    pub s_d: Vec<f64>,
    /// Achieved uplink rates in bit/s.
    pub rates: Vec<f64>,
    /// Uploaded bits per user.
    pub payload_bits: Vec<f64>,
    /// Rendered frame sizes per user in bits.
    pub augmented_bits: Vec<f64>,
}

/// Per-iteration KPI increments, exposed for metrics and replay checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepKpi {
    pub delay_s: f64,
    pub failures: usize,
    pub transmissions: usize,
    pub energy_j: f64,
    pub max_ul_rate_bps: f64,
}

/// Downlink slot outcome.
#[derive(Debug, Clone)]
pub struct DownlinkResult {
    /// Downlink reward `R_d` (delay + energy + guide penalties).
    pub r_d: f64,
    /// Shared reward `R_g = -1 - 0.5 * failures`.
    pub r_g: f64,
    /// Uplink decision state for the next iteration.
    pub s_u_next: Vec<f64>,
    /// True when every buffer is empty or the iteration cap is reached.
    pub done: bool,
    /// Achieved downlink rates in bit/s.
    pub rates: Vec<f64>,
    /// Delivery delays `d'_n` in seconds; 0 without payload, may be
    /// infinite when a scheduled user got zero power.
    pub delays_s: Vec<f64>,
    /// Deadline failures `I_n`.
    pub failures: Vec<bool>,
    /// Energy spent this iteration in joules.
    pub energy_j: f64,
    /// KPI increments applied this iteration.
    pub step_kpi: StepKpi,
}

/// One environment transition as stored by trajectory buffers.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub s_u: Vec<f64>,
    pub a_u: u64,
    pub r_u: f64,
    pub s_d: Vec<f64>,
    pub a_d: Vec<f64>,
    pub r_d: f64,
    pub r_g: f64,
    pub s_u_next: Vec<f64>,
    pub done: bool,
    pub kpi: StepKpi,
}

/// The environment: a scenario plus the episode currently in flight.
#[derive(Debug, Clone)]
pub struct Env {
    config: ScenarioConfig,
    state: Option<EpisodeState>,
}

impl Env {
    pub fn new(config: ScenarioConfig) -> Self {
        config.validate();
        Self { config, state: None }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn state(&self) -> &EpisodeState {
        self.state.as_ref().expect("environment not reset yet")
    }

    /// Starts a fresh episode: buffers, uplink powers, and placement come
    /// from `init_rng`; the initial fades from `fading_rng`. Returns the
    /// initial uplink state.
    pub fn reset<R: Rng>(&mut self, init_rng: &mut R, fading_rng: &mut R) -> Vec<f64> {
        let cfg = &self.config;
        let n = cfg.num_users;
        let buffers: Vec<f64> = (0..n)
            .map(|_| init_rng.gen_range(cfg.buffer_init_range[0]..=cfg.buffer_init_range[1]))
            .collect();
        let ul_power: Vec<f64> = (0..n)
            .map(|_| init_rng.gen_range(cfg.ul_power_range[0]..=cfg.ul_power_range[1]))
            .collect();
        let topology = Topology::sample(n, cfg.area, cfg.height, init_rng);
        let mut state = EpisodeState {
            initial_buffers: buffers.clone(),
            buffers,
            ul_power,
            topology,
            gains: vec![Complex64::new(0.0, 0.0); n * cfg.num_channels],
            t: 0,
            pending_ul: None,
            kpi: KpiAccumulators::default(),
        };
        Self::resample_gains(&self.config, &mut state, fading_rng);
        self.state = Some(state);
        self.build_uplink_state()
    }

    /// Fresh fades at the current user positions, one per (user, channel).
    fn resample_gains<R: Rng>(cfg: &ScenarioConfig, state: &mut EpisodeState, rng: &mut R) {
        for user in 0..cfg.num_users {
            let beta = path_gain(state.topology.distance_to_console(user), &cfg.fading);
            for ch in 0..cfg.num_channels {
                let g = sample_small_scale(&cfg.fading, rng);
                state.gains[user * cfg.num_channels + ch] = channel_coeff(beta, g);
            }
        }
    }

    pub fn is_done(&self) -> bool {
        let state = self.state();
        state.buffers.iter().all(|&b| b <= 0.0) || state.t >= self.config.max_iterations
    }

    /// Uplink slot: schedules per `gamma`, moves data, renders frames.
    /// The render ratio `c_n` is drawn from `augment_rng` for every user
    /// so the stream advances identically regardless of the action.
    pub fn uplink_step<R: Rng>(&mut self, gamma: &[usize], augment_rng: &mut R) -> UplinkResult {
        assert!(!self.is_done(), "sequencing error: uplink step on a finished episode");
        let cfg = self.config.clone();
        let state = self.state.as_mut().expect("environment not reset yet");
        assert!(
            state.pending_ul.is_none(),
            "sequencing error: two uplink steps without a downlink step"
        );
        assert_eq!(gamma.len(), cfg.num_users, "gamma length must match user count");

        let assignment = ChannelAssignment::new(gamma.to_vec(), cfg.num_channels);
        let gains = PowerGains::new(
            state.gains.iter().map(|h| channel::power_gain(*h)).collect(),
            cfg.num_channels,
        );
        let budget = LinkBudget::new(
            cfg.bandwidth,
            cfg.noise_psd,
            vec![cfg.noise_psd * cfg.xu_noise_factor; cfg.num_users],
            state.ul_power.clone(),
            vec![0.0; cfg.num_users],
        );
        let rates = uplink_rates(&assignment, &budget, &gains);

        let payload_bits: Vec<f64> = (0..cfg.num_users)
            .map(|n| {
                if assignment.is_scheduled(n) {
                    state.buffers[n].min(rates[n] * cfg.utti)
                } else {
                    0.0
                }
            })
            .collect();
        let augmented_bits: Vec<f64> = payload_bits
            .iter()
            .map(|&d| d * augment_rng.gen_range(cfg.augment_range[0]..=cfg.augment_range[1]))
            .collect();

        let best_rate = rates.iter().cloned().fold(0.0, f64::max);
        state.kpi.max_ul_rate_sum_bps += best_rate;

        let r_u = rewards::upload_efficiency_penalty(&payload_bits, &state.initial_buffers);
        state.pending_ul = Some(PendingUplink {
            assignment,
            payload_bits: payload_bits.clone(),
            augmented_bits: augmented_bits.clone(),
            ul_rates: rates.clone(),
        });
        UplinkResult {
            r_u,
            s_d: self.build_downlink_state(),
            rates,
            payload_bits,
            augmented_bits,
        }
    }

    /// Downlink slot: delivers the rendered frames with the granted
    /// powers, settles buffers and KPIs, then advances mobility and
    /// fading for the next iteration.
    pub fn downlink_step<R: Rng>(&mut self, dl_power: &[f64], fading_rng: &mut R) -> DownlinkResult {
        let cfg = self.config.clone();
        let state = self.state.as_mut().expect("environment not reset yet");
        let pending = state
            .pending_ul
            .take()
            .expect("sequencing error: downlink step without a pending uplink");
        assert_eq!(dl_power.len(), cfg.num_users, "power length must match user count");
        for (n, &p) in dl_power.iter().enumerate() {
            assert!(
                p >= cfg.dl_power_min && p <= cfg.dl_power_max,
                "downlink power {p} for user {n} outside [{}, {}]",
                cfg.dl_power_min,
                cfg.dl_power_max
            );
        }

        let gains = PowerGains::new(
            state.gains.iter().map(|h| channel::power_gain(*h)).collect(),
            cfg.num_channels,
        );
        let budget = LinkBudget::new(
            cfg.bandwidth,
            cfg.noise_psd,
            vec![cfg.noise_psd * cfg.xu_noise_factor; cfg.num_users],
            state.ul_power.clone(),
            dl_power.to_vec(),
        );
        let rates = downlink_rates(&pending.assignment, &budget, &gains);

        let scheduled: Vec<bool> =
            (0..cfg.num_users).map(|n| pending.assignment.is_scheduled(n)).collect();
        // d' = D'/r'; zero-payload users stay at 0, zero-rate deliveries
        // blow up to +inf and land in the failure branch below.
        let delays_s: Vec<f64> = (0..cfg.num_users)
            .map(|n| {
                if scheduled[n] && pending.augmented_bits[n] > 0.0 {
                    pending.augmented_bits[n] / rates[n]
                } else {
                    0.0
                }
            })
            .collect();
        let failures: Vec<bool> = delays_s.iter().map(|&d| d > cfg.dtti_limit).collect();

        for n in 0..cfg.num_users {
            if scheduled[n] && !failures[n] {
                state.buffers[n] -= pending.payload_bits[n];
            }
        }

        let energy_j =
            rewards::downlink_energy_j(dl_power, &delays_s, &scheduled, cfg.dtti_limit);
        let r_dr = rewards::download_efficiency_penalty(&delays_s, cfg.dtti_limit);
        let r_ene =
            rewards::energy_allocation_penalty(dl_power, cfg.dl_power_min, cfg.dl_power_max);
        let r_gu =
            rewards::idle_power_guide_penalty(dl_power, &scheduled, rewards::POWER_EPSILON);
        let r_d = r_dr + r_ene + r_gu;
        let r_g = rewards::iteration_penalty(&failures);

        let worst_delay = delays_s.iter().cloned().fold(0.0, f64::max);
        let step_kpi = StepKpi {
            delay_s: cfg.utti + worst_delay.min(cfg.dtti_limit),
            failures: failures.iter().filter(|&&i| i).count(),
            transmissions: (0..cfg.num_users)
                .filter(|&n| scheduled[n] && pending.payload_bits[n] > 0.0)
                .count(),
            energy_j,
            max_ul_rate_bps: pending.ul_rates.iter().cloned().fold(0.0, f64::max),
        };
        state.kpi.iterations += 1;
        state.kpi.retrans_count += step_kpi.failures;
        state.kpi.transmission_count += step_kpi.transmissions;
        state.kpi.energy_j += step_kpi.energy_j;
        state.kpi.total_delay_s += step_kpi.delay_s;

        state.t += 1;
        state.topology.random_walk(cfg.walk_step, fading_rng);
        Self::resample_gains(&cfg, state, fading_rng);

        let done = self.is_done();
        DownlinkResult {
            r_d,
            r_g,
            s_u_next: self.build_uplink_state(),
            done,
            rates,
            delays_s,
            failures,
            energy_j,
            step_kpi,
        }
    }

    /// Uplink state: `[B_n / B_max] ++ [p_n / p_max] ++ [gain features]`.
    pub fn build_uplink_state(&self) -> Vec<f64> {
        let cfg = &self.config;
        let state = self.state();
        let mut s = Vec::with_capacity(cfg.uplink_state_dim());
        s.extend(state.buffers.iter().map(|&b| b / cfg.buffer_norm_bits()));
        s.extend(state.ul_power.iter().map(|&p| p / cfg.ul_power_norm_w()));
        s.extend(state.gains.iter().map(|h| gain_feature(channel::power_gain(*h))));
        s
    }

    /// Downlink state: `[gamma_n / M] ++ [B_n / B_max] ++
    /// [D'_n / (c_max B_max)] ++ [gain features]`.
    pub fn build_downlink_state(&self) -> Vec<f64> {
        let cfg = &self.config;
        let state = self.state();
        let pending = state
            .pending_ul
            .as_ref()
            .expect("sequencing error: downlink state requested without a pending uplink");
        let mut s = Vec::with_capacity(cfg.downlink_state_dim());
        s.extend(
            pending.assignment.gamma().iter().map(|&g| g as f64 / cfg.num_channels as f64),
        );
        s.extend(state.buffers.iter().map(|&b| b / cfg.buffer_norm_bits()));
        s.extend(pending.augmented_bits.iter().map(|&d| d / cfg.augment_norm_bits()));
        s.extend(state.gains.iter().map(|h| gain_feature(channel::power_gain(*h))));
        s
    }

    pub fn kpi_summary(&self) -> KpiSummary {
        self.state().kpi.summary()
    }
}

/// Squashes a power gain onto roughly [0, 1]:
/// `clamp((log10(|h|^2) + 12) / 8, 0, 1)`.
fn gain_feature(power_gain: f64) -> f64 {
    ((power_gain.log10() + 12.0) / 8.0).clamp(0.0, 1.0)
}

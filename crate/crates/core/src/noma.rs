//! Successive-interference-cancellation decoding orders and link rates.
//!
//! Users sharing a channel are separated in the power domain. On the uplink
//! the console decodes in descending received-power order, so a user at
//! decode rank `i` only suffers interference from the users decoded after
//! it. On the downlink users are ranked by channel-to-noise ratio; a user
//! cancels the signals of everyone ranked after it and keeps interference
//! from everyone ranked before it, evaluated at its own channel gain.
//!
//! All rates are Shannon rates in bit/s over the per-channel bandwidth.

/// Per-user channel choice for one slot: `gamma[n] = 0` means idle,
/// `1..=M` selects a channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelAssignment {
    gamma: Vec<usize>,
    num_channels: usize,
}

impl ChannelAssignment {
    pub fn new(gamma: Vec<usize>, num_channels: usize) -> Self {
        assert!(num_channels > 0, "need at least one channel");
        for (n, &g) in gamma.iter().enumerate() {
            assert!(
                g <= num_channels,
                "user {n} assigned channel {g}, only {num_channels} exist"
            );
        }
        Self { gamma, num_channels }
    }

    pub fn num_users(&self) -> usize {
        self.gamma.len()
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    /// True when user `n` transmits this slot.
    pub fn is_scheduled(&self, n: usize) -> bool {
        self.gamma[n] != 0
    }

    pub fn scheduled_count(&self) -> usize {
        self.gamma.iter().filter(|&&g| g != 0).count()
    }

    /// Users assigned to channel `m` (1-based), in ascending user index.
    pub fn members(&self, m: usize) -> Vec<usize> {
        assert!(m >= 1 && m <= self.num_channels, "channel {m} out of range");
        (0..self.gamma.len()).filter(|&n| self.gamma[n] == m).collect()
    }
}

/// Transmit powers and noise levels for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// Per-channel bandwidth in Hz.
    pub bandwidth: f64,
    /// Noise power spectral density at the console receiver, W/Hz.
    pub noise_psd_mc: f64,
    /// Noise power spectral density at each user receiver, W/Hz.
    pub noise_psd_xu: Vec<f64>,
    /// Uplink transmit power per user, W.
    pub ul_power: Vec<f64>,
    /// Downlink transmit power per user, W.
    pub dl_power: Vec<f64>,
}

impl LinkBudget {
    pub fn new(
        bandwidth: f64,
        noise_psd_mc: f64,
        noise_psd_xu: Vec<f64>,
        ul_power: Vec<f64>,
        dl_power: Vec<f64>,
    ) -> Self {
        assert!(bandwidth > 0.0, "bandwidth must be positive");
        assert!(noise_psd_mc > 0.0, "console noise PSD must be positive");
        assert!(noise_psd_xu.iter().all(|&s| s > 0.0), "user noise PSDs must be positive");
        assert!(ul_power.iter().all(|&p| p > 0.0), "uplink powers must be positive");
        assert!(dl_power.iter().all(|&p| p >= 0.0), "downlink powers must be non-negative");
        assert_eq!(noise_psd_xu.len(), ul_power.len());
        assert_eq!(ul_power.len(), dl_power.len());
        Self { bandwidth, noise_psd_mc, noise_psd_xu, ul_power, dl_power }
    }
}

/// Power gains `|h_{n,m}|^2`, stored row-major per user.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerGains {
    data: Vec<f64>,
    num_channels: usize,
}

impl PowerGains {
    pub fn new(data: Vec<f64>, num_channels: usize) -> Self {
        assert!(num_channels > 0);
        assert_eq!(data.len() % num_channels, 0, "gain table is not rectangular");
        assert!(data.iter().all(|&g| g >= 0.0), "power gains must be non-negative");
        Self { data, num_channels }
    }

    pub fn num_users(&self) -> usize {
        self.data.len() / self.num_channels
    }

    /// Gain of user `n` on channel `m` (1-based).
    pub fn get(&self, n: usize, m: usize) -> f64 {
        assert!(m >= 1 && m <= self.num_channels, "channel {m} out of range");
        self.data[n * self.num_channels + (m - 1)]
    }
}

/// Shannon rate `W log2(1 + sinr)` via the natural-log ratio.
fn shannon_rate(bandwidth: f64, sinr: f64) -> f64 {
    bandwidth * (1.0 + sinr).ln() / std::f64::consts::LN_2
}

/// Sorts `members` by `key` descending, breaking ties by ascending index.
fn order_by_key_desc(members: &[usize], key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut order = members.to_vec();
    order.sort_by(|&a, &b| {
        key(b).partial_cmp(&key(a)).expect("sort key must not be NaN").then(a.cmp(&b))
    });
    order
}

/// Uplink decode order: descending received power `p_n |h_{n,m}|^2`,
/// ties by ascending user index. Powers and gains are indexed by user id;
/// gains are the column for the channel in question.
pub fn uplink_order(members: &[usize], ul_power: &[f64], gain_on_channel: &[f64]) -> Vec<usize> {
    assert!(!members.is_empty(), "uplink order needs at least one member");
    order_by_key_desc(members, |n| ul_power[n] * gain_on_channel[n])
}

/// Downlink cancellation order: descending channel-to-noise ratio
/// `|h_{n,m}|^2 / sigma_{n,m}^2`, ties by ascending user index.
pub fn downlink_order(
    members: &[usize],
    gain_on_channel: &[f64],
    noise_psd_xu: &[f64],
) -> Vec<usize> {
    assert!(!members.is_empty(), "downlink order needs at least one member");
    order_by_key_desc(members, |n| gain_on_channel[n] / noise_psd_xu[n])
}

/// Achievable uplink rate per user. Idle users get 0. A user at decode
/// rank `i` on its channel sees the summed received power of the users
/// decoded after it as interference.
pub fn uplink_rates(
    assignment: &ChannelAssignment,
    budget: &LinkBudget,
    gains: &PowerGains,
) -> Vec<f64> {
    let n_users = assignment.num_users();
    let mut rates = vec![0.0; n_users];
    for m in 1..=assignment.num_channels() {
        let members = assignment.members(m);
        if members.is_empty() {
            continue;
        }
        let column: Vec<f64> = (0..n_users).map(|n| gains.get(n, m)).collect();
        let order = uplink_order(&members, &budget.ul_power, &column);
        let received: Vec<f64> =
            order.iter().map(|&n| budget.ul_power[n] * column[n]).collect();
        let noise = budget.bandwidth * budget.noise_psd_mc;
        // Tail sums: interference on rank i is everything decoded after i.
        let mut tail = 0.0;
        let mut interference = vec![0.0; order.len()];
        for i in (0..order.len()).rev() {
            interference[i] = tail;
            tail += received[i];
        }
        for (i, &n) in order.iter().enumerate() {
            rates[n] = shannon_rate(budget.bandwidth, received[i] / (interference[i] + noise));
        }
    }
    rates
}

/// Achievable downlink rate per user. Idle users get 0, as do scheduled
/// users granted zero power. A user at cancellation rank `i` keeps the
/// signals of ranks `0..i` as interference, weighted by its own gain.
pub fn downlink_rates(
    assignment: &ChannelAssignment,
    budget: &LinkBudget,
    gains: &PowerGains,
) -> Vec<f64> {
    let n_users = assignment.num_users();
    let mut rates = vec![0.0; n_users];
    for m in 1..=assignment.num_channels() {
        let members = assignment.members(m);
        if members.is_empty() {
            continue;
        }
        let column: Vec<f64> = (0..n_users).map(|n| gains.get(n, m)).collect();
        let order = downlink_order(&members, &column, &budget.noise_psd_xu);
        // Prefix sums of the powers ranked before each position.
        let mut ahead_power = 0.0;
        for &n in &order {
            let own = budget.dl_power[n] * column[n];
            let noise = budget.bandwidth * budget.noise_psd_xu[n];
            let interference = ahead_power * column[n];
            rates[n] = shannon_rate(budget.bandwidth, own / (interference + noise));
            ahead_power += budget.dl_power[n];
        }
    }
    rates
}

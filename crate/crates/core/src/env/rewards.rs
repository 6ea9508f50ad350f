//! Reward components for the two scheduling agents and the shared signal.
//!
//! All components are penalties (non-positive). The uplink agent is scored
//! on how much of each user's initial buffer moved this slot; the downlink
//! agent on delivery delay, spent power, and power leaked to idle users;
//! the shared signal charges a fixed cost per iteration plus a surcharge
//! per failed delivery, so shorter episodes with fewer repeats win.

/// Idle users allocated more than this are charged the guide penalty.
pub const POWER_EPSILON: f64 = 1e-6;

/// Uplink efficiency penalty: `-sum_n (1 - D_n / B_n^0) / N`, in `[-1, 0]`.
pub fn upload_efficiency_penalty(payload_bits: &[f64], initial_bits: &[f64]) -> f64 {
    let n = payload_bits.len() as f64;
    -payload_bits
        .iter()
        .zip(initial_bits)
        .map(|(&d, &b0)| 1.0 - d / b0)
        .sum::<f64>()
        / n
}

/// Downlink delay penalty: `-min(sum_n d'_n / (tau_d * N), 1)`, in `[-1, 0]`.
///
/// Infinite delays (scheduled users granted zero power) saturate the
/// penalty at -1.
pub fn download_efficiency_penalty(delays_s: &[f64], dtti_limit: f64) -> f64 {
    let n = delays_s.len() as f64;
    let total: f64 = delays_s.iter().sum();
    -(total / (dtti_limit * n)).min(1.0)
}

/// Power-budget penalty on the full allocation vector:
/// `-sum_n (p'_n - p'_min) / ((p'_max - p'_min) * N) * 0.5`, in `[-0.5, 0]`.
pub fn energy_allocation_penalty(dl_power: &[f64], p_min: f64, p_max: f64) -> f64 {
    let n = dl_power.len() as f64;
    -dl_power
        .iter()
        .map(|&p| (p - p_min) / (p_max - p_min))
        .sum::<f64>()
        / n
        * 0.5
}

/// Guide penalty: -0.2 for every idle user allocated more than
/// [`POWER_EPSILON`] watts.
pub fn idle_power_guide_penalty(dl_power: &[f64], scheduled: &[bool], epsilon: f64) -> f64 {
    -0.2 * dl_power
        .iter()
        .zip(scheduled)
        .filter(|&(&p, &z)| !z && p > epsilon)
        .count() as f64
}

/// Shared iteration penalty: `-1 - 0.5 * (number of failed deliveries)`.
pub fn iteration_penalty(failures: &[bool]) -> f64 {
    -1.0 - 0.5 * failures.iter().filter(|&&i| i).count() as f64
}

/// Energy actually spent this slot: `sum_{scheduled} p'_n * min(d'_n, tau_d)`
/// joules. A failed delivery burns the full slot.
pub fn downlink_energy_j(
    dl_power: &[f64],
    delays_s: &[f64],
    scheduled: &[bool],
    dtti_limit: f64,
) -> f64 {
    dl_power
        .iter()
        .zip(delays_s)
        .zip(scheduled)
        .filter(|&(_, &z)| z)
        .map(|((&p, &d), _)| p * d.min(dtti_limit))
        .sum()
}

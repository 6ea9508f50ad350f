//! Truncated generalized advantage estimation.

/// Computes advantages by the backward recursion
/// `A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}` with
/// `delta_t = r_t + gamma * (1 - done_t) * nextValue_t - value_t`.
/// Episode boundaries (`done_t = true`) truncate both the bootstrap and
/// the accumulation, so no advantage mixes information across episodes.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let t_len = rewards.len();
    assert_eq!(values.len(), t_len, "values length mismatch");
    assert_eq!(next_values.len(), t_len, "next values length mismatch");
    assert_eq!(dones.len(), t_len, "done flags length mismatch");
    let mut advantages = vec![0.0; t_len];
    let mut carry = 0.0;
    for t in (0..t_len).rev() {
        let cont = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * cont * next_values[t] - values[t];
        carry = delta + gamma * lambda * cont * carry;
        advantages[t] = carry;
    }
    advantages
}

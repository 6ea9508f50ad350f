//! Positional encoding between channel-choice vectors and flat action ids.
//!
//! A scheduling action assigns each of the `N` users a channel in
//! `{0, 1, .., M}` (0 = stay idle). The vector is packed into a single
//! integer in base `M + 1` with user 0 as the least significant digit,
//! which lets a categorical policy head index all `(M+1)^N` choices.

/// Number of distinct uplink actions, `(M+1)^N`.
pub fn uplink_action_count(num_users: usize, num_channels: usize) -> u64 {
    let base = (num_channels + 1) as u64;
    let mut count: u64 = 1;
    for _ in 0..num_users {
        count = count
            .checked_mul(base)
            .expect("uplink action space exceeds u64; reduce users or channels");
    }
    count
}

/// Packs a channel-choice vector into its action id.
pub fn encode_uplink_action(gamma: &[usize], num_channels: usize) -> u64 {
    let base = (num_channels + 1) as u64;
    let mut index: u64 = 0;
    for (n, &g) in gamma.iter().enumerate().rev() {
        assert!(
            g <= num_channels,
            "gamma[{n}] = {g} outside 0..={num_channels}"
        );
        index = index * base + g as u64;
    }
    index
}

/// Unpacks an action id back into its channel-choice vector.
pub fn decode_uplink_action(index: u64, num_users: usize, num_channels: usize) -> Vec<usize> {
    let count = uplink_action_count(num_users, num_channels);
    assert!(index < count, "action id {index} outside 0..{count}");
    let base = (num_channels + 1) as u64;
    let mut rest = index;
    let mut gamma = Vec::with_capacity(num_users);
    for _ in 0..num_users {
        gamma.push((rest % base) as usize);
        rest /= base;
    }
    gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn test_all_idle_encodes_to_zero() {
        assert_eq!(encode_uplink_action(&[0, 0, 0, 0], 3), 0);
        assert_eq!(decode_uplink_action(0, 4, 3), vec![0, 0, 0, 0]);
    }

    #[test]
    fn test_positional_sum_example() {
        // N = 2, M = 3: (2, 3) -> 2 * 4^0 + 3 * 4^1 = 14.
        assert_eq!(encode_uplink_action(&[2, 3], 3), 14);
        assert_eq!(decode_uplink_action(14, 2, 3), vec![2, 3]);
    }

    #[test]
    fn test_action_count() {
        assert_eq!(uplink_action_count(4, 3), 256);
        assert_eq!(uplink_action_count(8, 3), 65536);
        assert_eq!(uplink_action_count(0, 3), 1);
    }

    #[test]
    fn test_round_trip_exhaustive_n3_m3() {
        for index in 0..uplink_action_count(3, 3) {
            let gamma = decode_uplink_action(index, 3, 3);
            assert_eq!(gamma.len(), 3);
            assert!(gamma.iter().all(|&g| g <= 3));
            assert_eq!(encode_uplink_action(&gamma, 3), index);
        }
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn test_encode_rejects_out_of_range_channel() {
        encode_uplink_action(&[0, 4], 3);
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn test_decode_rejects_out_of_range_index() {
        decode_uplink_action(256, 4, 3);
    }

    proptest! {
        #[test]
        fn prop_encode_decode_round_trip(
            num_users in 1usize..8,
            num_channels in 1usize..5,
            seed in 0u64..u64::MAX,
        ) {
            let count = uplink_action_count(num_users, num_channels);
            let index = seed % count;
            let gamma = decode_uplink_action(index, num_users, num_channels);
            prop_assert_eq!(encode_uplink_action(&gamma, num_channels), index);
        }
    }
}

//! Link-level simulator and reinforcement-learning schedulers for a console
//! that streams rendered XR frames to wireless users over shared NOMA
//! spectrum.
//!
//! Users upload field-of-view updates on an uplink slot, the console renders
//! an augmented (roughly 5-15x larger) frame, and the downlink must return it
//! within a hard slot deadline or the whole exchange repeats. Two policy
//! networks pick the channel assignment (uplink) and the transmit powers
//! (downlink); training couples them through a shared global reward.
//!
//! Module layout:
//! - [`channel`]: path loss, Rician fading, user mobility.
//! - [`noma`]: successive-interference-cancellation orders and link rates.
//! - [`env`]: the two-stage scheduling environment and its rewards.
//! - [`nn`]: small dense networks, policy heads, and Adam, all in `f64`.
//! - [`aahc`]: PPO trainers (hybrid-critic, independent, centralized) and
//!   the random baseline plus greedy evaluation.
//! - [`harness`]: config parsing, seeded RNG streams, metrics, checkpoints,
//!   and multi-seed experiment orchestration.

pub mod aahc;
pub mod channel;
pub mod env;
pub mod harness;
pub mod nn;
pub mod noma;

//! Training algorithms for the two-stage scheduling problem.
//!
//! The pieces compose bottom-up: truncated advantage estimation
//! ([`gae`]), the clipped surrogate and its gradient ([`ppo`]), rollout
//! storage ([`buffer`]), the stage actors ([`policy`]), the multi-branch
//! critic ([`critic`]), and the trainer that wires a scheme's branch
//! plan, rollout loop, and update phases together ([`trainer`]). Greedy
//! evaluation and the random baseline live in [`eval`].

pub mod buffer;
pub mod critic;
pub mod eval;
pub mod gae;
pub mod hyper;
pub mod policy;
pub mod ppo;
pub mod trainer;

pub use buffer::{TrainRecord, TrajectoryBuffer};
pub use critic::{BranchInput, Critic, ValueBranch};
pub use eval::{evaluate, EvalRecord, Policy};
pub use gae::compute_gae;
pub use hyper::Hyperparams;
pub use policy::{DownlinkActor, PowerSample, UplinkActor};
pub use ppo::{ppo_clip_grad, ppo_clip_surrogate};
pub use trainer::{Algorithm, BranchPlan, CycleStats, Trainer, TrainerState};

//! Run orchestration: seeding, configuration, metrics, checkpoints, and
//! multi-seed experiments.

pub mod checkpoint;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod rng;
pub mod selfcheck;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta, CHECKPOINT_VERSION};
pub use config::{
    dbm_per_hz_to_w_per_hz, render_resolved, resolve_run_spec, write_resolved, RunSpec,
    DEFAULT_NOISE_DBM_PER_HZ,
};
pub use experiment::{run_experiment, render_summary, ExperimentReport, SeedOutcome};
pub use metrics::{append_metrics, format_sig6, write_metrics, MetricsRow, CSV_HEADER};
pub use rng::{stream_seed, RngStreams, RngStreamsState, Stream, StreamState};
pub use selfcheck::{run_selfcheck, CheckReport};

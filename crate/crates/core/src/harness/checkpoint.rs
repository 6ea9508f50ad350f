//! Self-describing JSON checkpoints for trained parameter sets.
//!
//! Everything is stored as structured JSON: network layer sizes travel
//! with the weights, floats serialize in shortest round-trip decimal form
//! (bit-identical on reload), and a meta block pins what the snapshot is.
//! Saving the loaded value again reproduces the file byte for byte.

use crate::aahc::trainer::TrainerState;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Bumped whenever the stored layout changes shape.
pub const CHECKPOINT_VERSION: u32 = 1;

/// What the snapshot is: scheme, scenario, seed, and progress.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub format_version: u32,
    pub algo: String,
    pub scenario: String,
    pub seed: u64,
    pub env_step: usize,
}

/// A complete saved training state plus its description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub state: TrainerState,
}

/// Serializes a checkpoint to pretty JSON at `path`.
pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let json = serde_json::to_string_pretty(checkpoint).context("cannot serialize checkpoint")?;
    std::fs::write(path, json + "\n")
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Loads and version-checks a checkpoint.
pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let checkpoint: Checkpoint = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid checkpoint", path.display()))?;
    if checkpoint.meta.format_version != CHECKPOINT_VERSION {
        bail!(
            "{} uses checkpoint format {} but this build reads format {}",
            path.display(),
            checkpoint.meta.format_version,
            CHECKPOINT_VERSION
        );
    }
    Ok(checkpoint)
}

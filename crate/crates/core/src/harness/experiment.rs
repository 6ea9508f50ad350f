//! Multi-seed experiment orchestration.
//!
//! One experiment is one algorithm on one scenario over a list of seeds.
//! Each seed gets its own derived random streams, its own metrics file,
//! and (for trainable schemes) its own checkpoint; a summary file then
//! aggregates the final evaluation rows across seeds. Seeds are isolated:
//! one seed failing is recorded and the rest still run.

use crate::aahc::eval::{evaluate, Policy};
use crate::aahc::trainer::{Algorithm, Trainer};
use crate::harness::checkpoint::{save_checkpoint, Checkpoint, CheckpointMeta, CHECKPOINT_VERSION};
use crate::harness::config::{write_resolved, RunSpec};
use crate::harness::metrics::{append_metrics, format_sig6, write_metrics, MetricsRow};
use crate::harness::rng::RngStreams;
use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

/// What one seed produced.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub metrics_path: PathBuf,
    /// Absent for the random baseline, which has nothing to save.
    pub checkpoint_path: Option<PathBuf>,
    /// The final evaluation row, also the last line of the metrics file.
    pub final_row: MetricsRow,
}

/// Everything an experiment run left behind.
#[derive(Debug)]
pub struct ExperimentReport {
    pub resolved_path: PathBuf,
    pub outcomes: Vec<SeedOutcome>,
    /// Seeds that failed, with their error chains.
    pub failures: Vec<(u64, String)>,
    /// Written whenever at least one seed succeeded.
    pub summary_path: Option<PathBuf>,
}

impl ExperimentReport {
    pub fn all_succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The KPI columns the cross-seed summary aggregates.
const KPI_COLUMNS: [(&str, fn(&MetricsRow) -> f64); 8] = [
    ("mean_ru", |r| r.mean_ru),
    ("mean_rd", |r| r.mean_rd),
    ("mean_rg", |r| r.mean_rg),
    ("mean_iterations", |r| r.mean_iterations),
    ("retrans_pct", |r| r.retrans_pct),
    ("max_ul_rate_gbps", |r| r.max_ul_rate_gbps),
    ("energy_j", |r| r.energy_j),
    ("total_delay_ms", |r| r.total_delay_ms),
];

/// The value a row actually shows after 6-digit rounding. The summary
/// aggregates these instead of the raw values so recomputing it from the
/// published CSV lines reproduces it exactly.
fn printed(x: f64) -> f64 {
    format_sig6(x).parse().expect("printed numbers parse back")
}

/// Renders the cross-seed summary from the final evaluation rows, one
/// KPI per line with its mean and population standard deviation.
pub fn render_summary(spec: &RunSpec, finals: &[MetricsRow]) -> String {
    assert!(!finals.is_empty(), "a summary needs at least one row");
    let mut out = String::new();
    let _ = writeln!(out, "final evaluation summary");
    let _ = writeln!(out, "algo = {}", spec.algorithm.name());
    let _ = writeln!(out, "scenario = {}", spec.scenario_name);
    let seeds: Vec<String> = finals.iter().map(|r| r.seed.to_string()).collect();
    let _ = writeln!(out, "seeds = {}", seeds.join(","));
    let _ = writeln!(out, "eval_episodes = {}", spec.eval_episodes);
    let _ = writeln!(out);
    let _ = writeln!(out, "kpi,mean,population_std");
    for (name, pick) in KPI_COLUMNS {
        let values: Vec<f64> = finals.iter().map(|row| printed(pick(row))).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let variance =
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let _ = writeln!(out, "{name},{},{}", format_sig6(mean), format_sig6(variance.sqrt()));
    }
    out
}

fn describe_row(row: &MetricsRow) -> String {
    format!(
        "evaluated {} episodes: global reward {:.4}, {:.1} iterations, {:.1}% retransmission",
        row.episodes, row.mean_rg, row.mean_iterations, row.retrans_pct
    )
}

/// Runs one seed end to end and returns its artifacts.
fn run_seed<F: FnMut(&str)>(spec: &RunSpec, seed: u64, log: &mut F) -> Result<SeedOutcome> {
    let algo = spec.algorithm;
    let stem = format!("{}_{}_seed{}", algo.name(), spec.scenario_name, seed);
    let metrics_path = spec.output_dir.join(format!("metrics_{stem}.csv"));
    let mut streams = RngStreams::derive(seed);

    if algo == Algorithm::Random {
        log(&format!(
            "seed {seed}: evaluating the random baseline over {} episodes",
            spec.eval_episodes
        ));
        let started = Instant::now();
        let record = evaluate(Policy::Random, &spec.config, spec.eval_episodes, &mut streams)?;
        let wall = started.elapsed().as_secs_f64() * 1e3;
        let row = MetricsRow::from_eval(algo.name(), &spec.scenario_name, seed, 0, &record, wall);
        write_metrics(&metrics_path, std::slice::from_ref(&row))?;
        log(&format!("seed {seed}: {}", describe_row(&row)));
        return Ok(SeedOutcome { seed, metrics_path, checkpoint_path: None, final_row: row });
    }

    log(&format!(
        "seed {seed}: training {} on {} for {} env steps",
        algo.name(),
        spec.scenario_name,
        spec.hyper.total_steps
    ));
    let started = Instant::now();
    let mut trainer = Trainer::new(algo, spec.config.clone(), spec.hyper.clone(), &mut streams);
    let cycles = trainer.train(&mut streams)?;
    log(&format!(
        "seed {seed}: reached step {} in {:.1} s over {} cycles",
        trainer.env_step,
        started.elapsed().as_secs_f64(),
        cycles.len()
    ));

    let rows: Vec<MetricsRow> = cycles
        .iter()
        .map(|cycle| MetricsRow::from_cycle(algo.name(), &spec.scenario_name, seed, cycle))
        .collect();
    write_metrics(&metrics_path, &rows)?;

    let checkpoint_path = spec.output_dir.join(format!("checkpoint_{stem}.json"));
    save_checkpoint(
        &checkpoint_path,
        &Checkpoint {
            meta: CheckpointMeta {
                format_version: CHECKPOINT_VERSION,
                algo: algo.name().to_string(),
                scenario: spec.scenario_name.clone(),
                seed,
                env_step: trainer.env_step,
            },
            state: trainer.state(),
        },
    )?;

    // Evaluation continues the seed's streams where training left them.
    let eval_started = Instant::now();
    let record = evaluate(
        Policy::Trained { ul: &trainer.ul_actor, dl: &trainer.dl_actor },
        &spec.config,
        spec.eval_episodes,
        &mut streams,
    )?;
    let wall = eval_started.elapsed().as_secs_f64() * 1e3;
    let final_row = MetricsRow::from_eval(
        algo.name(),
        &spec.scenario_name,
        seed,
        trainer.env_step,
        &record,
        wall,
    );
    append_metrics(&metrics_path, std::slice::from_ref(&final_row))?;
    log(&format!("seed {seed}: {}", describe_row(&final_row)));

    Ok(SeedOutcome { seed, metrics_path, checkpoint_path: Some(checkpoint_path), final_row })
}

/// Runs every seed of the experiment, writes the resolved-settings echo
/// and the cross-seed summary, and reports per-seed results. Returns an
/// error only for setup problems; individual seed failures land in the
/// report so the caller can decide how loudly to fail.
pub fn run_experiment<F: FnMut(&str)>(spec: &RunSpec, mut log: F) -> Result<ExperimentReport> {
    std::fs::create_dir_all(&spec.output_dir)
        .with_context(|| format!("cannot create {}", spec.output_dir.display()))?;
    let resolved_path = write_resolved(spec)?;

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for &seed in &spec.seeds {
        match run_seed(spec, seed, &mut log) {
            Ok(outcome) => outcomes.push(outcome),
            Err(err) => {
                let message = format!("{err:#}");
                log(&format!("seed {seed} failed: {message}"));
                failures.push((seed, message));
            }
        }
    }

    let summary_path = if outcomes.is_empty() {
        None
    } else {
        let finals: Vec<MetricsRow> = outcomes.iter().map(|o| o.final_row.clone()).collect();
        let path = spec
            .output_dir
            .join(format!("summary_{}_{}.txt", spec.algorithm.name(), spec.scenario_name));
        std::fs::write(&path, render_summary(spec, &finals))
            .with_context(|| format!("cannot write {}", path.display()))?;
        Some(path)
    };

    Ok(ExperimentReport { resolved_path, outcomes, failures, summary_path })
}

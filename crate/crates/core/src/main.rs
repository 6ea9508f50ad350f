//! Command-line front end: train schedulers, evaluate checkpoints or the
//! random baseline, sweep seeds, and run the built-in sanity checks.
//!
//! Settings resolve in three layers: an optional key = value config file,
//! then repeated `--set key=value` pairs, then the dedicated sugar flags,
//! with later layers winning. Every run echoes its fully resolved
//! settings into the output directory.

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};
use metalink::aahc::eval::{evaluate, Policy};
use metalink::aahc::trainer::Algorithm;
use metalink::harness::checkpoint::load_checkpoint;
use metalink::harness::config::resolve_run_spec;
use metalink::harness::experiment::run_experiment;
use metalink::harness::metrics::{write_metrics, MetricsRow};
use metalink::harness::rng::RngStreams;
use metalink::harness::selfcheck::run_selfcheck;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "metalink",
    about = "NOMA uplink/downlink scheduling: training, evaluation, seed sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one seed end to end, then evaluate and checkpoint it.
    Train(TrainArgs),
    /// Evaluate a saved checkpoint or the random baseline.
    Evaluate(EvaluateArgs),
    /// Run several seeds and aggregate a cross-seed summary.
    Sweep(SweepArgs),
    /// Run the built-in oracle and invariant checks.
    Selfcheck,
}

/// Settings shared by every run-producing verb.
#[derive(Args)]
struct CommonOpts {
    /// Config file of key = value lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Extra setting, repeatable; applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Scenario preset, channels-users (for example 3-4).
    #[arg(long)]
    scenario: Option<String>,
    /// Environment-step training budget.
    #[arg(long)]
    total_steps: Option<usize>,
    /// Episodes per evaluation.
    #[arg(long)]
    eval_episodes: Option<usize>,
    /// Output directory for metrics, checkpoints, and summaries.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Scheduling scheme: aahc, iterl, or ctrl.
    #[arg(long, default_value = "aahc")]
    algo: String,
    /// Global seed for this run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Scheduling scheme: aahc, iterl, ctrl, or random.
    #[arg(long)]
    algo: Option<String>,
    /// Comma-separated global seeds, one run each.
    #[arg(long)]
    seeds: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Checkpoint to load; its scenario and scheme are taken from the file.
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
    /// Evaluate a policy with no checkpoint; only random qualifies.
    #[arg(long, conflicts_with = "checkpoint")]
    algo: Option<String>,
    /// Global seed for the evaluation episodes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Splits the `--set` pairs and appends the sugar flags after them, so a
/// sugar flag beats a `--set` of the same key.
fn collect_pairs(common: &CommonOpts) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for raw in &common.set {
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| anyhow!("--set needs key=value, got {raw:?}"))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    if let Some(scenario) = &common.scenario {
        pairs.push(("scenario".to_string(), scenario.clone()));
    }
    if let Some(steps) = common.total_steps {
        pairs.push(("total_steps".to_string(), steps.to_string()));
    }
    if let Some(episodes) = common.eval_episodes {
        pairs.push(("eval_episodes".to_string(), episodes.to_string()));
    }
    Ok(pairs)
}

/// Runs a resolved experiment, prints its progress and summary, and turns
/// seed failures into a nonzero exit.
fn run_and_report(common: &CommonOpts, pairs: Vec<(String, String)>) -> Result<()> {
    let spec = resolve_run_spec(common.config.as_deref(), &pairs, &common.out)?;
    let report = run_experiment(&spec, |line| println!("{line}"))?;
    if let Some(path) = &report.summary_path {
        println!();
        print!("{}", std::fs::read_to_string(path)?);
        println!();
        println!("summary written to {}", path.display());
    }
    if !report.all_succeeded() {
        for (seed, message) in &report.failures {
            eprintln!("seed {seed} failed: {message}");
        }
        bail!("{} of {} seeds failed", report.failures.len(), spec.seeds.len());
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut pairs = collect_pairs(&args.common)?;
    pairs.push(("algo".to_string(), args.algo.clone()));
    pairs.push(("seeds".to_string(), args.seed.to_string()));
    run_and_report(&args.common, pairs)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut pairs = collect_pairs(&args.common)?;
    if let Some(algo) = &args.algo {
        pairs.push(("algo".to_string(), algo.clone()));
    }
    if let Some(seeds) = &args.seeds {
        pairs.push(("seeds".to_string(), seeds.clone()));
    }
    run_and_report(&args.common, pairs)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut pairs = collect_pairs(&args.common)?;
    let loaded = match &args.checkpoint {
        Some(path) => {
            let checkpoint = load_checkpoint(path)?;
            // The snapshot decides what is being evaluated; physics and
            // hyper overrides from the flags still apply.
            pairs.push(("algo".to_string(), checkpoint.meta.algo.clone()));
            pairs.push(("scenario".to_string(), checkpoint.meta.scenario.clone()));
            Some(checkpoint)
        }
        None => {
            let algo = args.algo.as_deref().unwrap_or_default();
            if Algorithm::parse(algo) != Some(Algorithm::Random) {
                bail!("evaluate needs --checkpoint FILE, or --algo random for the baseline");
            }
            pairs.push(("algo".to_string(), "random".to_string()));
            None
        }
    };
    let spec = resolve_run_spec(args.common.config.as_deref(), &pairs, &args.common.out)?;

    let mut streams = RngStreams::derive(args.seed);
    let started = std::time::Instant::now();
    let (policy, env_step) = match &loaded {
        Some(checkpoint) => (
            Policy::Trained {
                ul: &checkpoint.state.ul_actor,
                dl: &checkpoint.state.dl_actor,
            },
            checkpoint.meta.env_step,
        ),
        None => (Policy::Random, 0),
    };
    let record = evaluate(policy, &spec.config, spec.eval_episodes, &mut streams)?;
    let wall = started.elapsed().as_secs_f64() * 1e3;

    let row = MetricsRow::from_eval(
        spec.algorithm.name(),
        &spec.scenario_name,
        args.seed,
        env_step,
        &record,
        wall,
    );
    std::fs::create_dir_all(&args.common.out)?;
    let path = args.common.out.join(format!(
        "eval_{}_{}_seed{}.csv",
        spec.algorithm.name(),
        spec.scenario_name,
        args.seed
    ));
    write_metrics(&path, std::slice::from_ref(&row))?;

    println!(
        "{} on {} over {} episodes (seed {}):",
        spec.algorithm.name(),
        spec.scenario_name,
        record.episodes,
        args.seed
    );
    println!("  mean uplink reward      {:>12.6}", record.mean_ru);
    println!("  mean downlink reward    {:>12.6}", record.mean_rd);
    println!("  mean shared reward      {:>12.6}", record.mean_rg);
    println!("  iterations per episode  {:>12.6}", record.mean_iterations);
    println!("  retransmission share    {:>11.4}%", record.retrans_pct);
    println!("  peak uplink rate        {:>12.6} Gbit/s", record.max_ul_rate_gbps);
    println!("  downlink energy         {:>12.6} J", record.energy_j);
    println!("  delivery delay          {:>12.6} ms", record.total_delay_ms);
    println!("row written to {}", path.display());
    Ok(())
}

fn cmd_selfcheck() -> Result<()> {
    let reports = run_selfcheck(|line| println!("{line}"));
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", reports.len());
    }
    println!("all {} checks passed", reports.len());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train(args) => cmd_train(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Selfcheck => cmd_selfcheck(),
    }
}

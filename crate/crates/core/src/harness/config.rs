//! Flat key=value run configuration.
//!
//! A run is described by a small text file plus command-line overrides,
//! with dotted prefixes for the three sections: `scenario.` for the
//! physical setup, `fading.` for the channel model, `hyper.` for
//! training. Later entries win, and command-line pairs are applied after
//! the file, so flags override the file. The fully resolved settings are
//! echoed into the output directory so a finished run can be repeated
//! from that echo alone.

use crate::aahc::trainer::Algorithm;
use crate::aahc::Hyperparams;
use crate::env::ScenarioConfig;
use anyhow::{anyhow, bail, Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Default noise power spectral density in dBm/Hz.
pub const DEFAULT_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Everything a run needs, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    /// Scenario preset name, "channels-users".
    pub scenario_name: String,
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub eval_episodes: usize,
    pub output_dir: PathBuf,
    pub config: ScenarioConfig,
    pub hyper: Hyperparams,
    /// Noise level as configured, kept in dBm/Hz so the resolved echo
    /// reproduces the conversion exactly on a re-run.
    pub noise_dbm_per_hz: f64,
}

/// One key=value assignment and where it came from, for error messages.
#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    source: String,
}

/// Converts a power spectral density from dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_w_per_hz(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

/// Splits a config file into assignments. Blank lines and `#` comments
/// are skipped; everything else must be `key = value`.
fn parse_file(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let name = path.display().to_string();
    let mut entries = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let source = format!("{} line {}", name, index + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{source}: expected key = value, got {line:?}"))?;
        entries.push(Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            source,
        });
    }
    Ok(entries)
}

fn parse_f64(entry: &Entry) -> Result<f64> {
    entry
        .value
        .parse()
        .with_context(|| format!("{}: {} needs a number, got {:?}", entry.source, entry.key, entry.value))
}

fn parse_usize(entry: &Entry) -> Result<usize> {
    entry
        .value
        .parse()
        .with_context(|| format!("{}: {} needs a non-negative integer, got {:?}", entry.source, entry.key, entry.value))
}

fn parse_bool(entry: &Entry) -> Result<bool> {
    match entry.value.as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => bail!("{}: {} needs true or false, got {:?}", entry.source, entry.key, other),
    }
}

fn parse_u64_list(entry: &Entry) -> Result<Vec<u64>> {
    entry
        .value
        .split(',')
        .map(|s| {
            s.trim().parse::<u64>().with_context(|| {
                format!("{}: {} needs comma-separated integers, got {:?}", entry.source, entry.key, entry.value)
            })
        })
        .collect()
}

fn parse_usize_list(entry: &Entry) -> Result<Vec<usize>> {
    entry
        .value
        .split(',')
        .map(|s| {
            s.trim().parse::<usize>().with_context(|| {
                format!("{}: {} needs comma-separated integers, got {:?}", entry.source, entry.key, entry.value)
            })
        })
        .collect()
}

/// Resolves a run description from an optional config file and a list of
/// already-split command-line `key=value` pairs (applied after the file).
pub fn resolve_run_spec(
    config_file: Option<&Path>,
    flag_pairs: &[(String, String)],
    output_dir: &Path,
) -> Result<RunSpec> {
    let mut entries = match config_file {
        Some(path) => parse_file(path)?,
        None => Vec::new(),
    };
    for (key, value) in flag_pairs {
        entries.push(Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            source: "command line".to_string(),
        });
    }

    // The scenario preset must be fixed before its fields can be
    // overridden, so find the last scenario assignment first.
    let scenario_name = entries
        .iter()
        .rev()
        .find(|e| e.key == "scenario")
        .map_or_else(|| "3-4".to_string(), |e| e.value.clone());
    let mut config = ScenarioConfig::preset(&scenario_name).ok_or_else(|| {
        anyhow!("scenario {scenario_name:?} does not name a channels-users preset like 3-4")
    })?;

    let mut algorithm = Algorithm::Aahc;
    let mut seeds: Vec<u64> = vec![0];
    let mut eval_episodes: usize = 200;
    let mut hyper = Hyperparams::default();
    let mut noise_dbm = DEFAULT_NOISE_DBM_PER_HZ;
    config.noise_psd = dbm_per_hz_to_w_per_hz(noise_dbm);

    for entry in &entries {
        match entry.key.as_str() {
            "scenario" => {} // handled above
            "algo" => {
                algorithm = Algorithm::parse(&entry.value).ok_or_else(|| {
                    anyhow!(
                        "{}: unknown algorithm {:?} (expected aahc, iterl, ctrl, or random)",
                        entry.source,
                        entry.value
                    )
                })?;
            }
            "seeds" => seeds = parse_u64_list(entry)?,
            "eval_episodes" => eval_episodes = parse_usize(entry)?,
            "total_steps" => hyper.total_steps = parse_usize(entry)?,

            "scenario.bandwidth" => config.bandwidth = parse_f64(entry)?,
            "scenario.noise_psd_dbm_hz" => {
                noise_dbm = parse_f64(entry)?;
                config.noise_psd = dbm_per_hz_to_w_per_hz(noise_dbm);
            }
            "scenario.utti" => config.utti = parse_f64(entry)?,
            "scenario.dtti_limit" => config.dtti_limit = parse_f64(entry)?,
            "scenario.dl_power_min" => config.dl_power_min = parse_f64(entry)?,
            "scenario.dl_power_max" => config.dl_power_max = parse_f64(entry)?,
            "scenario.buffer_init_min" => config.buffer_init_range[0] = parse_f64(entry)?,
            "scenario.buffer_init_max" => config.buffer_init_range[1] = parse_f64(entry)?,
            "scenario.ul_power_min" => config.ul_power_range[0] = parse_f64(entry)?,
            "scenario.ul_power_max" => config.ul_power_range[1] = parse_f64(entry)?,
            "scenario.augment_min" => config.augment_range[0] = parse_f64(entry)?,
            "scenario.augment_max" => config.augment_range[1] = parse_f64(entry)?,
            "scenario.max_iterations" => config.max_iterations = parse_usize(entry)?,
            "scenario.area_x" => config.area[0] = parse_f64(entry)?,
            "scenario.area_y" => config.area[1] = parse_f64(entry)?,
            "scenario.height" => config.height = parse_f64(entry)?,
            "scenario.walk_step" => config.walk_step = parse_f64(entry)?,
            "scenario.xu_noise_factor" => config.xu_noise_factor = parse_f64(entry)?,

            "fading.beta0" => config.fading.beta0 = parse_f64(entry)?,
            "fading.alpha" => config.fading.alpha = parse_f64(entry)?,
            "fading.rice_k" => config.fading.rice_k = parse_f64(entry)?,

            "hyper.gamma" => hyper.gamma = parse_f64(entry)?,
            "hyper.gae_lambda" => hyper.gae_lambda = parse_f64(entry)?,
            "hyper.clip_epsilon" => hyper.clip_epsilon = parse_f64(entry)?,
            "hyper.epochs" => hyper.epochs = parse_usize(entry)?,
            "hyper.batch_size" => hyper.batch_size = parse_usize(entry)?,
            "hyper.entropy_coef" => hyper.entropy_coef = parse_f64(entry)?,
            "hyper.lr_actor_ul" => hyper.lr_actor_ul = parse_f64(entry)?,
            "hyper.lr_actor_dl" => hyper.lr_actor_dl = parse_f64(entry)?,
            "hyper.lr_critic" => hyper.lr_critic = parse_f64(entry)?,
            "hyper.head_weight_u" => hyper.head_weights[0] = parse_f64(entry)?,
            "hyper.head_weight_d" => hyper.head_weights[1] = parse_f64(entry)?,
            "hyper.head_weight_g" => hyper.head_weights[2] = parse_f64(entry)?,
            "hyper.target_sync_period" => hyper.target_sync_period = parse_usize(entry)?,
            "hyper.trajectory_length" => hyper.trajectory_length = parse_usize(entry)?,
            "hyper.total_steps" => hyper.total_steps = parse_usize(entry)?,
            "hyper.hidden" => hyper.hidden = parse_usize_list(entry)?,
            "hyper.conventional_target" => hyper.conventional_target = parse_bool(entry)?,

            other => bail!("{}: unknown setting {:?}", entry.source, other),
        }
    }

    if seeds.is_empty() {
        bail!("at least one seed is required");
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        bail!("seeds must be distinct, got {seeds:?}");
    }

    Ok(RunSpec {
        scenario_name,
        algorithm,
        seeds,
        eval_episodes,
        output_dir: output_dir.to_path_buf(),
        config,
        hyper,
        noise_dbm_per_hz: noise_dbm,
    })
}

/// Renders the fully resolved settings in the same key=value format the
/// resolver reads, with every field explicit.
pub fn render_resolved(spec: &RunSpec) -> String {
    let c = &spec.config;
    let h = &spec.hyper;
    let mut out = String::new();
    let _ = writeln!(out, "# Resolved run settings; re-running from this file alone");
    let _ = writeln!(out, "# reproduces the experiment.");
    let _ = writeln!(out, "scenario = {}", spec.scenario_name);
    let _ = writeln!(out, "algo = {}", spec.algorithm.name());
    let seeds: Vec<String> = spec.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(out, "seeds = {}", seeds.join(","));
    let _ = writeln!(out, "eval_episodes = {}", spec.eval_episodes);
    let _ = writeln!(out);
    let _ = writeln!(out, "scenario.bandwidth = {}", c.bandwidth);
    let _ = writeln!(out, "scenario.noise_psd_dbm_hz = {}", spec.noise_dbm_per_hz);
    let _ = writeln!(out, "scenario.utti = {}", c.utti);
    let _ = writeln!(out, "scenario.dtti_limit = {}", c.dtti_limit);
    let _ = writeln!(out, "scenario.dl_power_min = {}", c.dl_power_min);
    let _ = writeln!(out, "scenario.dl_power_max = {}", c.dl_power_max);
    let _ = writeln!(out, "scenario.buffer_init_min = {}", c.buffer_init_range[0]);
    let _ = writeln!(out, "scenario.buffer_init_max = {}", c.buffer_init_range[1]);
    let _ = writeln!(out, "scenario.ul_power_min = {}", c.ul_power_range[0]);
    let _ = writeln!(out, "scenario.ul_power_max = {}", c.ul_power_range[1]);
    let _ = writeln!(out, "scenario.augment_min = {}", c.augment_range[0]);
    let _ = writeln!(out, "scenario.augment_max = {}", c.augment_range[1]);
    let _ = writeln!(out, "scenario.max_iterations = {}", c.max_iterations);
    let _ = writeln!(out, "scenario.area_x = {}", c.area[0]);
    let _ = writeln!(out, "scenario.area_y = {}", c.area[1]);
    let _ = writeln!(out, "scenario.height = {}", c.height);
    let _ = writeln!(out, "scenario.walk_step = {}", c.walk_step);
    let _ = writeln!(out, "scenario.xu_noise_factor = {}", c.xu_noise_factor);
    let _ = writeln!(out);
    let _ = writeln!(out, "fading.beta0 = {}", c.fading.beta0);
    let _ = writeln!(out, "fading.alpha = {}", c.fading.alpha);
    let _ = writeln!(out, "fading.rice_k = {}", c.fading.rice_k);
    let _ = writeln!(out);
    let _ = writeln!(out, "hyper.gamma = {}", h.gamma);
    let _ = writeln!(out, "hyper.gae_lambda = {}", h.gae_lambda);
    let _ = writeln!(out, "hyper.clip_epsilon = {}", h.clip_epsilon);
    let _ = writeln!(out, "hyper.epochs = {}", h.epochs);
    let _ = writeln!(out, "hyper.batch_size = {}", h.batch_size);
    let _ = writeln!(out, "hyper.entropy_coef = {}", h.entropy_coef);
    let _ = writeln!(out, "hyper.lr_actor_ul = {}", h.lr_actor_ul);
    let _ = writeln!(out, "hyper.lr_actor_dl = {}", h.lr_actor_dl);
    let _ = writeln!(out, "hyper.lr_critic = {}", h.lr_critic);
    let _ = writeln!(out, "hyper.head_weight_u = {}", h.head_weights[0]);
    let _ = writeln!(out, "hyper.head_weight_d = {}", h.head_weights[1]);
    let _ = writeln!(out, "hyper.head_weight_g = {}", h.head_weights[2]);
    let _ = writeln!(out, "hyper.target_sync_period = {}", h.target_sync_period);
    let _ = writeln!(out, "hyper.trajectory_length = {}", h.trajectory_length);
    let _ = writeln!(out, "hyper.total_steps = {}", h.total_steps);
    let hidden: Vec<String> = h.hidden.iter().map(usize::to_string).collect();
    let _ = writeln!(out, "hyper.hidden = {}", hidden.join(","));
    let _ = writeln!(out, "hyper.conventional_target = {}", h.conventional_target);
    out
}

/// Writes the resolved echo into the run's output directory.
pub fn write_resolved(spec: &RunSpec) -> Result<PathBuf> {
    let path = spec.output_dir.join("resolved.cfg");
    std::fs::write(&path, render_resolved(spec))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

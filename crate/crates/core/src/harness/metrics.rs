//! CSV metric logging, one row per trajectory-buffer cycle.

use crate::aahc::eval::EvalRecord;
use crate::aahc::trainer::CycleStats;
use anyhow::{bail, Context, Result};
use std::path::Path;

/// The exact column set, in order.
pub const CSV_HEADER: &str = "algo,scenario,seed,env_step,episodes,mean_ru,mean_rd,mean_rg,\
mean_iterations,retrans_pct,max_ul_rate_gbps,energy_j,total_delay_ms,wall_clock_ms";

/// One logged row. Training rows carry a cycle's aggregates; evaluation
/// rows reuse the same shape with the post-training step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub algo: String,
    pub scenario: String,
    pub seed: u64,
    pub env_step: usize,
    pub episodes: usize,
    pub mean_ru: f64,
    pub mean_rd: f64,
    pub mean_rg: f64,
    pub mean_iterations: f64,
    pub retrans_pct: f64,
    pub max_ul_rate_gbps: f64,
    pub energy_j: f64,
    pub total_delay_ms: f64,
    pub wall_clock_ms: f64,
}

impl MetricsRow {
    pub fn from_cycle(algo: &str, scenario: &str, seed: u64, cycle: &CycleStats) -> Self {
        Self {
            algo: algo.to_string(),
            scenario: scenario.to_string(),
            seed,
            env_step: cycle.env_step,
            episodes: cycle.episodes,
            mean_ru: cycle.mean_ru,
            mean_rd: cycle.mean_rd,
            mean_rg: cycle.mean_rg,
            mean_iterations: cycle.mean_iterations,
            retrans_pct: cycle.retrans_pct,
            max_ul_rate_gbps: cycle.max_ul_rate_gbps,
            energy_j: cycle.energy_j,
            total_delay_ms: cycle.total_delay_ms,
            wall_clock_ms: cycle.wall_clock_ms,
        }
    }

    pub fn from_eval(
        algo: &str,
        scenario: &str,
        seed: u64,
        env_step: usize,
        record: &EvalRecord,
        wall_clock_ms: f64,
    ) -> Self {
        Self {
            algo: algo.to_string(),
            scenario: scenario.to_string(),
            seed,
            env_step,
            episodes: record.episodes,
            mean_ru: record.mean_ru,
            mean_rd: record.mean_rd,
            mean_rg: record.mean_rg,
            mean_iterations: record.mean_iterations,
            retrans_pct: record.retrans_pct,
            max_ul_rate_gbps: record.max_ul_rate_gbps,
            energy_j: record.energy_j,
            total_delay_ms: record.total_delay_ms,
            wall_clock_ms,
        }
    }

    fn numeric_fields(&self) -> [f64; 9] {
        [
            self.mean_ru,
            self.mean_rd,
            self.mean_rg,
            self.mean_iterations,
            self.retrans_pct,
            self.max_ul_rate_gbps,
            self.energy_j,
            self.total_delay_ms,
            self.wall_clock_ms,
        ]
    }

    /// Renders one CSV line (no trailing newline).
    pub fn to_line(&self) -> String {
        let mut fields = vec![
            self.algo.clone(),
            self.scenario.clone(),
            self.seed.to_string(),
            self.env_step.to_string(),
            self.episodes.to_string(),
        ];
        fields.extend(self.numeric_fields().iter().map(|&x| format_sig6(x)));
        fields.join(",")
    }
}

/// Rounds to 6 significant digits and renders the shortest decimal form
/// of the rounded value: plain decimal point, no separators, scientific
/// notation only where the shortest form itself uses it.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Round via the 6-digit scientific form, then let the shortest
    // round-trip rendering of the rounded value drop trailing zeros.
    let sci = format!("{x:.5e}");
    let rounded: f64 = sci.parse().expect("scientific rendering always parses");
    format!("{rounded}")
}

/// Writes a fresh metrics file: exact header, then one line per row.
/// Every numeric field must be finite.
pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    render_rows(rows, &mut out)?;
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Appends rows to an existing metrics file without repeating the header.
pub fn append_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot append to {}", path.display()))?;
    render_rows(rows, &mut text)?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn render_rows(rows: &[MetricsRow], out: &mut String) -> Result<()> {
    for row in rows {
        if row.numeric_fields().iter().any(|x| !x.is_finite()) {
            bail!(
                "refusing to log a non-finite value at env_step {} ({})",
                row.env_step,
                row.to_line()
            );
        }
        out.push_str(&row.to_line());
        out.push('\n');
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(env_step: usize) -> MetricsRow {
        MetricsRow {
            algo: "aahc".into(),
            scenario: "3-4".into(),
            seed: 0,
            env_step,
            episodes: 31,
            mean_ru: -0.123456789,
            mean_rd: -2.5,
            mean_rg: -1.75,
            mean_iterations: 73.4567891,
            retrans_pct: 29.3210987,
            max_ul_rate_gbps: 3.71,
            energy_j: 0.218765432,
            total_delay_ms: 114.898765,
            wall_clock_ms: 1234.56789,
        }
    }

    #[test]
    fn test_header_is_verbatim() {
        assert_eq!(
            CSV_HEADER,
            "algo,scenario,seed,env_step,episodes,mean_ru,mean_rd,mean_rg,mean_iterations,\
retrans_pct,max_ul_rate_gbps,energy_j,total_delay_ms,wall_clock_ms"
        );
    }

    #[test]
    fn test_six_significant_digits() {
        assert_eq!(format_sig6(73.4567891), "73.4568");
        assert_eq!(format_sig6(-0.123456789), "-0.123457");
        assert_eq!(format_sig6(0.0012345649), "0.00123456");
        assert_eq!(format_sig6(2.5), "2.5");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(123456789.0), "123457000");
        assert_eq!(format_sig6(-114.898765), "-114.899");
    }

    #[test]
    fn test_zero_rows_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics(&path, &[]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn test_parse_back_reproduces_values_to_six_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rows: Vec<MetricsRow> = (1..=20)
            .map(|i| {
                let mut row = sample_row(i * 100);
                row.mean_ru *= i as f64 * 0.731;
                row.energy_j *= (i as f64 * 1.37).exp() * 1e-4;
                row
            })
            .collect();
        write_metrics(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for (line, row) in lines.zip(&rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 14);
            assert_eq!(fields[0], row.algo);
            assert_eq!(fields[3], row.env_step.to_string());
            for (text_value, original) in fields[5..].iter().zip(row.numeric_fields()) {
                let parsed: f64 = text_value.parse().unwrap();
                let tolerance = original.abs() * 5.1e-6 + 1e-300;
                assert!(
                    (parsed - original).abs() <= tolerance,
                    "{text_value} vs {original}"
                );
            }
        }
    }

    #[test]
    fn test_non_finite_values_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let mut row = sample_row(1);
        row.energy_j = f64::NAN;
        assert!(write_metrics(&path, &[row]).is_err());
    }

    #[test]
    fn test_append_continues_without_a_second_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics(&path, &[sample_row(100)]).unwrap();
        append_metrics(&path, &[sample_row(200), sample_row(300)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1..].iter().all(|l| !l.starts_with("algo,")));
        let steps: Vec<usize> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
            .collect();
        assert!(steps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn test_row_line_is_deterministic() {
        let a = sample_row(42).to_line();
        let b = sample_row(42).to_line();
        assert_eq!(a, b);
        assert_eq!(a.split(',').count(), 14);
    }
}

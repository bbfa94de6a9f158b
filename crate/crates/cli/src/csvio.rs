//! CSV serialization of campaign outputs.
//!
//! All files are UTF-8 with LF line endings and a header row. Floats are
//! written with 10 significant digits; optional cells are left empty.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use seqab_core::decision::{DecisionState, Direction};
use seqab_core::engine::{AggregateMetrics, ArmMetrics, Method, TrialResult};
use thiserror::Error;

pub const METRICS_HEADER: &str = "p0,p_r,power_or_alpha,n_bar,fixed_power,fixed_power_bonferroni";
pub const TRAJECTORIES_HEADER: &str = "trial,look,arm,n,bf,prob_best,decision";
pub const SUMMARY_HEADER: &str = "method,overall_error_rate,avg_n_nonnull";
pub const PLOT_HEADER: &str = "look,arm,mean_n,mean_prob_best";

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

impl CsvError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        CsvError { line, message: message.into() }
    }
}

/// Formats a float with 10 significant digits: plain notation over the
/// exponent range where it stays compact, scientific outside it, trailing
/// zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.9e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Trajectory decision label for an arm's state at a look.
pub fn decision_label(state: DecisionState, direction: Direction) -> &'static str {
    match state {
        DecisionState::Continue => "continue",
        DecisionState::RejectNull => match direction {
            Direction::Inferior => "reject_inferior",
            _ => "reject_superior",
        },
        DecisionState::AcceptNullAtCap => "accept_cap",
    }
}

const DECISION_LABELS: [&str; 4] =
    ["continue", "reject_superior", "reject_inferior", "accept_cap"];

/// Per-arm rows followed by campaign-level footer rows, all padded to the
/// same field count.
pub fn metrics_csv(metrics: &AggregateMetrics, p0: f64) -> String {
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for arm in &metrics.arms {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_sig(p0),
            fmt_sig(arm.p),
            fmt_sig(arm.rejection_rate),
            fmt_sig(arm.n_bar),
            fmt_opt(arm.fixed_power),
            fmt_opt(arm.fixed_power_bonferroni),
        );
    }
    let footer = [
        ("fwer", Some(metrics.fwer)),
        ("fdr", Some(metrics.fdr)),
        ("per_test_alpha", metrics.per_test_alpha),
        ("overall_error_rate", Some(metrics.overall_error_rate)),
        ("control_n_bar", Some(metrics.control_n_bar)),
    ];
    for (name, value) in footer {
        let _ = writeln!(out, "{name},{},,,,", fmt_opt(value));
    }
    out
}

fn parse_f64(line: usize, field: &str, value: &str) -> Result<f64, CsvError> {
    value
        .parse()
        .map_err(|_| CsvError::new(line, format!("{field}: expected a number, got '{value}'")))
}

fn parse_opt_f64(line: usize, field: &str, value: &str) -> Result<Option<f64>, CsvError> {
    if value.is_empty() {
        Ok(None)
    } else {
        parse_f64(line, field, value).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(line: usize, field: &str, value: &str) -> Result<T, CsvError> {
    value
        .parse()
        .map_err(|_| CsvError::new(line, format!("{field}: expected an integer, got '{value}'")))
}

/// Rebuilds the control rate and campaign metrics from `metrics_csv` output.
pub fn parse_metrics_csv(text: &str) -> Result<(f64, AggregateMetrics), CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| CsvError::new(1, "empty file"))?;
    if header != METRICS_HEADER {
        return Err(CsvError::new(1, format!("expected header '{METRICS_HEADER}'")));
    }

    let mut p0: Option<f64> = None;
    let mut arms = Vec::new();
    let mut footer: BTreeMap<&str, Option<f64>> = BTreeMap::new();
    let footer_names = ["fwer", "fdr", "per_test_alpha", "overall_error_rate", "control_n_bar"];

    let mut last_line = 1;
    for (idx, raw) in lines {
        let line = idx + 1;
        last_line = line;
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(CsvError::new(line, format!("expected 6 fields, got {}", fields.len())));
        }
        if let Some(name) = footer_names.iter().copied().find(|n| *n == fields[0]) {
            footer.insert(name, parse_opt_f64(line, name, fields[1])?);
            continue;
        }
        if !footer.is_empty() {
            return Err(CsvError::new(line, "arm row after footer rows"));
        }
        let row_p0 = parse_f64(line, "p0", fields[0])?;
        match p0 {
            None => p0 = Some(row_p0),
            Some(existing) if existing == row_p0 => {}
            Some(_) => return Err(CsvError::new(line, "p0 differs between rows")),
        }
        let p = parse_f64(line, "p_r", fields[1])?;
        arms.push(ArmMetrics {
            arm_id: arms.len() + 1,
            p,
            is_null: p == row_p0,
            rejection_rate: parse_f64(line, "power_or_alpha", fields[2])?,
            n_bar: parse_f64(line, "n_bar", fields[3])?,
            fixed_power: parse_opt_f64(line, "fixed_power", fields[4])?,
            fixed_power_bonferroni: parse_opt_f64(line, "fixed_power_bonferroni", fields[5])?,
        });
    }

    let p0 = p0.ok_or_else(|| CsvError::new(last_line, "no arm rows"))?;
    let require = |name: &str| {
        footer
            .get(name)
            .copied()
            .ok_or_else(|| CsvError::new(last_line, format!("missing footer row '{name}'")))
    };
    let filled = |name: &str| {
        require(name)?.ok_or_else(|| CsvError::new(last_line, format!("{name} is empty")))
    };
    let fwer = filled("fwer")?;
    let fdr = filled("fdr")?;
    let per_test_alpha = require("per_test_alpha")?;
    let overall_error_rate = filled("overall_error_rate")?;
    let control_n_bar = filled("control_n_bar")?;

    Ok((
        p0,
        AggregateMetrics { arms, control_n_bar, fwer, fdr, per_test_alpha, overall_error_rate },
    ))
}

/// One parsed row of a trajectories file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub trial: usize,
    pub look: u32,
    pub arm: usize,
    pub n: u64,
    pub bf: Option<f64>,
    pub prob_best: f64,
    pub decision: Option<String>,
}

/// One row per arm per look per trial, in simulation order.
pub fn trajectories_csv(results: &[TrialResult]) -> String {
    let mut out = String::new();
    out.push_str(TRAJECTORIES_HEADER);
    out.push('\n');
    for trial in results {
        for look in &trial.looks {
            for arm in &look.arms {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    trial.trial_index,
                    look.look,
                    arm.arm_id,
                    arm.n,
                    fmt_opt(arm.bf),
                    fmt_sig(arm.prob_best),
                    arm.state.map(|s| decision_label(s, arm.direction)).unwrap_or(""),
                );
            }
        }
    }
    out
}

pub fn parse_trajectories_csv(text: &str) -> Result<Vec<TrajectoryRow>, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| CsvError::new(1, "empty file"))?;
    if header != TRAJECTORIES_HEADER {
        return Err(CsvError::new(1, format!("expected header '{TRAJECTORIES_HEADER}'")));
    }

    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 7 {
            return Err(CsvError::new(line, format!("expected 7 fields, got {}", fields.len())));
        }
        let decision = if fields[6].is_empty() {
            None
        } else if DECISION_LABELS.contains(&fields[6]) {
            Some(fields[6].to_string())
        } else {
            return Err(CsvError::new(line, format!("unknown decision '{}'", fields[6])));
        };
        rows.push(TrajectoryRow {
            trial: parse_int(line, "trial", fields[0])?,
            look: parse_int(line, "look", fields[1])?,
            arm: parse_int(line, "arm", fields[2])?,
            n: parse_int(line, "n", fields[3])?,
            bf: parse_opt_f64(line, "bf", fields[4])?,
            prob_best: parse_f64(line, "prob_best", fields[5])?,
            decision,
        });
    }
    Ok(rows)
}

/// Method comparison summary: one row per method.
pub fn summary_csv(rows: &[(Method, f64, Option<f64>)]) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for (method, overall_error_rate, avg_n_nonnull) in rows {
        let _ = writeln!(
            out,
            "{method},{},{}",
            fmt_sig(*overall_error_rate),
            fmt_opt(*avg_n_nonnull),
        );
    }
    out
}

/// Per-look averages across trials, for plotting enrollment and best-arm
/// probability trajectories. Trials contribute to a look only while they
/// are still running at it.
pub fn plot_data_csv(rows: &[TrajectoryRow]) -> String {
    let mut groups: BTreeMap<(u32, usize), (f64, f64, u64)> = BTreeMap::new();
    for row in rows {
        let entry = groups.entry((row.look, row.arm)).or_insert((0.0, 0.0, 0));
        entry.0 += row.n as f64;
        entry.1 += row.prob_best;
        entry.2 += 1;
    }
    let mut out = String::new();
    out.push_str(PLOT_HEADER);
    out.push('\n');
    for ((look, arm), (sum_n, sum_pb, count)) in groups {
        let _ = writeln!(
            out,
            "{look},{arm},{},{}",
            fmt_sig(sum_n / count as f64),
            fmt_sig(sum_pb / count as f64),
        );
    }
    out
}

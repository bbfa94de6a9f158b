//! Interim analysis of an observed outcome file: per-arm evidence and
//! stop-or-continue decisions for data collected so far.
//!
//! Input is a CSV with header `arm,outcome`, one row per subject, outcome
//! 0 or 1. Arms are labeled by arbitrary strings; the control arm is named
//! on the command line and reported first, with the rest in order of first
//! appearance.

use std::collections::HashMap;
use std::fmt::Write as _;

use seqab_core::decision::{threshold_two_sided, DecisionState, Direction};
use seqab_core::glm::ArmCounts;
use seqab_core::pool::{
    arm_logit_summaries, contrast_bayes_factor, fit_hierarchical, posterior_draws, prob_best,
};
use thiserror::Error;

use crate::csvio::{decision_label, fmt_sig};

/// Posterior draws behind the reported best-arm probabilities.
const ANALYZE_DRAWS: usize = 4000;

/// Fixed draw seed, so a report depends only on the data.
const ANALYZE_SEED: u64 = 0;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyzeError {
    #[error("line 1: expected header 'arm,outcome'")]
    BadHeader,
    #[error("line {0}: {1}")]
    BadRow(usize, String),
    #[error("control label '{0}' not found in the data")]
    UnknownControl(String),
    #[error("need a control and at least one treatment arm, found {0} arm(s)")]
    TooFewArms(usize),
    #[error("alpha must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("{0}")]
    Fit(String),
}

/// One arm's line in the analysis report. Evidence and decision are absent
/// for the control arm, which is what the others are tested against.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmReport {
    pub label: String,
    pub n: u64,
    pub successes: u64,
    pub raw_rate: f64,
    pub shrunk_rate: f64,
    pub bf: Option<f64>,
    pub decision: Option<&'static str>,
    pub prob_best: f64,
}

fn inv_logit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn analyze(text: &str, alpha: f64, control: &str) -> Result<Vec<ArmReport>, AnalyzeError> {
    let threshold = threshold_two_sided(alpha).map_err(|_| AnalyzeError::BadAlpha(alpha))?;

    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(AnalyzeError::BadHeader)?;
    if header.trim() != "arm,outcome" {
        return Err(AnalyzeError::BadHeader);
    }

    let mut labels: Vec<String> = Vec::new();
    let mut tallies: Vec<(u64, u64)> = Vec::new();
    let mut slots: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let (label, outcome) = raw
            .split_once(',')
            .ok_or_else(|| AnalyzeError::BadRow(line, "expected arm,outcome".to_string()))?;
        let label = label.trim();
        let outcome = outcome.trim();
        if label.is_empty() {
            return Err(AnalyzeError::BadRow(line, "empty arm label".to_string()));
        }
        let success = match outcome {
            "0" => false,
            "1" => true,
            other => {
                return Err(AnalyzeError::BadRow(
                    line,
                    format!("outcome must be 0 or 1, got '{other}'"),
                ))
            }
        };
        let slot = *slots.entry(label.to_string()).or_insert_with(|| {
            labels.push(label.to_string());
            tallies.push((0, 0));
            labels.len() - 1
        });
        tallies[slot].0 += 1;
        if success {
            tallies[slot].1 += 1;
        }
    }

    let control_slot = labels
        .iter()
        .position(|l| l == control)
        .ok_or_else(|| AnalyzeError::UnknownControl(control.to_string()))?;
    if labels.len() < 2 {
        return Err(AnalyzeError::TooFewArms(labels.len()));
    }

    // Control becomes arm 0; the rest keep first-appearance order.
    let mut slot_order = vec![control_slot];
    slot_order.extend((0..labels.len()).filter(|&s| s != control_slot));
    let counts: Vec<ArmCounts> = slot_order
        .iter()
        .enumerate()
        .map(|(arm_id, &slot)| ArmCounts::new(arm_id, tallies[slot].0, tallies[slot].1))
        .collect();

    let fit_err = |e: &dyn std::fmt::Display| AnalyzeError::Fit(e.to_string());
    let summaries = arm_logit_summaries(&counts).map_err(|e| fit_err(&e))?;
    let fit = fit_hierarchical(&summaries).map_err(|e| fit_err(&e))?;
    let draws = posterior_draws(&fit, ANALYZE_DRAWS, ANALYZE_SEED);
    let probs = prob_best(&draws);

    let mut reports = Vec::with_capacity(counts.len());
    for (arm_id, &slot) in slot_order.iter().enumerate() {
        let (n, successes) = tallies[slot];
        let shrunk_mean = fit.arm(arm_id).expect("fitted arm").shrunk_mean;
        let (bf, decision) = if arm_id == 0 {
            (None, None)
        } else {
            let bf = contrast_bayes_factor(&summaries, 0, arm_id).map_err(|e| fit_err(&e))?;
            let state = if bf >= threshold {
                DecisionState::RejectNull
            } else {
                DecisionState::Continue
            };
            let direction = if fit.contrast(arm_id, 0).expect("fitted contrast") < 0.0 {
                Direction::Inferior
            } else {
                Direction::Superior
            };
            (Some(bf), Some(decision_label(state, direction)))
        };
        reports.push(ArmReport {
            label: labels[slot].clone(),
            n,
            successes,
            raw_rate: successes as f64 / n as f64,
            shrunk_rate: inv_logit(shrunk_mean),
            bf,
            decision,
            prob_best: probs[arm_id],
        });
    }
    Ok(reports)
}

pub fn render_csv(reports: &[ArmReport]) -> String {
    let mut out = String::from("arm,n,successes,raw_rate,shrunk_rate,bf,decision,prob_best\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.label,
            r.n,
            r.successes,
            fmt_sig(r.raw_rate),
            fmt_sig(r.shrunk_rate),
            r.bf.map(fmt_sig).unwrap_or_default(),
            r.decision.unwrap_or(""),
            fmt_sig(r.prob_best),
        );
    }
    out
}

pub fn render_text(reports: &[ArmReport]) -> String {
    let mut rows = vec![[
        "arm".to_string(),
        "n".to_string(),
        "successes".to_string(),
        "raw_rate".to_string(),
        "shrunk_rate".to_string(),
        "bf".to_string(),
        "decision".to_string(),
        "prob_best".to_string(),
    ]];
    for r in reports {
        rows.push([
            r.label.clone(),
            r.n.to_string(),
            r.successes.to_string(),
            format!("{:.4}", r.raw_rate),
            format!("{:.4}", r.shrunk_rate),
            r.bf.map(|b| format!("{b:.3}")).unwrap_or_default(),
            r.decision.unwrap_or("").to_string(),
            format!("{:.4}", r.prob_best),
        ]);
    }

    let mut widths = [0usize; 8];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let mut line = String::new();
        for (i, (cell, width)) in row.iter().zip(&widths).enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:>width$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

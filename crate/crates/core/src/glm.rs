//! Grouped logistic regression for arm-indicator designs.
//!
//! Outcomes are Bernoulli successes tallied per arm, so the data for a fit is
//! a set of (successes, enrollments) pairs. The model is logit(p) = intercept
//! for the control arm and logit(p) = intercept + effect_r for treatment arm
//! r. That design is saturated: the maximum-likelihood solution is the
//! observed logits, which gives the Newton solver an exact cross-check. Fits
//! carry their Schwarz criterion so nested fits on the same data can be
//! compared on the evidence scale.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Largest magnitude allowed in the exponent of `bayes_factor_bic`.
/// Keeps the result finite; the output saturates near 1.01e304.
const MAX_LOG_BF: f64 = 700.0;

/// Relative log-likelihood change below which Newton iteration stops.
const NEWTON_TOL: f64 = 1e-10;

/// Relative parameter step below which Newton iteration stops. Both this and
/// `NEWTON_TOL` must be met, so flat-likelihood fits still pin the
/// coefficients down.
const STEP_TOL: f64 = 1e-9;

/// Iteration cap for the Newton solver.
const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum GlmError {
    #[error("no arm counts supplied")]
    Empty,
    #[error("arm {0}: enrollment count must be at least 1")]
    EmptyArm(usize),
    #[error("arm {0}: successes exceed enrollments")]
    BadCounts(usize),
    #[error("arm id {0} appears more than once")]
    DuplicateArm(usize),
    #[error("control arm (id 0) missing")]
    MissingControl,
    #[error("arm {0} has zero or all successes; its logit is not finite")]
    BoundaryCounts(usize),
    #[error("Newton iterations failed to converge")]
    NotConverged,
}

/// Running totals for one arm at an interim look.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ArmCounts {
    /// Arm index; 0 is the control arm.
    pub arm_id: usize,
    /// Subjects enrolled.
    pub n: u64,
    /// Successes observed among them.
    pub s: u64,
}

impl ArmCounts {
    pub fn new(arm_id: usize, n: u64, s: u64) -> Self {
        ArmCounts { arm_id, n, s }
    }

    /// True when the success count sits on the edge of its support, where
    /// the observed logit diverges.
    pub fn is_boundary(&self) -> bool {
        self.s == 0 || self.s == self.n
    }
}

/// A fitted arm-indicator logistic model.
///
/// `coefficients[0]` is the intercept (control log-odds); `coefficients[j]`
/// for j >= 1 is the effect of `arm_ids[j]`, the log-odds difference between
/// that arm and control. `arm_ids[0]` is always 0.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub arm_ids: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Inverse observed information, symmetric positive semidefinite.
    pub covariance: DMatrix<f64>,
    /// Maximized log-likelihood, without binomial coefficients.
    pub log_lik: f64,
    /// Number of fitted coefficients.
    pub k: usize,
    /// Total subjects across all arms.
    pub n: u64,
    /// Schwarz criterion of the fit: -2 log_lik + k ln(n).
    pub bic: f64,
}

impl LogisticFit {
    /// Effect coefficient for the given treatment arm, if it is in the fit.
    pub fn effect(&self, arm_id: usize) -> Option<f64> {
        self.arm_ids
            .iter()
            .position(|&id| id == arm_id)
            .filter(|&j| j > 0)
            .map(|j| self.coefficients[j])
    }
}

/// Schwarz criterion for a fit with maximized log-likelihood `log_lik`,
/// `k` parameters, and `n` observations.
pub fn bic(log_lik: f64, k: usize, n: u64) -> f64 {
    debug_assert!(k >= 1 && n >= 1);
    -2.0 * log_lik + k as f64 * (n as f64).ln()
}

/// Bayes factor in favor of the alternative from the two models' Schwarz
/// criteria: exp((bic_null - bic_alt)/2). Values above 1 favor the
/// alternative. The exponent is clamped to +-700, so the result saturates
/// near 1.01e304 (and its reciprocal) instead of overflowing.
pub fn bayes_factor_bic(bic_null: f64, bic_alt: f64) -> f64 {
    let half_diff = (bic_null - bic_alt) / 2.0;
    half_diff.clamp(-MAX_LOG_BF, MAX_LOG_BF).exp()
}

/// Grouped binomial log-likelihood at linear predictor `eta`, without the
/// binomial coefficient: s*eta - n*ln(1 + exp(eta)).
fn group_log_lik(s: f64, n: f64, eta: f64) -> f64 {
    s * eta - n * (eta.max(0.0) + (-eta.abs()).exp().ln_1p())
}

fn validate(counts: &[ArmCounts]) -> Result<(), GlmError> {
    if counts.is_empty() {
        return Err(GlmError::Empty);
    }
    let mut seen = Vec::with_capacity(counts.len());
    for c in counts {
        if c.n == 0 {
            return Err(GlmError::EmptyArm(c.arm_id));
        }
        if c.s > c.n {
            return Err(GlmError::BadCounts(c.arm_id));
        }
        if seen.contains(&c.arm_id) {
            return Err(GlmError::DuplicateArm(c.arm_id));
        }
        seen.push(c.arm_id);
    }
    if !seen.contains(&0) {
        return Err(GlmError::MissingControl);
    }
    for c in counts {
        if c.is_boundary() {
            return Err(GlmError::BoundaryCounts(c.arm_id));
        }
    }
    Ok(())
}

/// Fits the saturated arm-indicator logistic model by Newton iteration.
///
/// The coefficient order follows the input order of the treatment arms; the
/// control arm contributes only the intercept. Boundary counts in any arm are
/// an error because the corresponding logit is infinite; callers decide how
/// to handle that (continuity correction, or skipping the test at this look).
pub fn fit_logistic(counts: &[ArmCounts]) -> Result<LogisticFit, GlmError> {
    validate(counts)?;

    // Rows in control-first order so the design is intercept + indicators.
    let mut rows: Vec<ArmCounts> = Vec::with_capacity(counts.len());
    rows.extend(counts.iter().filter(|c| c.arm_id == 0));
    rows.extend(counts.iter().filter(|c| c.arm_id != 0));

    let k = rows.len();
    let n_total: u64 = rows.iter().map(|c| c.n).sum();
    let mut beta = DVector::<f64>::zeros(k);
    let mut log_lik = total_log_lik(&rows, &beta);

    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let (score, info) = score_and_information(&rows, &beta);
        let step = info
            .clone()
            .lu()
            .solve(&score)
            .ok_or(GlmError::NotConverged)?;

        // Step-halve until the log-likelihood does not decrease. The slack
        // admits rounding-level decreases, which otherwise stall the final
        // full-length step near the optimum.
        let slack = 1e-13 * (1.0 + log_lik.abs());
        let mut scale = 1.0;
        let mut candidate = &beta + &step;
        let mut candidate_ll = total_log_lik(&rows, &candidate);
        for _ in 0..30 {
            if candidate_ll.is_finite() && candidate_ll >= log_lik - slack {
                break;
            }
            scale /= 2.0;
            candidate = &beta + step.scale(scale);
            candidate_ll = total_log_lik(&rows, &candidate);
        }

        let change = (candidate_ll - log_lik).abs();
        // Judge convergence on the full Newton step: a halved step can be
        // tiny far from the optimum, the full step cannot.
        let step_size = step.amax();
        beta = candidate;
        log_lik = candidate_ll;
        if change <= NEWTON_TOL * (1.0 + log_lik.abs())
            && step_size <= STEP_TOL * (1.0 + beta.amax())
        {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GlmError::NotConverged);
    }

    let (_, info) = score_and_information(&rows, &beta);
    let covariance = info.try_inverse().ok_or(GlmError::NotConverged)?;
    // Symmetrize to remove inversion roundoff.
    let covariance = (&covariance + covariance.transpose()).scale(0.5);

    Ok(LogisticFit {
        arm_ids: rows.iter().map(|c| c.arm_id).collect(),
        coefficients: beta.iter().copied().collect(),
        covariance,
        log_lik,
        k,
        n: n_total,
        bic: bic(log_lik, k, n_total),
    })
}

/// Linear predictor for row j: intercept for control, intercept + effect
/// for treatment rows.
fn eta_for_row(beta: &DVector<f64>, j: usize) -> f64 {
    if j == 0 {
        beta[0]
    } else {
        beta[0] + beta[j]
    }
}

fn total_log_lik(rows: &[ArmCounts], beta: &DVector<f64>) -> f64 {
    rows.iter()
        .enumerate()
        .map(|(j, c)| group_log_lik(c.s as f64, c.n as f64, eta_for_row(beta, j)))
        .sum()
}

/// Score vector and observed information of the grouped binomial likelihood
/// at `beta`, in the intercept + indicators parameterization.
fn score_and_information(rows: &[ArmCounts], beta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let k = rows.len();
    let mut score = DVector::<f64>::zeros(k);
    let mut info = DMatrix::<f64>::zeros(k, k);
    for (j, c) in rows.iter().enumerate() {
        let eta = eta_for_row(beta, j);
        let p = 1.0 / (1.0 + (-eta).exp());
        let resid = c.s as f64 - c.n as f64 * p;
        let w = c.n as f64 * p * (1.0 - p);
        // The design row for group j has a 1 in column 0 and, for treatment
        // rows, a 1 in column j.
        score[0] += resid;
        info[(0, 0)] += w;
        if j > 0 {
            score[j] += resid;
            info[(0, j)] += w;
            info[(j, 0)] += w;
            info[(j, j)] += w;
        }
    }
    (score, info)
}

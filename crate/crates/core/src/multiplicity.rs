//! Multiple-comparison corrections and fixed-sample power.
//!
//! Bonferroni splits the test level across arms; Benjamini-Hochberg is the
//! step-up procedure over a set of p-values; `invert_bf` turns a Bayes factor
//! into the always-valid p-value used by the inverted-evidence baseline.
//! `fixed_sample_power` gives the power a classical fixed-n two-proportion
//! test would have had at an observed sample size, for comparison columns.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MultiplicityError {
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("number of tests must be at least 1")]
    BadTestCount,
    #[error("p-values and labels must have equal length")]
    MismatchedLabels,
    #[error("p-value at index {0} lies outside [0, 1]")]
    BadPValue(usize),
    #[error("success probabilities must lie strictly between 0 and 1")]
    BadRate,
    #[error("sample size must be at least 1")]
    BadSampleSize,
}

/// A set of p-values with their arm labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSet {
    pub values: Vec<f64>,
    pub labels: Vec<usize>,
}

impl PValueSet {
    pub fn new(labels: Vec<usize>, values: Vec<f64>) -> Result<Self, MultiplicityError> {
        if labels.len() != values.len() {
            return Err(MultiplicityError::MismatchedLabels);
        }
        for (i, &p) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(MultiplicityError::BadPValue(i));
            }
        }
        Ok(PValueSet { values, labels })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-test level alpha/m for m simultaneous tests.
pub fn bonferroni_alpha(alpha: f64, m: usize) -> Result<f64, MultiplicityError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MultiplicityError::BadAlpha(alpha));
    }
    if m < 1 {
        return Err(MultiplicityError::BadTestCount);
    }
    Ok(alpha / m as f64)
}

/// Always-valid p-value from a Bayes factor: min(1, 1/bf), with bf = 0
/// mapping to 1.
pub fn invert_bf(bf: f64) -> f64 {
    debug_assert!(bf >= 0.0);
    if bf <= 1.0 {
        1.0
    } else {
        1.0 / bf
    }
}

/// Benjamini-Hochberg step-up at level `q`: sort the p-values ascending,
/// find the largest k with p_(k) <= q k / m, and reject every hypothesis
/// with a p-value at or below that cutoff. Tied p-values share a decision.
/// Returns one flag per entry, in input order.
pub fn benjamini_hochberg(pvals: &PValueSet, q: f64) -> Result<Vec<bool>, MultiplicityError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(MultiplicityError::BadAlpha(q));
    }
    if pvals.is_empty() {
        return Ok(Vec::new());
    }
    for (i, &p) in pvals.values.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(MultiplicityError::BadPValue(i));
        }
    }

    let m = pvals.len();
    let mut sorted: Vec<f64> = pvals.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut cutoff = None;
    for k in (1..=m).rev() {
        if sorted[k - 1] <= q * k as f64 / m as f64 {
            cutoff = Some(sorted[k - 1]);
            break;
        }
    }

    Ok(match cutoff {
        Some(c) => pvals.values.iter().map(|&p| p <= c).collect(),
        None => vec![false; m],
    })
}

/// Power of the two-sided two-proportion z-test with unpooled variance at
/// per-arm sample size `n_per_arm`, true rates `p0` and `p1`, and level
/// `alpha_star`: Phi(|p1 - p0| / se - z_{1 - alpha_star/2}).
pub fn fixed_sample_power(
    n_per_arm: u64,
    p0: f64,
    p1: f64,
    alpha_star: f64,
) -> Result<f64, MultiplicityError> {
    if n_per_arm < 1 {
        return Err(MultiplicityError::BadSampleSize);
    }
    if !(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0) {
        return Err(MultiplicityError::BadRate);
    }
    if !(alpha_star > 0.0 && alpha_star < 1.0) {
        return Err(MultiplicityError::BadAlpha(alpha_star));
    }
    let n = n_per_arm as f64;
    let se = (p0 * (1.0 - p0) / n + p1 * (1.0 - p1) / n).sqrt();
    let z = standard_normal().inverse_cdf(1.0 - alpha_star / 2.0);
    Ok(standard_normal().cdf((p1 - p0).abs() / se - z))
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

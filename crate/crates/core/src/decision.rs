//! Sequential stopping thresholds and per-arm decision records.
//!
//! A two-sided test at level alpha rejects once the Bayes factor reaches
//! (1 - alpha/2)/(alpha/2), the cutoff implied by equating the expected
//! losses of the two terminal actions when the loss ratio is calibrated to
//! the desired error rate. Wald's classical sequential bounds are provided
//! for reference alongside.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DecisionError {
    #[error("alpha must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("beta must lie in (0, 1), got {0}")]
    BadBeta(f64),
}

/// Loss weights for the terminal actions. Enrollment cost and the null
/// offset are fixed to zero here, which reduces optimal stopping to the
/// rejection rule alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    /// Loss for a false rejection.
    pub k0: f64,
    /// Loss for a missed effect.
    pub k1: f64,
    /// Cost of enrolling one subject; fixed to 0.
    pub k2: f64,
    /// Null offset on the effect scale; fixed to 0.
    pub theta0: f64,
}

impl LossParams {
    pub fn new(k0: f64, k1: f64) -> Self {
        assert!(k0 > 0.0 && k1 > 0.0, "loss weights must be positive");
        LossParams { k0, k1, k2: 0.0, theta0: 0.0 }
    }
}

/// Terminal status of one arm's hypothesis at a look.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecisionState {
    /// No decision yet; keep enrolling.
    Continue,
    /// Evidence cleared the threshold; the arm's effect is declared real.
    RejectNull,
    /// The enrollment cap was reached with no decision.
    AcceptNullAtCap,
}

/// Sign of a declared effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Superior,
    Inferior,
    None,
}

/// Final record for one treatment arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmDecision {
    pub state: DecisionState,
    pub direction: Direction,
    /// 1-based interim look at which the decision was made.
    pub look: u32,
    /// Subjects enrolled in the arm when the decision was made.
    pub n_at_decision: u64,
}

impl ArmDecision {
    pub fn is_rejection(&self) -> bool {
        self.state == DecisionState::RejectNull
    }
}

/// Two-sided rejection threshold (1 - alpha/2)/(alpha/2).
///
/// Accepts alpha in (0, 1]; alpha = 1 gives the degenerate threshold 1.
pub fn threshold_two_sided(alpha: f64) -> Result<f64, DecisionError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(DecisionError::BadAlpha(alpha));
    }
    let half = alpha / 2.0;
    Ok((1.0 - half) / half)
}

/// Loss ratio k0/k1 = (1 - alpha)/alpha that calibrates a one-sided test to
/// level alpha.
pub fn loss_ratio_one_sided(alpha: f64) -> Result<f64, DecisionError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DecisionError::BadAlpha(alpha));
    }
    Ok((1.0 - alpha) / alpha)
}

/// Expected losses of the two terminal actions given the posterior
/// probability `p_alt` of a real effect: accepting loses k1 p_alt, rejecting
/// loses k0 (1 - p_alt).
pub fn expected_losses(p_alt: f64, losses: &LossParams) -> (f64, f64) {
    debug_assert!((0.0..=1.0).contains(&p_alt));
    (losses.k1 * p_alt, losses.k0 * (1.0 - p_alt))
}

/// Rejection rule: the Bayes factor meets or exceeds the cutoff.
pub fn reject_test(bf: f64, c: f64) -> bool {
    debug_assert!(bf >= 0.0 && c > 0.0);
    bf >= c
}

/// Wald's sequential test bounds: reject above (1 - beta)/alpha, accept
/// below beta/(1 - alpha).
pub fn wald_sprt_bounds(alpha: f64, beta: f64) -> Result<(f64, f64), DecisionError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DecisionError::BadAlpha(alpha));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(DecisionError::BadBeta(beta));
    }
    Ok(((1.0 - beta) / alpha, beta / (1.0 - alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sided_threshold_values() {
        assert_eq!(threshold_two_sided(0.05).unwrap(), 39.0);
        assert_eq!(threshold_two_sided(1.0).unwrap(), 1.0);
        assert_eq!(threshold_two_sided(0.5).unwrap(), 3.0);
    }

    #[test]
    fn threshold_rejects_bad_alpha() {
        assert_eq!(
            threshold_two_sided(0.0).unwrap_err(),
            DecisionError::BadAlpha(0.0)
        );
        assert_eq!(
            threshold_two_sided(1.5).unwrap_err(),
            DecisionError::BadAlpha(1.5)
        );
    }

    #[test]
    fn loss_ratio_values() {
        assert!((loss_ratio_one_sided(0.05).unwrap() - 19.0).abs() < 1e-12);
        assert_eq!(loss_ratio_one_sided(0.5).unwrap(), 1.0);
        assert!((loss_ratio_one_sided(0.1).unwrap() - 9.0).abs() < 1e-12);
        assert!(loss_ratio_one_sided(1.0).is_err());
    }

    #[test]
    fn threshold_equals_loss_ratio_at_half_alpha() {
        for alpha in [0.01, 0.05, 0.2, 0.8] {
            let t = threshold_two_sided(alpha).unwrap();
            let r = loss_ratio_one_sided(alpha / 2.0).unwrap();
            assert!((t - r).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_losses_at_the_corners() {
        let losses = LossParams::new(39.0, 1.0);
        assert_eq!(expected_losses(0.0, &losses), (0.0, 39.0));
        assert_eq!(expected_losses(1.0, &losses), (1.0, 0.0));
        let p = losses.k0 / (losses.k0 + losses.k1);
        let (a, r) = expected_losses(p, &losses);
        assert!((a - r).abs() < 1e-12);
    }

    #[test]
    fn rejection_is_boundary_inclusive() {
        assert!(reject_test(39.0, 39.0));
        assert!(!reject_test(38.999, 39.0));
        assert!(reject_test(1e9, 39.0));
    }

    #[test]
    fn wald_bounds_values() {
        let (u, l) = wald_sprt_bounds(0.05, 0.2).unwrap();
        assert_eq!(u, 16.0);
        assert!((l - 0.2 / 0.95).abs() < 1e-12);

        assert_eq!(wald_sprt_bounds(0.5, 0.5).unwrap(), (1.0, 1.0));

        let (u, l) = wald_sprt_bounds(0.05, 0.05).unwrap();
        assert!((u - 19.0).abs() < 1e-12);
        assert!((l - 1.0 / 19.0).abs() < 1e-12);

        assert!(wald_sprt_bounds(0.0, 0.5).is_err());
        assert!(wald_sprt_bounds(0.5, 1.0).is_err());
    }

    #[test]
    fn threshold_decreases_in_alpha() {
        let mut last = f64::INFINITY;
        for alpha in [0.01, 0.05, 0.1, 0.5, 0.9, 1.0] {
            let t = threshold_two_sided(alpha).unwrap();
            assert!(t < last);
            last = t;
        }
    }
}

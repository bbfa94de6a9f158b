//! Partial pooling of arm log-odds and the evidence statistic built on it.
//!
//! Each arm's counts are reduced to a logit-scale summary (y_r, v_r), and the
//! arms are tied together by a normal hierarchy: y_r ~ N(alpha_r, v_r) with
//! alpha_r ~ N(mu, sigma_alpha^2). Fitting maximizes the marginal likelihood
//! over (mu, sigma_alpha), which shrinks noisy arm estimates toward the grand
//! mean. The same marginal likelihood yields a per-arm Bayes factor: the
//! evidence for an arm differing from control is the ratio of the maximized
//! marginal likelihood to that of the model in which the two groups share one
//! effect. Posterior draws over arm effects feed contrasts and the
//! probability that each arm is best.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::glm::{bayes_factor_bic, ArmCounts};

/// Upper end of the sigma_alpha search interval. Arm effects are log-odds
/// differences; real rate spreads sit far inside this bound.
const SIGMA_MAX: f64 = 5.0;

/// Width at which the golden-section refinement stops.
const SIGMA_TOL: f64 = 1e-8;

/// Points in the coarse scan that brackets the maximum before refinement.
const SCAN_POINTS: usize = 64;

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Error, PartialEq)]
pub enum PoolError {
    #[error("arm {0}: enrollment count must be at least 1")]
    EmptyArm(usize),
    #[error("arm {0}: successes exceed enrollments")]
    BadCounts(usize),
    #[error("arm id {0} appears more than once")]
    DuplicateArm(usize),
    #[error("pooling requires at least 2 arms")]
    TooFewArms,
    #[error("arm {0}: summary is not finite or has nonpositive variance")]
    BadSummary(usize),
    #[error("arm id {0} not present")]
    UnknownArm(usize),
}

/// Logit-scale point estimate and sampling variance for one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmSummary {
    pub arm_id: usize,
    /// Observed log-odds of success.
    pub y: f64,
    /// Sampling variance of `y`.
    pub v: f64,
}

/// One arm's shrunk posterior within a fitted hierarchy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrunkArm {
    pub arm_id: usize,
    pub y: f64,
    pub v: f64,
    /// Posterior mean of the arm effect given the fitted hyperparameters.
    pub shrunk_mean: f64,
    /// Posterior variance of the arm effect given the fitted hyperparameters.
    pub shrunk_var: f64,
}

/// Maximum-marginal-likelihood fit of the two-level normal model.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingFit {
    /// Grand-mean log-odds.
    pub mu: f64,
    /// Between-arm standard deviation, 0 for complete pooling.
    pub sigma_alpha: f64,
    /// Variance of the grand-mean estimate.
    pub mu_var: f64,
    /// Maximized marginal log-likelihood over (mu, sigma_alpha).
    pub log_marginal: f64,
    pub arms: Vec<ShrunkArm>,
}

impl PoolingFit {
    pub fn arm(&self, arm_id: usize) -> Option<&ShrunkArm> {
        self.arms.iter().find(|a| a.arm_id == arm_id)
    }

    /// Shrunk effect difference between `arm_id` and `control`.
    pub fn contrast(&self, arm_id: usize, control: usize) -> Option<f64> {
        Some(self.arm(arm_id)?.shrunk_mean - self.arm(control)?.shrunk_mean)
    }
}

/// Matrix of posterior draws over arm effects, one row per draw, one column
/// per arm in `arm_ids` order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub arm_ids: Vec<usize>,
    pub n_draws: usize,
    /// Row-major values, length n_draws * arm_ids.len().
    pub values: Vec<f64>,
    pub seed: u64,
}

impl PosteriorDraws {
    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.arm_ids.len();
        &self.values[i * m..(i + 1) * m]
    }

    fn column_index(&self, arm_id: usize) -> Option<usize> {
        self.arm_ids.iter().position(|&id| id == arm_id)
    }
}

/// Reduces per-arm counts to logit summaries: y = logit(p), v = 1/(n p (1-p)).
///
/// Boundary counts (no successes or all successes) get half a success and
/// half a failure added so the summary stays finite; interior counts are
/// used as observed.
pub fn arm_logit_summaries(counts: &[ArmCounts]) -> Result<Vec<ArmSummary>, PoolError> {
    let mut seen = Vec::with_capacity(counts.len());
    let mut out = Vec::with_capacity(counts.len());
    for c in counts {
        if c.n == 0 {
            return Err(PoolError::EmptyArm(c.arm_id));
        }
        if c.s > c.n {
            return Err(PoolError::BadCounts(c.arm_id));
        }
        if seen.contains(&c.arm_id) {
            return Err(PoolError::DuplicateArm(c.arm_id));
        }
        seen.push(c.arm_id);

        let (s_adj, n_adj) = if c.is_boundary() {
            (c.s as f64 + 0.5, c.n as f64 + 1.0)
        } else {
            (c.s as f64, c.n as f64)
        };
        let p = s_adj / n_adj;
        out.push(ArmSummary {
            arm_id: c.arm_id,
            y: (p / (1.0 - p)).ln(),
            v: 1.0 / (n_adj * p * (1.0 - p)),
        });
    }
    Ok(out)
}

/// Marginal log-likelihood at spread `sigma`, with the grand mean set to its
/// closed-form optimum (the precision-weighted mean).
fn profiled_log_marginal(summaries: &[ArmSummary], sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let mut prec_sum = 0.0;
    let mut weighted_y = 0.0;
    for a in summaries {
        let w = 1.0 / (a.v + s2);
        prec_sum += w;
        weighted_y += w * a.y;
    }
    let mu = weighted_y / prec_sum;
    let mut ll = 0.0;
    for a in summaries {
        let tau = a.v + s2;
        let d = a.y - mu;
        ll -= 0.5 * (LN_2PI + tau.ln() + d * d / tau);
    }
    ll
}

/// Maximizes the profiled marginal log-likelihood over sigma_alpha.
///
/// A coarse scan over [0, SIGMA_MAX] brackets the maximum, golden-section
/// search refines it, and the result snaps to complete pooling whenever
/// sigma = 0 does at least as well.
fn max_log_marginal(summaries: &[ArmSummary]) -> (f64, f64) {
    let f = |sigma: f64| profiled_log_marginal(summaries, sigma);

    let step = SIGMA_MAX / SCAN_POINTS as f64;
    let mut best_i = 0;
    let mut best_ll = f(0.0);
    for i in 1..=SCAN_POINTS {
        let ll = f(i as f64 * step);
        if ll > best_ll {
            best_ll = ll;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { 0.0 } else { (best_i - 1) as f64 * step };
    let hi = ((best_i + 1).min(SCAN_POINTS)) as f64 * step;

    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > SIGMA_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let sigma_hat = 0.5 * (a + b);
    let ll_hat = f(sigma_hat);

    let ll_zero = f(0.0);
    if ll_zero >= ll_hat {
        (0.0, ll_zero)
    } else {
        (sigma_hat, ll_hat)
    }
}

fn validate_summaries(summaries: &[ArmSummary]) -> Result<(), PoolError> {
    let mut seen = Vec::with_capacity(summaries.len());
    for a in summaries {
        if !a.y.is_finite() || !a.v.is_finite() || a.v <= 0.0 {
            return Err(PoolError::BadSummary(a.arm_id));
        }
        if seen.contains(&a.arm_id) {
            return Err(PoolError::DuplicateArm(a.arm_id));
        }
        seen.push(a.arm_id);
    }
    Ok(())
}

/// Fits the normal hierarchy y_r ~ N(alpha_r, v_r), alpha_r ~ N(mu,
/// sigma_alpha^2) by maximum marginal likelihood and returns the shrunk
/// per-arm posteriors. With sigma_alpha = 0 every arm shrinks all the way to
/// the grand mean.
pub fn fit_hierarchical(summaries: &[ArmSummary]) -> Result<PoolingFit, PoolError> {
    if summaries.len() < 2 {
        return Err(PoolError::TooFewArms);
    }
    validate_summaries(summaries)?;

    let (sigma_alpha, log_marginal) = max_log_marginal(summaries);
    let s2 = sigma_alpha * sigma_alpha;

    let mut prec_sum = 0.0;
    let mut weighted_y = 0.0;
    for a in summaries {
        let w = 1.0 / (a.v + s2);
        prec_sum += w;
        weighted_y += w * a.y;
    }
    let mu = weighted_y / prec_sum;
    let mu_var = 1.0 / prec_sum;

    let arms = summaries
        .iter()
        .map(|a| {
            let (shrunk_mean, shrunk_var) = if sigma_alpha == 0.0 {
                (mu, 0.0)
            } else {
                let prec = 1.0 / a.v + 1.0 / s2;
                ((a.y / a.v + mu / s2) / prec, 1.0 / prec)
            };
            ShrunkArm {
                arm_id: a.arm_id,
                y: a.y,
                v: a.v,
                shrunk_mean,
                shrunk_var,
            }
        })
        .collect();

    Ok(PoolingFit {
        mu,
        sigma_alpha,
        mu_var,
        log_marginal,
        arms,
    })
}

/// Bayes factor for arm `arm_id` having a group effect distinct from
/// `control` within the hierarchy over `summaries`.
///
/// The alternative is the fitted hierarchy over all arms. The null merges
/// the control and arm summaries into one precision-weighted group; its
/// marginal likelihood factorizes exactly into the hierarchy over the merged
/// collection times the density of the observed difference y_arm - y_control
/// at mean 0 and variance v_arm + v_control. Both models carry the same two
/// hyperparameters, so their Schwarz criteria differ only by the marginal
/// likelihood ratio and the result saturates the same way as
/// `bayes_factor_bic`.
pub fn contrast_bayes_factor(
    summaries: &[ArmSummary],
    control: usize,
    arm_id: usize,
) -> Result<f64, PoolError> {
    if summaries.len() < 2 {
        return Err(PoolError::TooFewArms);
    }
    validate_summaries(summaries)?;
    let ctl = summaries
        .iter()
        .find(|a| a.arm_id == control)
        .ok_or(PoolError::UnknownArm(control))?;
    if arm_id == control {
        return Err(PoolError::UnknownArm(arm_id));
    }
    let arm = summaries
        .iter()
        .find(|a| a.arm_id == arm_id)
        .ok_or(PoolError::UnknownArm(arm_id))?;

    let (_, ll_full) = max_log_marginal(summaries);

    let pair_var = ctl.v + arm.v;
    let diff = arm.y - ctl.y;
    let ll_pair = -0.5 * (LN_2PI + pair_var.ln() + diff * diff / pair_var);

    let merged_prec = 1.0 / ctl.v + 1.0 / arm.v;
    let merged = ArmSummary {
        arm_id: control,
        y: (ctl.y / ctl.v + arm.y / arm.v) / merged_prec,
        v: 1.0 / merged_prec,
    };
    let reduced: Vec<ArmSummary> = summaries
        .iter()
        .filter(|a| a.arm_id != control && a.arm_id != arm_id)
        .copied()
        .chain(std::iter::once(merged))
        .collect();
    let (_, ll_null) = max_log_marginal(&reduced);

    Ok(bayes_factor_bic(
        -2.0 * (ll_null + ll_pair),
        -2.0 * ll_full,
    ))
}

/// Samples arm effects from the fitted hierarchy.
///
/// Each draw first samples the grand mean from N(mu, mu_var), then samples
/// every arm effect around its shrunk mean recomputed at the sampled grand
/// mean. The spread estimate itself is held fixed at sigma_alpha. Identical
/// inputs and seed give an identical matrix.
pub fn posterior_draws(fit: &PoolingFit, n_draws: usize, seed: u64) -> PosteriorDraws {
    debug_assert!(n_draws >= 1);
    let m = fit.arms.len();
    let s2 = fit.sigma_alpha * fit.sigma_alpha;
    let mu_sd = fit.mu_var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_draws * m);

    for _ in 0..n_draws {
        let z: f64 = rng.sample(StandardNormal);
        let mu_star = fit.mu + mu_sd * z;
        for arm in &fit.arms {
            let (mean, sd) = if fit.sigma_alpha == 0.0 {
                (mu_star, 0.0)
            } else {
                let prec = 1.0 / arm.v + 1.0 / s2;
                ((arm.y / arm.v + mu_star / s2) / prec, (1.0 / prec).sqrt())
            };
            let z: f64 = rng.sample(StandardNormal);
            values.push(mean + sd * z);
        }
    }

    PosteriorDraws {
        arm_ids: fit.arms.iter().map(|a| a.arm_id).collect(),
        n_draws,
        values,
        seed,
    }
}

/// Per-draw differences against the control column. The control column of
/// the result is identically zero.
pub fn contrast_draws(draws: &PosteriorDraws, control: usize) -> Result<PosteriorDraws, PoolError> {
    let ctl_col = draws
        .column_index(control)
        .ok_or(PoolError::UnknownArm(control))?;
    let mut values = Vec::with_capacity(draws.values.len());
    for i in 0..draws.n_draws {
        let row = draws.row(i);
        let base = row[ctl_col];
        for &x in row {
            values.push(x - base);
        }
    }
    Ok(PosteriorDraws {
        arm_ids: draws.arm_ids.clone(),
        n_draws: draws.n_draws,
        values,
        seed: draws.seed,
    })
}

/// Fraction of draws in which each arm attains the row maximum; draws where
/// several arms tie at the maximum are split equally among them. The
/// components form a probability vector.
pub fn prob_best(draws: &PosteriorDraws) -> Vec<f64> {
    let m = draws.arm_ids.len();
    let mut tally = vec![0.0_f64; m];
    for i in 0..draws.n_draws {
        let row = draws.row(i);
        let mut max = f64::NEG_INFINITY;
        for &x in row {
            if x > max {
                max = x;
            }
        }
        let ties = row.iter().filter(|&&x| x == max).count();
        let share = 1.0 / ties as f64;
        for (j, &x) in row.iter().enumerate() {
            if x == max {
                tally[j] += share;
            }
        }
    }
    tally.iter().map(|t| t / draws.n_draws as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(arm_id: usize, y: f64, v: f64) -> ArmSummary {
        ArmSummary { arm_id, y, v }
    }

    #[test]
    fn interior_counts_summarize_without_correction() {
        let s = arm_logit_summaries(&[ArmCounts::new(0, 100, 50)]).unwrap();
        assert_eq!(s[0].y, 0.0);
        assert!((s[0].v - 0.04).abs() < 1e-15);

        let s = arm_logit_summaries(&[ArmCounts::new(0, 400, 100)]).unwrap();
        assert!((s[0].y - (0.25f64 / 0.75).ln()).abs() < 1e-12);
        assert!((s[0].v - 1.0 / 75.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_counts_get_half_counts_added() {
        let s = arm_logit_summaries(&[ArmCounts::new(0, 100, 0)]).unwrap();
        let p: f64 = 0.5 / 101.0;
        assert!((s[0].y - (p / (1.0 - p)).ln()).abs() < 1e-12);
        assert!((s[0].v - 1.0 / (101.0 * p * (1.0 - p))).abs() < 1e-9);

        let hi = arm_logit_summaries(&[ArmCounts::new(1, 20, 20)]).unwrap();
        let p: f64 = 20.5 / 21.0;
        assert!((hi[0].y - (p / (1.0 - p)).ln()).abs() < 1e-12);
    }

    #[test]
    fn summary_validation() {
        assert_eq!(
            arm_logit_summaries(&[ArmCounts::new(3, 0, 0)]).unwrap_err(),
            PoolError::EmptyArm(3)
        );
        assert_eq!(
            arm_logit_summaries(&[ArmCounts::new(1, 5, 6)]).unwrap_err(),
            PoolError::BadCounts(1)
        );
        let dup = [ArmCounts::new(0, 5, 2), ArmCounts::new(0, 7, 3)];
        assert_eq!(
            arm_logit_summaries(&dup).unwrap_err(),
            PoolError::DuplicateArm(0)
        );
    }

    #[test]
    fn identical_arms_pool_completely() {
        let s = [summary(0, 0.3, 0.05), summary(1, 0.3, 0.02), summary(2, 0.3, 0.1)];
        let fit = fit_hierarchical(&s).unwrap();
        assert_eq!(fit.sigma_alpha, 0.0);
        assert!((fit.mu - 0.3).abs() < 1e-12);
        for arm in &fit.arms {
            assert_eq!(arm.shrunk_mean, fit.mu);
            assert_eq!(arm.shrunk_var, 0.0);
        }
    }

    #[test]
    fn two_arm_fit_matches_closed_form() {
        // For two arms with equal v the optimal total variance v + sigma^2
        // is (y0 - y1)^2 / 4.
        let fit = fit_hierarchical(&[summary(0, 0.0, 0.04), summary(1, 1.0, 0.04)]).unwrap();
        assert!((fit.mu - 0.5).abs() < 1e-9);
        assert!((fit.sigma_alpha - 0.21f64.sqrt()).abs() < 1e-6);
        let tau: f64 = 0.25;
        let expected_ll = -0.5 * (2.0 * (LN_2PI + tau.ln()) + 0.5 / tau);
        assert!((fit.log_marginal - expected_ll).abs() < 1e-9);
        assert!((fit.mu_var - 0.125).abs() < 1e-7);
        assert!((fit.arm(0).unwrap().shrunk_mean - 0.08).abs() < 1e-6);
        assert!((fit.arm(1).unwrap().shrunk_mean - 0.92).abs() < 1e-6);
    }

    #[test]
    fn symmetric_inputs_center_at_zero() {
        let fit = fit_hierarchical(&[summary(0, -0.7, 0.03), summary(1, 0.7, 0.03)]).unwrap();
        assert!(fit.mu.abs() < 1e-9);
    }

    #[test]
    fn fit_requires_two_arms() {
        assert_eq!(
            fit_hierarchical(&[summary(0, 0.0, 0.1)]).unwrap_err(),
            PoolError::TooFewArms
        );
        assert_eq!(
            fit_hierarchical(&[summary(0, 0.0, 0.0), summary(1, 0.0, 0.1)]).unwrap_err(),
            PoolError::BadSummary(0)
        );
    }

    #[test]
    fn shrinkage_sits_between_observation_and_grand_mean() {
        let s = [
            summary(0, -0.2, 0.01),
            summary(1, 0.4, 0.09),
            summary(2, 0.1, 0.02),
            summary(3, -0.5, 0.30),
        ];
        let fit = fit_hierarchical(&s).unwrap();
        for (a, obs) in fit.arms.iter().zip(&s) {
            let lo = obs.y.min(fit.mu);
            let hi = obs.y.max(fit.mu);
            assert!(a.shrunk_mean >= lo - 1e-12 && a.shrunk_mean <= hi + 1e-12);
            assert!(a.shrunk_var <= obs.v + 1e-15);
        }
    }

    #[test]
    fn identical_groups_carry_no_contrast_evidence() {
        let s = [summary(0, 0.1, 0.02), summary(1, 0.1, 0.02)];
        let bf = contrast_bayes_factor(&s, 0, 1).unwrap();
        assert!((bf.ln()).abs() < 1e-6);
    }

    #[test]
    fn separated_groups_carry_strong_contrast_evidence() {
        let s = [summary(0, 0.0, 0.001), summary(1, 0.5, 0.001)];
        let bf = contrast_bayes_factor(&s, 0, 1).unwrap();
        assert!(bf > 39.0);
    }

    #[test]
    fn contrast_bayes_factor_validates_arms() {
        let s = [summary(0, 0.0, 0.01), summary(1, 0.2, 0.01)];
        assert_eq!(
            contrast_bayes_factor(&s, 0, 2).unwrap_err(),
            PoolError::UnknownArm(2)
        );
        assert_eq!(
            contrast_bayes_factor(&s, 0, 0).unwrap_err(),
            PoolError::UnknownArm(0)
        );
    }

    #[test]
    fn degenerate_posterior_draws_collapse_to_mu() {
        let fit = PoolingFit {
            mu: 0.4,
            sigma_alpha: 0.0,
            mu_var: 0.0,
            log_marginal: 0.0,
            arms: vec![
                ShrunkArm { arm_id: 0, y: 0.4, v: 0.1, shrunk_mean: 0.4, shrunk_var: 0.0 },
                ShrunkArm { arm_id: 1, y: 0.4, v: 0.1, shrunk_mean: 0.4, shrunk_var: 0.0 },
            ],
        };
        let draws = posterior_draws(&fit, 100, 7);
        assert!(draws.values.iter().all(|&x| x == 0.4));
    }

    #[test]
    fn draws_are_reproducible_under_a_seed() {
        let fit = fit_hierarchical(&[
            summary(0, 0.0, 0.02),
            summary(1, 0.3, 0.04),
            summary(2, -0.1, 0.03),
        ])
        .unwrap();
        let a = posterior_draws(&fit, 500, 42);
        let b = posterior_draws(&fit, 500, 42);
        assert_eq!(a, b);
        let c = posterior_draws(&fit, 500, 43);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn draw_means_track_shrunk_means() {
        let fit = fit_hierarchical(&[
            summary(0, 0.0, 0.01),
            summary(1, 0.25, 0.02),
            summary(2, -0.15, 0.015),
        ])
        .unwrap();
        let n = 10_000;
        let draws = posterior_draws(&fit, n, 11);
        for (j, arm) in fit.arms.iter().enumerate() {
            let mean: f64 =
                (0..n).map(|i| draws.row(i)[j]).sum::<f64>() / n as f64;
            // Per-draw variance around the shrunk mean combines the grand
            // mean draw and the arm draw.
            let s2 = fit.sigma_alpha.powi(2);
            let w = (1.0 / s2) / (1.0 / arm.v + 1.0 / s2);
            let var = arm.shrunk_var + (w * fit.mu_var.sqrt()).powi(2);
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - arm.shrunk_mean).abs() < 4.0 * se,
                "arm {} mean {} vs shrunk {}",
                arm.arm_id,
                mean,
                arm.shrunk_mean
            );
        }
    }

    #[test]
    fn contrasts_subtract_the_control_column() {
        let draws = PosteriorDraws {
            arm_ids: vec![0, 1],
            n_draws: 1,
            values: vec![0.1, 0.3],
            seed: 0,
        };
        let c = contrast_draws(&draws, 0).unwrap();
        assert_eq!(c.values, vec![0.0, 0.19999999999999998]);

        let again = contrast_draws(&c, 0).unwrap();
        assert_eq!(again.values, c.values);

        assert_eq!(
            contrast_draws(&draws, 9).unwrap_err(),
            PoolError::UnknownArm(9)
        );
    }

    #[test]
    fn identical_columns_contrast_to_zero() {
        let draws = PosteriorDraws {
            arm_ids: vec![0, 1, 2],
            n_draws: 2,
            values: vec![0.5, 0.5, 0.5, -0.2, -0.2, -0.2],
            seed: 0,
        };
        let c = contrast_draws(&draws, 1).unwrap();
        assert!(c.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn prob_best_counts_row_maxima() {
        let draws = PosteriorDraws {
            arm_ids: vec![0, 1],
            n_draws: 1,
            values: vec![0.1, 0.2],
            seed: 0,
        };
        assert_eq!(prob_best(&draws), vec![0.0, 1.0]);
    }

    #[test]
    fn prob_best_splits_ties_and_sums_to_one() {
        let draws = PosteriorDraws {
            arm_ids: vec![0, 1, 2],
            n_draws: 4,
            values: vec![
                1.0, 1.0, 0.0, //
                0.2, 0.1, 0.0, //
                0.0, 0.3, 0.3, //
                0.5, 0.5, 0.5,
            ],
            seed: 0,
        };
        let p = prob_best(&draws);
        let third = 1.0 / 3.0;
        assert!((p[0] - (0.5 + 1.0 + third) / 4.0).abs() < 1e-15);
        assert!((p[1] - (0.5 + 0.5 + third) / 4.0).abs() < 1e-15);
        assert!((p[2] - (0.5 + third) / 4.0).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prob_best_is_exact_without_ties() {
        let draws = PosteriorDraws {
            arm_ids: vec![0, 1],
            n_draws: 4,
            values: vec![0.1, 0.2, 0.4, 0.3, 0.9, 1.2, -0.3, -0.1],
            seed: 0,
        };
        let p = prob_best(&draws);
        assert_eq!(p, vec![0.25, 0.75]);
        assert_eq!(p.iter().sum::<f64>(), 1.0);
    }
}

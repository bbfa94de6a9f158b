//! Sequential multi-arm trial simulation and cross-trial aggregation.
//!
//! A trial enrolls subjects in batches into a control arm and several
//! treatment arms, pausing after every batch for an interim look. At each
//! look the accrued counts are reduced to logit summaries, the hierarchy is
//! refit over every arm (stopped arms keep contributing their data), and
//! each still-active arm is tested against control. The proposed method
//! rejects an arm once its pooled-contrast Bayes factor reaches the
//! two-sided threshold; the inverted-evidence baseline turns joint-model
//! Bayes factors into p-values and applies Benjamini-Hochberg across the
//! arm family at every look. Rejected arms stop enrolling and their
//! decisions are frozen; arms still open after the last look accept the
//! null at the cap. Trials are independent, deterministic functions of
//! (seed, trial_index), so campaigns parallelize without affecting results.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{threshold_two_sided, ArmDecision, DecisionState, Direction};
use crate::glm::{bayes_factor_bic, fit_logistic, ArmCounts};
use crate::multiplicity::{benjamini_hochberg, bonferroni_alpha, fixed_sample_power, invert_bf, PValueSet};
use crate::pool::{arm_logit_summaries, contrast_bayes_factor, fit_hierarchical, posterior_draws, prob_best, ArmSummary};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("p0 must lie strictly between 0 and 1")]
    BadP0,
    #[error("p_r must list at least one treatment arm")]
    NoArms,
    #[error("p_r[{0}] must lie strictly between 0 and 1")]
    BadArmRate(usize),
    #[error("batch must be at least 1")]
    BadBatch,
    #[error("cap must be a positive multiple of batch")]
    BadCap,
    #[error("alpha must lie strictly between 0 and 1")]
    BadAlpha,
    #[error("n_draws must be at least 1")]
    BadDraws,
    #[error("n_trials must be at least 1")]
    BadTrials,
    #[error("adaptive_h must lie in [0, 1]")]
    BadAdaptiveH,
}

#[derive(Debug, Error, PartialEq)]
pub enum AllocationError {
    #[error("h must lie in [0, 1]")]
    BadExponent,
    #[error("probabilities must be nonnegative with a positive sum")]
    BadProbabilities,
}

/// Decision procedure run at each interim look.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Hierarchical pooled-contrast Bayes factor against a fixed threshold.
    Proposed,
    /// Joint-model Bayes factors inverted to p-values, Benjamini-Hochberg
    /// across the arm family at each look.
    Jpw,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Proposed => write!(f, "proposed"),
            Method::Jpw => write!(f, "jpw"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "jpw" => Ok(Method::Jpw),
            other => Err(format!("unknown method '{other}' (expected proposed or jpw)")),
        }
    }
}

/// Full description of a simulation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Control-arm success probability.
    pub p0: f64,
    /// Treatment-arm success probabilities; arm r is `p_r[r - 1]`.
    pub p_r: Vec<f64>,
    /// Enrollments per arm per look.
    pub batch: u64,
    /// Maximum enrollment per arm.
    pub cap: u64,
    /// Test level.
    pub alpha: f64,
    /// Posterior draws per look.
    pub n_draws: usize,
    pub method: Method,
    pub n_trials: usize,
    pub seed: u64,
    /// Adaptive-allocation aggressiveness; absent means equal allocation.
    pub adaptive_h: Option<f64>,
}

impl ExperimentConfig {
    /// Config with the standard monitoring schedule: batches of 500 up to
    /// 20,000 per arm (40 looks), alpha 0.05, 4,000 draws per look.
    pub fn new(p0: f64, p_r: Vec<f64>) -> Self {
        ExperimentConfig {
            p0,
            p_r,
            batch: 500,
            cap: 20_000,
            alpha: 0.05,
            n_draws: 4_000,
            method: Method::Proposed,
            n_trials: 1_000,
            seed: 0,
            adaptive_h: None,
        }
    }

    /// Number of treatment arms.
    pub fn n_arms(&self) -> usize {
        self.p_r.len()
    }

    /// Number of interim looks implied by the cap and batch size.
    pub fn n_looks(&self) -> u32 {
        (self.cap / self.batch) as u32
    }

    /// Success probability of an arm by id (0 is control).
    pub fn rate(&self, arm_id: usize) -> f64 {
        if arm_id == 0 {
            self.p0
        } else {
            self.p_r[arm_id - 1]
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(ConfigError::BadP0);
        }
        if self.p_r.is_empty() {
            return Err(ConfigError::NoArms);
        }
        for (i, &p) in self.p_r.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(ConfigError::BadArmRate(i));
            }
        }
        if self.batch < 1 {
            return Err(ConfigError::BadBatch);
        }
        if self.cap < self.batch || self.cap % self.batch != 0 {
            return Err(ConfigError::BadCap);
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::BadAlpha);
        }
        if self.n_draws < 1 {
            return Err(ConfigError::BadDraws);
        }
        if self.n_trials < 1 {
            return Err(ConfigError::BadTrials);
        }
        if let Some(h) = self.adaptive_h {
            if !(0.0..=1.0).contains(&h) {
                return Err(ConfigError::BadAdaptiveH);
            }
        }
        Ok(())
    }
}

/// One arm's row in a look record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmLookRecord {
    pub arm_id: usize,
    /// Cumulative enrollment.
    pub n: u64,
    /// Bayes factor computed for the arm at this look; absent for the
    /// control arm and for arms not tested this look.
    pub bf: Option<f64>,
    pub prob_best: f64,
    /// Decision state after this look; absent for the control arm.
    pub state: Option<DecisionState>,
    pub direction: Direction,
}

/// Everything observed at one interim look.
#[derive(Debug, Clone, PartialEq)]
pub struct LookRecord {
    /// 1-based look index.
    pub look: u32,
    pub arms: Vec<ArmLookRecord>,
}

/// Outcome of one simulated trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_index: usize,
    /// Final decision per treatment arm; arm r is `decisions[r - 1]`.
    pub decisions: Vec<ArmDecision>,
    /// Final enrollment per arm, indexed by arm id (0 is control).
    pub final_n: Vec<u64>,
    pub looks: Vec<LookRecord>,
}

/// Cross-trial summary for one treatment arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmMetrics {
    pub arm_id: usize,
    /// True success probability of the arm.
    pub p: f64,
    /// True when the arm's rate equals the control rate.
    pub is_null: bool,
    /// Fraction of trials rejecting the arm's null: power for non-null
    /// arms, a Type I estimate for null arms.
    pub rejection_rate: f64,
    /// Mean enrollment at decision.
    pub n_bar: f64,
    /// Mean fixed-sample power at each trial's observed enrollment;
    /// reported for non-null arms.
    pub fixed_power: Option<f64>,
    /// Same, at the Bonferroni-adjusted level.
    pub fixed_power_bonferroni: Option<f64>,
}

/// Operating characteristics of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub arms: Vec<ArmMetrics>,
    pub control_n_bar: f64,
    /// Fraction of trials with at least one false rejection.
    pub fwer: f64,
    /// False rejections over all rejections; 0 when nothing was rejected.
    pub fdr: f64,
    /// Mean rejection rate across null arms; absent when no arm is null.
    pub per_test_alpha: Option<f64>,
    /// (false rejections + missed effects) / (n_trials * arms).
    pub overall_error_rate: f64,
}

/// Derives the per-trial generator seed from the campaign seed and trial
/// index by two rounds of splitmix64 mixing, so trial streams are
/// decorrelated and independent of execution order.
pub fn trial_seed(seed: u64, trial_index: usize) -> u64 {
    let mut state = seed.wrapping_add((trial_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut mix = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    mix();
    mix()
}

/// Draws the number of successes among `batch` enrollments at success
/// probability `p`.
pub fn generate_batch<R: Rng>(p: f64, batch: u64, rng: &mut R) -> u64 {
    Binomial::new(batch, p).expect("probability in [0, 1]").sample(rng)
}

/// Enrollment weights proportional to prob_best^h, the allocation rule with
/// aggressiveness h: h = 0 is uniform, h = 1 allocates by prob_best itself.
/// 0^0 counts as 1.
pub fn adaptive_allocation(prob_best: &[f64], h: f64) -> Result<Vec<f64>, AllocationError> {
    if !(0.0..=1.0).contains(&h) {
        return Err(AllocationError::BadExponent);
    }
    if prob_best.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(AllocationError::BadProbabilities);
    }
    let powered: Vec<f64> = prob_best.iter().map(|&p| p.powf(h)).collect();
    let total: f64 = powered.iter().sum();
    if total <= 0.0 {
        return Err(AllocationError::BadProbabilities);
    }
    Ok(powered.iter().map(|w| w / total).collect())
}

/// Splits `total` into integer counts proportional to `weights` by largest
/// remainder; leftover units go to the largest fractional parts, lower index
/// first on ties.
fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut remaining = total.saturating_sub(assigned);
    let mut i = 0;
    while remaining > 0 {
        counts[order[i % order.len()]] += 1;
        remaining -= 1;
        i += 1;
    }
    counts
}

/// Per-arm enrollment counts for one look, over the participating arms.
/// Without adaptive allocation every participant receives a full batch.
/// With it, the previous look's prob_best values over the participants are
/// renormalized, raised to h, and a pool of batch * participants.len()
/// enrollments is split by largest remainder; all-zero weights fall back to
/// an even split. The first look has no prob_best yet and splits evenly.
fn plan_enrollment(
    config: &ExperimentConfig,
    participants: &[usize],
    last_prob_best: Option<&[f64]>,
) -> Vec<u64> {
    let h = match config.adaptive_h {
        None => return vec![config.batch; participants.len()],
        Some(h) => h,
    };
    let total = config.batch * participants.len() as u64;
    let uniform = vec![1.0 / participants.len() as f64; participants.len()];
    let weights = match last_prob_best {
        None => uniform,
        Some(pb) => {
            let subset: Vec<f64> = participants.iter().map(|&a| pb[a]).collect();
            adaptive_allocation(&subset, h).unwrap_or(uniform)
        }
    };
    apportion(&weights, total)
}

/// Bayes factors for the still-active arms under the pooled-contrast rule.
/// An arm sits out the look when its counts or the control's are at the
/// boundary of their support.
fn proposed_bayes_factors(
    counts: &[ArmCounts],
    summaries: &[ArmSummary],
    active: &[usize],
) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(active.len());
    if counts[0].is_boundary() {
        return out;
    }
    for &r in active {
        if counts[r].is_boundary() {
            continue;
        }
        if let Ok(bf) = contrast_bayes_factor(summaries, 0, r) {
            out.push((r, bf));
        }
    }
    out
}

/// Bayes factors for the still-active arms under the joint-model rule: one
/// saturated logistic fit over every arm with usable counts, and per arm a
/// nested fit with that arm merged into control. Boundary arms sit out both
/// the fit and the look.
fn jpw_bayes_factors(counts: &[ArmCounts], active: &[usize]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(active.len());
    if counts[0].is_boundary() {
        return out;
    }
    let usable: Vec<ArmCounts> = counts
        .iter()
        .filter(|c| !c.is_boundary())
        .copied()
        .collect();
    let full = match fit_logistic(&usable) {
        Ok(fit) => fit,
        Err(_) => return out,
    };
    for &r in active {
        if counts[r].is_boundary() {
            continue;
        }
        let mut merged: Vec<ArmCounts> = Vec::with_capacity(usable.len() - 1);
        for c in &usable {
            match c.arm_id {
                0 => merged.push(ArmCounts::new(0, c.n + counts[r].n, c.s + counts[r].s)),
                id if id == r => {}
                _ => merged.push(*c),
            }
        }
        if let Ok(null) = fit_logistic(&merged) {
            out.push((r, bayes_factor_bic(null.bic, full.bic)));
        }
    }
    out
}

/// Runs one trial to completion. Deterministic in (config, trial_index).
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialResult, ConfigError> {
    config.validate()?;
    Ok(run_trial_validated(config, trial_index))
}

fn run_trial_validated(config: &ExperimentConfig, trial_index: usize) -> TrialResult {
    let m = config.n_arms();
    let n_looks = config.n_looks();
    let threshold = threshold_two_sided(config.alpha).expect("validated alpha");
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, trial_index));

    let mut n = vec![0_u64; m + 1];
    let mut s = vec![0_u64; m + 1];
    let mut decisions: Vec<Option<ArmDecision>> = vec![None; m];
    let mut frozen_pstar: Vec<Option<f64>> = vec![None; m];
    let mut last_prob_best: Option<Vec<f64>> = None;
    let mut looks = Vec::new();

    for look in 1..=n_looks {
        let active: Vec<usize> = (1..=m).filter(|&r| decisions[r - 1].is_none()).collect();
        if active.is_empty() {
            break;
        }

        // Control enrolls alongside every still-active arm.
        let mut participants = vec![0_usize];
        participants.extend(&active);
        let alloc = plan_enrollment(config, &participants, last_prob_best.as_deref());
        for (&arm, &count) in participants.iter().zip(&alloc) {
            n[arm] += count;
            s[arm] += generate_batch(config.rate(arm), count, &mut rng);
        }

        // Estimation uses every arm's accrued data, decided arms included.
        let counts: Vec<ArmCounts> = (0..=m).map(|a| ArmCounts::new(a, n[a], s[a])).collect();
        let summaries = arm_logit_summaries(&counts).expect("positive enrollments");
        let fit = fit_hierarchical(&summaries).expect("at least two arms");
        let draw_seed = rng.next_u64();
        let draws = posterior_draws(&fit, config.n_draws, draw_seed);
        let pb = prob_best(&draws);

        let tested: Vec<(usize, f64)> = match config.method {
            Method::Proposed => proposed_bayes_factors(&counts, &summaries, &active),
            Method::Jpw => jpw_bayes_factors(&counts, &active),
        };
        let mut bf_at_look = vec![None; m + 1];
        for &(r, bf) in &tested {
            bf_at_look[r] = Some(bf);
        }

        let newly_rejected: Vec<usize> = match config.method {
            Method::Proposed => tested
                .iter()
                .filter(|&&(_, bf)| bf >= threshold)
                .map(|&(r, _)| r)
                .collect(),
            Method::Jpw => {
                // The step-up family spans every arm: decided arms keep the
                // p-value they were rejected at, active arms contribute
                // this look's value.
                let mut labels = Vec::with_capacity(m);
                let mut values = Vec::with_capacity(m);
                for r in 1..=m {
                    let p = frozen_pstar[r - 1]
                        .or_else(|| bf_at_look[r].map(invert_bf));
                    if let Some(p) = p {
                        labels.push(r);
                        values.push(p);
                    }
                }
                let set = PValueSet::new(labels, values).expect("valid p-values");
                let rejected = benjamini_hochberg(&set, config.alpha).expect("valid level");
                set.labels
                    .iter()
                    .zip(&rejected)
                    .filter(|&(r, &rej)| rej && active.contains(r))
                    .map(|(&r, _)| r)
                    .collect()
            }
        };

        for &r in &newly_rejected {
            let contrast = fit.contrast(r, 0).expect("arm present in fit");
            let direction = if contrast < 0.0 {
                Direction::Inferior
            } else {
                Direction::Superior
            };
            decisions[r - 1] = Some(ArmDecision {
                state: DecisionState::RejectNull,
                direction,
                look,
                n_at_decision: n[r],
            });
            if config.method == Method::Jpw {
                frozen_pstar[r - 1] = bf_at_look[r].map(invert_bf);
            }
        }

        if look == n_looks {
            for &r in &active {
                if decisions[r - 1].is_none() {
                    decisions[r - 1] = Some(ArmDecision {
                        state: DecisionState::AcceptNullAtCap,
                        direction: Direction::None,
                        look,
                        n_at_decision: n[r],
                    });
                }
            }
        }

        looks.push(LookRecord {
            look,
            arms: (0..=m)
                .map(|a| ArmLookRecord {
                    arm_id: a,
                    n: n[a],
                    bf: bf_at_look[a],
                    prob_best: pb[a],
                    state: if a == 0 {
                        None
                    } else {
                        Some(decisions[a - 1].map_or(DecisionState::Continue, |d| d.state))
                    },
                    direction: if a == 0 {
                        Direction::None
                    } else {
                        decisions[a - 1].map_or(Direction::None, |d| d.direction)
                    },
                })
                .collect(),
        });

        last_prob_best = Some(pb);
    }

    TrialResult {
        trial_index,
        decisions: decisions
            .into_iter()
            .map(|d| d.expect("every treatment arm decided"))
            .collect(),
        final_n: n,
        looks,
    }
}

/// Runs the whole campaign. Trials fan out across the current thread pool;
/// results are ordered by trial index, so the outcome does not depend on
/// worker count.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialResult>, ConfigError> {
    config.validate()?;
    Ok((0..config.n_trials)
        .into_par_iter()
        .map(|i| run_trial_validated(config, i))
        .collect())
}

/// Cross-trial operating characteristics for a campaign.
pub fn aggregate(results: &[TrialResult], config: &ExperimentConfig) -> AggregateMetrics {
    assert!(!results.is_empty(), "aggregate requires at least one trial");
    let m = config.n_arms();
    let n_trials = results.len() as f64;
    let bonf = bonferroni_alpha(config.alpha, m).expect("validated alpha");

    let mut arms = Vec::with_capacity(m);
    for r in 1..=m {
        let p = config.p_r[r - 1];
        let is_null = p == config.p0;
        let rejections = results
            .iter()
            .filter(|t| t.decisions[r - 1].is_rejection())
            .count();
        let n_bar = results.iter().map(|t| t.final_n[r] as f64).sum::<f64>() / n_trials;
        let (fixed_power, fixed_power_bonferroni) = if is_null {
            (None, None)
        } else {
            let mut at_alpha = 0.0;
            let mut at_bonf = 0.0;
            for t in results {
                let n_obs = t.final_n[r];
                at_alpha += fixed_sample_power(n_obs, config.p0, p, config.alpha)
                    .expect("validated rates");
                at_bonf += fixed_sample_power(n_obs, config.p0, p, bonf)
                    .expect("validated rates");
            }
            (Some(at_alpha / n_trials), Some(at_bonf / n_trials))
        };
        arms.push(ArmMetrics {
            arm_id: r,
            p,
            is_null,
            rejection_rate: rejections as f64 / n_trials,
            n_bar,
            fixed_power,
            fixed_power_bonferroni,
        });
    }

    let null_arms: Vec<usize> = (1..=m).filter(|&r| config.p_r[r - 1] == config.p0).collect();
    let mut trials_with_false_rejection = 0_usize;
    let mut false_rejections = 0_usize;
    let mut total_rejections = 0_usize;
    let mut missed_effects = 0_usize;
    for t in results {
        let mut any_false = false;
        for r in 1..=m {
            let rejected = t.decisions[r - 1].is_rejection();
            let is_null = config.p_r[r - 1] == config.p0;
            if rejected {
                total_rejections += 1;
                if is_null {
                    false_rejections += 1;
                    any_false = true;
                }
            } else if !is_null {
                missed_effects += 1;
            }
        }
        if any_false {
            trials_with_false_rejection += 1;
        }
    }

    let per_test_alpha = if null_arms.is_empty() {
        None
    } else {
        let total: f64 = null_arms
            .iter()
            .map(|&r| arms[r - 1].rejection_rate)
            .sum();
        Some(total / null_arms.len() as f64)
    };

    AggregateMetrics {
        arms,
        control_n_bar: results.iter().map(|t| t.final_n[0] as f64).sum::<f64>() / n_trials,
        fwer: trials_with_false_rejection as f64 / n_trials,
        fdr: if total_rejections == 0 {
            0.0
        } else {
            false_rejections as f64 / total_rejections as f64
        },
        per_test_alpha,
        overall_error_rate: (false_rejections + missed_effects) as f64 / (n_trials * m as f64),
    }
}

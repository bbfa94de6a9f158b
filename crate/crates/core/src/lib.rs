//! Decision engine and simulation harness for sequential multi-arm A/B
//! experiments with binary outcomes.
//!
//! The pieces, bottom up:
//!
//! - [`glm`]: saturated logistic fits over arm indicators, the Schwarz
//!   criterion, and the criterion-based Bayes factor.
//! - [`pool`]: partial pooling of arm log-odds, posterior draws, prob-best,
//!   and the pooled-contrast Bayes factor used as the stopping statistic.
//! - [`decision`]: rejection thresholds, loss calibration, and per-arm
//!   decision records.
//! - [`multiplicity`]: Bonferroni, Benjamini-Hochberg, Bayes-factor
//!   inversion, and fixed-sample power for comparison columns.
//! - [`engine`]: the interim-monitoring loop over simulated trials, arm
//!   lifecycle, adaptive allocation, and cross-trial operating
//!   characteristics.
//!
//! Everything is deterministic under a seed: trials derive their generator
//! state from (campaign seed, trial index), so campaigns can fan out across
//! any number of workers without changing a single result.

pub mod decision;
pub mod engine;
pub mod glm;
pub mod multiplicity;
pub mod pool;

pub use decision::{ArmDecision, DecisionState, Direction};
pub use engine::{AggregateMetrics, ArmMetrics, ExperimentConfig, Method, TrialResult};
pub use glm::{ArmCounts, LogisticFit};
pub use pool::{ArmSummary, PoolingFit, PosteriorDraws};

//! Exact statistical kernels: Fisher's exact test, the exact binomial test,
//! Holm–Bonferroni step-down correction, and Spearman rank correlation.

mod exact;
mod holm;
mod spearman;

use thiserror::Error;

pub use exact::{binomial_two_sided, fisher_exact_two_sided, ContingencyTable2x2};
pub use holm::{holm_bonferroni, HolmOutcome};
pub use spearman::{mid_ranks, spearman_rank};

/// Relative slack when comparing a table's point probability with the
/// observed one, so floating-point noise never excludes the observed table.
pub const TIE_SLACK: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("contingency table has no observations")]
    EmptyTable,
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("successes {successes} exceed trials {trials}")]
    InvalidCount { successes: u64, trials: u64 },
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("rank correlation needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("input is constant; correlation is undefined")]
    ConstantInput,
    #[error("family alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

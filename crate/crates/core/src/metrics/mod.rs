//! Harrell's concordance index and the Kaplan–Meier estimator.

mod concordance;
mod kaplan_meier;

pub use concordance::{concordance_index, concordance_index_exhaustive, ConcordanceResult};
pub use kaplan_meier::{kaplan_meier, KaplanMeierCurve};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no comparable pairs (for example, every subject is censored)")]
    NoComparablePairs,
    #[error("length mismatch: {times} times, {events} events, {risks} risks")]
    LengthMismatch {
        times: usize,
        events: usize,
        risks: usize,
    },
    #[error("risk score at position {0} is not finite")]
    NonFiniteRisk(usize),
    #[error("follow-up time at position {0} is negative or not finite")]
    InvalidTime(usize),
    #[error("no subjects")]
    Empty,
}

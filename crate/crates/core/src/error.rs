use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid noise level {noise} for {classes} classes: must lie in [0, {bound}{}", if *.inclusive { "]" } else { ")" })]
    InvalidNoise { noise: f64, classes: usize, bound: f64, inclusive: bool },
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("tally is empty")]
    EmptyTally,
    #[error("budget exhausted: requested {requested}, remaining {remaining}")]
    BudgetExceeded { requested: u64, remaining: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed card {0:?}")]
    InvalidCard(String),
    #[error("duplicate card {0}")]
    DuplicateCard(String),
    #[error("expected {expected} cards, got {actual}")]
    WrongCardCount { expected: usize, actual: usize },
    #[error("matchup is exactly balanced; no hand is strictly more likely to win")]
    BalancedMatchup,
    #[error("invalid policy {spec:?}: {reason}")]
    InvalidPolicy { spec: String, reason: String },
    #[error("idx: {0}")]
    Idx(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

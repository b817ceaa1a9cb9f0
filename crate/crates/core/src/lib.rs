//! Budgeted labeling under noisy oracles.
//!
//! An oracle answers label queries for an example, returning the correct label
//! with probability `q` and an incorrect one otherwise. Repeating a query
//! ("validating") costs the same budget as labeling a new example, so a
//! labeling campaign trades label quality against data volume. This crate
//! provides:
//!
//! - the domain types ([`ProbabilityVector`], [`VoteTally`], [`BudgetLedger`])
//!   and reproducible per-example random streams ([`RandomStream`]);
//! - exact and Monte Carlo probabilities that a majority vote recovers the
//!   correct label, and the chi-square goodness-of-fit test ([`stats`]);
//! - uniform-noise and arbitrary-vector oracles ([`oracle`]) plus a Texas
//!   Hold'em showdown oracle with exact flop equity ([`poker`]);
//! - fixed, scheduled and chi-square validation policies ([`policy`]);
//! - a campaign simulator with CSV/summary emission ([`campaign`]) and MNIST
//!   IDX ingestion for relabeling real label files ([`idx`]).

pub mod campaign;
mod error;
pub mod idx;
pub mod oracle;
pub mod poker;
pub mod policy;
mod rng;
pub mod stats;
mod types;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use types::{make_uniform_noise_vector, BudgetLedger, Example, LabelId, ProbabilityVector, VoteTally};

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Index of a label in `0..classes`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub usize);

impl LabelId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An item to be labeled. The ground-truth function is carried extensionally
/// as `true_label`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub id: u64,
    pub payload: Option<Vec<u8>>,
    pub true_label: LabelId,
}

impl Example {
    pub fn new(id: u64, true_label: LabelId) -> Self {
        Self { id, payload: None, true_label }
    }
}

/// The label distribution of an oracle for one example. The correct label is
/// strictly the most probable one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
    correct: usize,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>, correct_index: usize) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidProbabilities(format!("need at least 2 labels, got {}", probs.len())));
        }
        if correct_index >= probs.len() {
            return Err(Error::LabelOutOfRange { label: correct_index, classes: probs.len() });
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbabilities(format!("entry {bad} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbabilities(format!("entries sum to {sum}")));
        }
        let q = probs[correct_index];
        if probs.iter().enumerate().any(|(k, &p)| k != correct_index && p >= q) {
            return Err(Error::InvalidProbabilities(format!(
                "label {correct_index} is not strictly the most probable"
            )));
        }
        Ok(Self { probs, correct: correct_index })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn classes(&self) -> usize {
        self.probs.len()
    }

    pub fn correct_index(&self) -> usize {
        self.correct
    }

    /// Probability of the correct label.
    pub fn q(&self) -> f64 {
        self.probs[self.correct]
    }

    /// Total probability of all incorrect labels.
    pub fn w(&self) -> f64 {
        1.0 - self.q()
    }
}

/// Largest admissible uniform noise level for `classes` labels (exclusive for
/// a strict [`ProbabilityVector`]).
pub(crate) fn noise_bound(classes: usize) -> f64 {
    (classes - 1) as f64 / classes as f64
}

/// Correct label gets `1 - w`, every other label `w / (l - 1)`.
pub fn make_uniform_noise_vector(classes: usize, noise: f64, correct_index: usize) -> Result<ProbabilityVector> {
    if classes < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 classes, got {classes}")));
    }
    if correct_index >= classes {
        return Err(Error::LabelOutOfRange { label: correct_index, classes });
    }
    let bound = noise_bound(classes);
    if !(noise >= 0.0 && noise < bound) {
        return Err(Error::InvalidNoise { noise, classes, bound, inclusive: false });
    }
    let other = noise / (classes - 1) as f64;
    let mut probs = vec![other; classes];
    probs[correct_index] = 1.0 - noise;
    ProbabilityVector::new(probs, correct_index)
}

/// Per-label answer counts for one example.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VoteTally {
    counts: Vec<u32>,
}

impl VoteTally {
    pub fn new(classes: usize) -> Self {
        Self { counts: vec![0; classes] }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn count(&self, label: LabelId) -> u32 {
        self.counts[label.0]
    }

    /// Panics if `label` is out of range.
    pub fn record(&mut self, label: LabelId) {
        self.counts[label.0] += 1;
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Labels attaining the maximum count, in index order.
    pub fn modes(&self) -> Vec<LabelId> {
        let max = self.max_count();
        self.counts.iter().enumerate().filter(|(_, &c)| c == max).map(|(k, _)| LabelId(k)).collect()
    }

    /// True when one label strictly leads all others.
    pub fn has_unique_mode(&self) -> bool {
        let max = self.max_count();
        max > 0 && self.counts.iter().filter(|&&c| c == max).count() == 1
    }
}

/// Global query budget. Debits are atomic so a ledger can be shared between
/// workers; the consumed count never exceeds `s_max`.
#[derive(Debug)]
pub struct BudgetLedger {
    s_max: u64,
    consumed: AtomicU64,
}

impl BudgetLedger {
    pub fn new(s_max: u64) -> Self {
        Self { s_max, consumed: AtomicU64::new(0) }
    }

    pub fn with_consumed(s_max: u64, consumed: u64) -> Result<Self> {
        if consumed > s_max {
            return Err(Error::BudgetExceeded { requested: consumed, remaining: s_max });
        }
        Ok(Self { s_max, consumed: AtomicU64::new(consumed) })
    }

    pub fn s_max(&self) -> u64 {
        self.s_max
    }

    pub fn consumed(&self) -> u64 {
        self.consumed.load(Ordering::Acquire)
    }

    pub fn remaining(&self) -> u64 {
        self.s_max - self.consumed()
    }

    /// Fraction of the budget already spent; 0 for an empty budget.
    pub fn fraction_consumed(&self) -> f64 {
        if self.s_max == 0 {
            0.0
        } else {
            self.consumed() as f64 / self.s_max as f64
        }
    }

    /// Debits `n` queries, or fails without debiting anything.
    pub fn try_consume(&self, n: u64) -> Result<()> {
        self.consumed
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |c| c.checked_add(n).filter(|&next| next <= self.s_max))
            .map(|_| ())
            .map_err(|c| Error::BudgetExceeded { requested: n, remaining: self.s_max - c })
    }
}

impl Clone for BudgetLedger {
    fn clone(&self) -> Self {
        Self { s_max: self.s_max, consumed: AtomicU64::new(self.consumed()) }
    }
}

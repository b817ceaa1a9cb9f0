//! Noisy labeling oracles. Every query is an independent draw from the
//! example's label distribution using the caller's stream.

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::types::{noise_bound, Example, LabelId, ProbabilityVector, VoteTally};

// Admits the degenerate uniform oracle w = (l - 1) / l despite rounding.
const BOUNDARY_SLACK: f64 = 1e-12;

pub trait Oracle: Sync {
    fn classes(&self) -> usize;

    fn query(&self, example: &Example, rng: &mut RandomStream) -> Result<LabelId>;

    /// `n` sequential queries on the same stream.
    fn query_n(&self, example: &Example, n: u32, rng: &mut RandomStream) -> Result<VoteTally> {
        if n == 0 {
            return Err(Error::InvalidArgument("query_n needs n >= 1".into()));
        }
        let mut tally = VoteTally::new(self.classes());
        for _ in 0..n {
            tally.record(self.query(example, rng)?);
        }
        Ok(tally)
    }
}

fn check_label(example: &Example, classes: usize) -> Result<usize> {
    let label = example.true_label.index();
    if label >= classes {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    Ok(label)
}

/// Returns the example's true label with probability `1 - w` and each other
/// label with probability `w / (l - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformNoiseOracle {
    classes: usize,
    noise: f64,
    q: f64,
    other: f64,
}

impl UniformNoiseOracle {
    /// Accepts `0 <= w <= (l - 1) / l`; the upper end is the degenerate oracle
    /// that answers uniformly at random.
    pub fn new(classes: usize, noise: f64) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 classes, got {classes}")));
        }
        let bound = noise_bound(classes);
        if !(noise >= 0.0 && noise <= bound + BOUNDARY_SLACK) {
            return Err(Error::InvalidNoise { noise, classes, bound, inclusive: true });
        }
        Ok(Self { classes, noise, q: 1.0 - noise, other: noise / (classes - 1) as f64 })
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Label distribution for an example whose true label is `correct`.
    /// Fails at the degenerate uniform boundary, where no label is strictly
    /// most probable.
    pub fn probability_vector(&self, correct: usize) -> Result<ProbabilityVector> {
        crate::types::make_uniform_noise_vector(self.classes, self.noise, correct)
    }

    /// One answer for true label `correct`, by inverse CDF on a single draw.
    #[inline]
    pub fn draw(&self, correct: usize, rng: &mut RandomStream) -> usize {
        let u = rng.next_unit();
        if u < self.q {
            return correct;
        }
        let k = (((u - self.q) / self.other) as usize).min(self.classes - 2);
        if k >= correct {
            k + 1
        } else {
            k
        }
    }
}

impl Oracle for UniformNoiseOracle {
    fn classes(&self) -> usize {
        self.classes
    }

    fn query(&self, example: &Example, rng: &mut RandomStream) -> Result<LabelId> {
        let correct = check_label(example, self.classes)?;
        Ok(LabelId(self.draw(correct, rng)))
    }
}

/// An oracle with a fixed, arbitrary label distribution, shared by every
/// example it is asked about.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorOracle {
    probs: ProbabilityVector,
    cumulative: Vec<f64>,
}

impl VectorOracle {
    pub fn new(probs: ProbabilityVector) -> Self {
        let cumulative = probs
            .probs()
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Self { probs, cumulative }
    }

    pub fn probability_vector(&self) -> &ProbabilityVector {
        &self.probs
    }

    #[inline]
    pub fn draw(&self, rng: &mut RandomStream) -> usize {
        let u = rng.next_unit();
        let k = self.cumulative.partition_point(|&c| c <= u);
        // rounding can leave the last cumulative entry a hair under 1
        let k = k.min(self.cumulative.len() - 1);
        if self.probs.probs()[k] > 0.0 {
            k
        } else {
            // never return a zero-probability label
            (0..=k).rev().find(|&j| self.probs.probs()[j] > 0.0).unwrap_or(self.probs.correct_index())
        }
    }
}

impl Oracle for VectorOracle {
    fn classes(&self) -> usize {
        self.probs.classes()
    }

    fn query(&self, example: &Example, rng: &mut RandomStream) -> Result<LabelId> {
        check_label(example, self.classes())?;
        Ok(LabelId(self.draw(rng)))
    }
}

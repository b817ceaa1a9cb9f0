use rand::Rng;

use super::multinomial::{binomial_pmf, compositions_count, for_each_composition, ln_factorial, multinomial_pmf_raw};
use crate::error::{Error, Result};
use crate::oracle::UniformNoiseOracle;
use crate::rng::RandomStream;
use crate::types::{LabelId, ProbabilityVector, VoteTally};

/// Tally enumeration is used while the number of tallies stays below this.
pub const ENUMERATION_LIMIT: f64 = 2e6;

// Slack for the uniform boundary q = (1 - q) / (l - 1), where rounding of
// 1 - w can put q a few ulps below w / (l - 1).
const BOUNDARY_SLACK: f64 = 1e-12;

/// Probability that a majority vote over `v` answers returns the correct label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MajorityProbResult {
    /// The correct label's count strictly exceeds every other count.
    pub strict_prob: f64,
    /// `strict_prob` plus tie mass won by a uniform random tie-break.
    pub tie_resolved_prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl MonteCarloEstimate {
    pub fn from_successes(successes: u64, trials: u64) -> Self {
        let mean = successes as f64 / trials as f64;
        Self { mean, std_error: (mean * (1.0 - mean) / trials as f64).sqrt(), trials }
    }
}

/// Index of a maximal count, ties broken uniformly with `rng`. `None` when
/// every count is zero.
pub fn vote_counts<R: Rng + ?Sized>(counts: &[u32], rng: &mut R) -> Option<usize> {
    let max = counts.iter().copied().max().filter(|&m| m > 0)?;
    let modes = counts.iter().filter(|&&c| c == max).count();
    let pick = if modes == 1 { 0 } else { rng.gen_range(0..modes) };
    counts.iter().enumerate().filter(|(_, &c)| c == max).nth(pick).map(|(k, _)| k)
}

pub fn majority_vote(tally: &VoteTally, rng: &mut RandomStream) -> Result<LabelId> {
    vote_counts(tally.counts(), rng).map(LabelId).ok_or(Error::EmptyTally)
}

fn check_uniform_args(classes: usize, q: f64, votes: u32) -> Result<()> {
    if classes < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 classes, got {classes}")));
    }
    if votes == 0 {
        return Err(Error::InvalidArgument("need at least one vote".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("correct-label probability {q} outside [0, 1]")));
    }
    let other = (1.0 - q) / (classes - 1) as f64;
    if q < other - BOUNDARY_SLACK {
        return Err(Error::InvalidArgument(format!(
            "correct-label probability {q} is below the per-label noise {other}"
        )));
    }
    Ok(())
}

fn uniform_probs(classes: usize, q: f64) -> Vec<f64> {
    let mut probs = vec![(1.0 - q) / (classes - 1) as f64; classes];
    probs[0] = q;
    probs
}

fn enumerate_raw(probs: &[f64], correct: usize, votes: u32) -> MajorityProbResult {
    let mut strict = 0.0;
    let mut tie = 0.0;
    for_each_composition(votes, probs.len(), &mut |counts| {
        let mine = counts[correct];
        let mut best_other = 0;
        let mut level = 0;
        for (k, &c) in counts.iter().enumerate() {
            if k == correct {
                continue;
            }
            if c > best_other {
                best_other = c;
                level = 1;
            } else if c == best_other {
                level += 1;
            }
        }
        if mine > best_other {
            let pmf = multinomial_pmf_raw(counts, probs);
            strict += pmf;
            tie += pmf;
        } else if mine == best_other {
            tie += multinomial_pmf_raw(counts, probs) / (level + 1) as f64;
        }
    });
    MajorityProbResult { strict_prob: strict, tie_resolved_prob: tie }
}

/// Exact majority probabilities for an arbitrary label distribution by
/// summing the multinomial pmf over every tally of `votes` answers.
pub fn majority_prob_enumerated(p: &ProbabilityVector, votes: u32) -> Result<MajorityProbResult> {
    if votes == 0 {
        return Err(Error::InvalidArgument("need at least one vote".into()));
    }
    Ok(enumerate_raw(p.probs(), p.correct_index(), votes))
}

/// Conditional probabilities for uniform noise, shared across `q` and `v`.
///
/// Conditioning on the correct label's count `m`, the remaining `r = v - m`
/// answers are spread uniformly over the `l - 1` incorrect labels. For each
/// `m` the table holds `below[L'][r']`: the probability that `L'` labels
/// sharing `r'` uniform draws all stay strictly below `m`, built label by
/// label from binomial splits.
#[derive(Clone, Debug)]
pub struct MajorityTable {
    classes: usize,
    max_votes: u32,
    ln_fact: Vec<f64>,
    // below[m - 1] is a (L + 1) x (max_votes - m + 1) row-major grid
    below: Vec<Vec<f64>>,
}

impl MajorityTable {
    pub fn new(classes: usize, max_votes: u32) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 classes, got {classes}")));
        }
        if max_votes == 0 {
            return Err(Error::InvalidArgument("need at least one vote".into()));
        }
        let others = classes - 1;
        let max_rest = max_votes as usize - 1;
        let ln_fact: Vec<f64> = (0..=(max_votes as u64).max(classes as u64)).map(ln_factorial).collect();

        // split[L'][r' * (max_rest + 1) + n]: one of L' labels receives n of r' draws
        let stride = max_rest + 1;
        let split: Vec<Vec<f64>> = (0..=others)
            .map(|labels| {
                if labels == 0 {
                    return Vec::new();
                }
                let p = 1.0 / labels as f64;
                let mut grid = vec![0.0; stride * stride];
                for r in 0..=max_rest {
                    for n in 0..=r {
                        grid[r * stride + n] = binomial_pmf(r as u64, n as u64, p);
                    }
                }
                grid
            })
            .collect();

        let below = (1..=max_votes as usize)
            .map(|m| {
                let rest = max_votes as usize - m;
                let width = rest + 1;
                let mut grid = vec![0.0; (others + 1) * width];
                grid[0] = 1.0;
                for labels in 1..=others {
                    let (done, todo) = grid.split_at_mut(labels * width);
                    let prev = &done[(labels - 1) * width..];
                    let row = &mut todo[..width];
                    let split = &split[labels];
                    for r in 0..=rest {
                        let cap = r.min(m - 1);
                        let weights = &split[r * stride..r * stride + cap + 1];
                        row[r] = weights.iter().enumerate().map(|(n, &w)| w * prev[r - n]).sum();
                    }
                }
                grid
            })
            .collect();

        Ok(Self { classes, max_votes, ln_fact, below })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn max_votes(&self) -> u32 {
        self.max_votes
    }

    fn below(&self, m: usize, labels: usize, rest: usize) -> f64 {
        let width = self.max_votes as usize - m + 1;
        self.below[m - 1][labels * width + rest]
    }

    /// Conditional probabilities given the correct label received `m` of `votes`.
    fn conditional(&self, m: usize, votes: usize) -> (f64, f64) {
        let others = self.classes - 1;
        let rest = votes - m;
        let strict = self.below(m, others, rest);
        let mut tie = strict;
        let ln_l = (others as f64).ln();
        for t in 1..=others {
            if t * m > rest {
                break;
            }
            let left = rest - t * m;
            let free = others - t;
            if free == 0 && left > 0 {
                continue;
            }
            // t chosen labels land exactly on m, the rest share `left` below m
            let mut ln = self.ln_fact[rest] - t as f64 * self.ln_fact[m] - self.ln_fact[left] - (t * m) as f64 * ln_l;
            if left > 0 {
                ln += left as f64 * (free as f64 / others as f64).ln();
            }
            ln += self.ln_fact[others] - self.ln_fact[t] - self.ln_fact[free];
            tie += ln.exp() * self.below(m, free, left) / (t + 1) as f64;
        }
        (strict, tie)
    }

    pub fn probs(&self, q: f64, votes: u32) -> Result<MajorityProbResult> {
        check_uniform_args(self.classes, q, votes)?;
        if votes > self.max_votes {
            return Err(Error::InvalidArgument(format!(
                "table covers at most {} votes, asked for {votes}",
                self.max_votes
            )));
        }
        let v = votes as usize;
        let mut strict = 0.0;
        let mut tie = 0.0;
        for m in 1..=v {
            let weight = binomial_pmf(votes as u64, m as u64, q);
            if weight == 0.0 {
                continue;
            }
            let (s, t) = self.conditional(m, v);
            strict += weight * s;
            tie += weight * t;
        }
        Ok(MajorityProbResult { strict_prob: strict.min(1.0), tie_resolved_prob: tie.min(1.0) })
    }
}

/// Majority probabilities for uniform noise through the conditioning table.
pub fn majority_prob_dp(classes: usize, q: f64, votes: u32) -> Result<MajorityProbResult> {
    check_uniform_args(classes, q, votes)?;
    MajorityTable::new(classes, votes)?.probs(q, votes)
}

/// Exact probability that `votes` answers from a uniform-noise oracle with
/// correct-label probability `q` elect the correct label. Small cases sum over
/// every tally; large ones go through [`MajorityTable`].
pub fn strict_majority_prob_exact(classes: usize, q: f64, votes: u32) -> Result<MajorityProbResult> {
    check_uniform_args(classes, q, votes)?;
    if compositions_count(votes as u64, classes) <= ENUMERATION_LIMIT {
        Ok(enumerate_raw(&uniform_probs(classes, q), 0, votes))
    } else {
        majority_prob_dp(classes, q, votes)
    }
}

/// Simulated majority-vote accuracy: each trial queries a uniform-noise oracle
/// `votes` times and votes with a random tie-break.
pub fn majority_prob_mc(
    classes: usize,
    q: f64,
    votes: u32,
    trials: u64,
    rng: &mut RandomStream,
) -> Result<MonteCarloEstimate> {
    check_uniform_args(classes, q, votes)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let oracle = UniformNoiseOracle::new(classes, 1.0 - q)?;
    let mut counts = vec![0u32; classes];
    let mut hits = 0u64;
    for _ in 0..trials {
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..votes {
            counts[oracle.draw(0, rng)] += 1;
        }
        if vote_counts(&counts, rng) == Some(0) {
            hits += 1;
        }
    }
    Ok(MonteCarloEstimate::from_successes(hits, trials))
}

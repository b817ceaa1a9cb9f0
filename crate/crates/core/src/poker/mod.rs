//! Heads-up Texas Hold'em on a known flop. The hidden river makes "which hand
//! is better" a noisy label: each sampled river is one oracle answer, and the
//! exact equity over all rivers is the answer distribution.

mod card;
mod equity;
mod eval;

use rand::Rng;

pub use card::{check_distinct, parse_card, parse_cards, Card, Suit};
pub use equity::{exact_showdown_equity, sample_river, sample_showdown, showdown, Equity, ShowdownOutcome, RIVERS};
pub use eval::{evaluate5, evaluate7, HandCategory, HandRank};

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::RandomStream;
use crate::types::{Example, LabelId, ProbabilityVector};

/// Label 0 when the first hand wins the sampled showdown, 1 when the second
/// does. Tied showdowns are settled by a fair coin from the same stream, so
/// the answer distribution is the tie-split equity.
#[derive(Clone, Debug)]
pub struct PokerOracle {
    p1: [Card; 2],
    p2: [Card; 2],
    flop: [Card; 3],
    equity: Equity,
    probs: ProbabilityVector,
}

impl PokerOracle {
    pub fn new(p1: [Card; 2], p2: [Card; 2], flop: [Card; 3]) -> Result<Self> {
        let equity = exact_showdown_equity(p1, p2, flop)?;
        let (s1, s2) = (equity.p1_share(), equity.p2_share());
        if s1 == s2 {
            return Err(Error::BalancedMatchup);
        }
        let correct = if s1 > s2 { 0 } else { 1 };
        let probs = ProbabilityVector::new(vec![s1, s2], correct)?;
        Ok(Self { p1, p2, flop, equity, probs })
    }

    pub fn equity(&self) -> Equity {
        self.equity
    }

    pub fn probability_vector(&self) -> &ProbabilityVector {
        &self.probs
    }

    /// The label a majority of rivers favours.
    pub fn correct_label(&self) -> LabelId {
        LabelId(self.probs.correct_index())
    }

    pub fn answer(&self, rng: &mut RandomStream) -> Result<LabelId> {
        Ok(match sample_showdown(self.p1, self.p2, self.flop, rng)? {
            ShowdownOutcome::P1Wins => LabelId(0),
            ShowdownOutcome::P2Wins => LabelId(1),
            ShowdownOutcome::Tie => LabelId(if rng.gen_bool(0.5) { 0 } else { 1 }),
        })
    }
}

impl Oracle for PokerOracle {
    fn classes(&self) -> usize {
        2
    }

    fn query(&self, example: &Example, rng: &mut RandomStream) -> Result<LabelId> {
        if example.true_label.index() >= 2 {
            return Err(Error::LabelOutOfRange { label: example.true_label.index(), classes: 2 });
        }
        self.answer(rng)
    }
}

#[cfg(test)]
mod tests;

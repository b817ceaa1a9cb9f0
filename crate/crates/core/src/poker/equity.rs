use std::cmp::Ordering;

use rand::Rng;

use super::card::{check_distinct, Card};
use super::eval::best_of_seven;

/// Number of two-card completions of a flop with four hole cards dealt.
pub const RIVERS: u32 = 990;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShowdownOutcome {
    P1Wins,
    P2Wins,
    Tie,
}

/// Exact showdown counts over every river completing a flop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Equity {
    pub p1_wins: u32,
    pub p2_wins: u32,
    pub ties: u32,
    pub rivers: u32,
}

impl Equity {
    pub fn win1(&self) -> f64 {
        f64::from(self.p1_wins) / f64::from(self.rivers)
    }

    pub fn win2(&self) -> f64 {
        f64::from(self.p2_wins) / f64::from(self.rivers)
    }

    pub fn tie(&self) -> f64 {
        f64::from(self.ties) / f64::from(self.rivers)
    }

    /// Win probability with ties split evenly between the hands.
    pub fn p1_share(&self) -> f64 {
        (f64::from(self.p1_wins) + 0.5 * f64::from(self.ties)) / f64::from(self.rivers)
    }

    pub fn p2_share(&self) -> f64 {
        (f64::from(self.p2_wins) + 0.5 * f64::from(self.ties)) / f64::from(self.rivers)
    }

    pub fn swapped(self) -> Self {
        Self { p1_wins: self.p2_wins, p2_wins: self.p1_wins, ..self }
    }
}

/// The matchup with the board's known cards, validated for duplicates.
pub(crate) fn known_cards(p1: [Card; 2], p2: [Card; 2], flop: [Card; 3]) -> crate::Result<[Card; 7]> {
    let known = [p1[0], p1[1], p2[0], p2[1], flop[0], flop[1], flop[2]];
    check_distinct(&known)?;
    Ok(known)
}

fn remaining_deck(known: &[Card; 7]) -> Vec<Card> {
    Card::deck().filter(|c| !known.contains(c)).collect()
}

/// Compares both hands on a complete five-card board.
pub fn showdown(p1: [Card; 2], p2: [Card; 2], board: [Card; 5]) -> ShowdownOutcome {
    let seven = |hole: [Card; 2]| [hole[0], hole[1], board[0], board[1], board[2], board[3], board[4]];
    match best_of_seven(&seven(p1)).cmp(&best_of_seven(&seven(p2))) {
        Ordering::Greater => ShowdownOutcome::P1Wins,
        Ordering::Less => ShowdownOutcome::P2Wins,
        Ordering::Equal => ShowdownOutcome::Tie,
    }
}

/// Enumerates all 990 rivers that extend the flop.
pub fn exact_showdown_equity(p1: [Card; 2], p2: [Card; 2], flop: [Card; 3]) -> crate::Result<Equity> {
    let known = known_cards(p1, p2, flop)?;
    let rest = remaining_deck(&known);
    let mut equity = Equity { p1_wins: 0, p2_wins: 0, ties: 0, rivers: 0 };
    for (i, &turn) in rest.iter().enumerate() {
        for &river in &rest[i + 1..] {
            match showdown(p1, p2, [flop[0], flop[1], flop[2], turn, river]) {
                ShowdownOutcome::P1Wins => equity.p1_wins += 1,
                ShowdownOutcome::P2Wins => equity.p2_wins += 1,
                ShowdownOutcome::Tie => equity.ties += 1,
            }
            equity.rivers += 1;
        }
    }
    debug_assert_eq!(equity.rivers, RIVERS);
    Ok(equity)
}

/// Draws a uniformly random unordered pair from the 45 unseen cards.
pub fn sample_river<R: Rng + ?Sized>(
    p1: [Card; 2],
    p2: [Card; 2],
    flop: [Card; 3],
    rng: &mut R,
) -> crate::Result<[Card; 2]> {
    let rest = remaining_deck(&known_cards(p1, p2, flop)?);
    let a = rng.gen_range(0..rest.len());
    let mut b = rng.gen_range(0..rest.len() - 1);
    if b >= a {
        b += 1;
    }
    Ok([rest[a], rest[b]])
}

/// One sampled river and the resulting showdown.
pub fn sample_showdown<R: Rng + ?Sized>(
    p1: [Card; 2],
    p2: [Card; 2],
    flop: [Card; 3],
    rng: &mut R,
) -> crate::Result<ShowdownOutcome> {
    let [turn, river] = sample_river(p1, p2, flop, rng)?;
    Ok(showdown(p1, p2, [flop[0], flop[1], flop[2], turn, river]))
}

use super::card::{check_distinct, Card};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HandCategory {
    HighCard,
    Pair,
    TwoPair,
    Trips,
    Straight,
    Flush,
    FullHouse,
    Quads,
    StraightFlush,
}

/// Strength of a five-card poker hand. Ordering is category first, then the
/// tiebreak ranks (zero-padded), which yields the standard total order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HandRank {
    pub category: HandCategory,
    pub tiebreak: [u8; 5],
}

fn pad(ranks: &[u8]) -> [u8; 5] {
    let mut out = [0u8; 5];
    out[..ranks.len()].copy_from_slice(ranks);
    out
}

pub fn evaluate5(cards: &[Card; 5]) -> HandRank {
    let mut ranks: [u8; 5] = cards.map(Card::rank);
    ranks.sort_unstable_by(|a, b| b.cmp(a));
    let flush = cards.iter().all(|c| c.suit() == cards[0].suit());
    let distinct = ranks.windows(2).all(|w| w[0] != w[1]);
    let straight_high = if !distinct {
        None
    } else if ranks[0] - ranks[4] == 4 {
        Some(ranks[0])
    } else if ranks == [14, 5, 4, 3, 2] {
        Some(5)
    } else {
        None
    };

    if let Some(high) = straight_high {
        let category = if flush { HandCategory::StraightFlush } else { HandCategory::Straight };
        return HandRank { category, tiebreak: pad(&[high]) };
    }
    if flush {
        return HandRank { category: HandCategory::Flush, tiebreak: ranks };
    }

    // (count, rank) groups, biggest group first, then highest rank
    let mut groups: Vec<(u8, u8)> = Vec::with_capacity(5);
    for &r in &ranks {
        match groups.iter_mut().find(|(_, gr)| *gr == r) {
            Some(g) => g.0 += 1,
            None => groups.push((1, r)),
        }
    }
    groups.sort_unstable_by(|a, b| b.cmp(a));
    let order: Vec<u8> = groups.iter().map(|&(_, r)| r).collect();
    let category = match (groups[0].0, groups.get(1).map_or(0, |g| g.0)) {
        (4, _) => HandCategory::Quads,
        (3, 2) => HandCategory::FullHouse,
        (3, _) => HandCategory::Trips,
        (2, 2) => HandCategory::TwoPair,
        (2, _) => HandCategory::Pair,
        _ => HandCategory::HighCard,
    };
    HandRank { category, tiebreak: pad(&order) }
}

// The 21 ways to pick 5 of 7 positions.
const FIVE_OF_SEVEN: [[usize; 5]; 21] = {
    let mut out = [[0usize; 5]; 21];
    let mut n = 0;
    let mut skip_a = 0;
    while skip_a < 7 {
        let mut skip_b = skip_a + 1;
        while skip_b < 7 {
            let mut k = 0;
            let mut i = 0;
            while i < 7 {
                if i != skip_a && i != skip_b {
                    out[n][k] = i;
                    k += 1;
                }
                i += 1;
            }
            n += 1;
            skip_b += 1;
        }
        skip_a += 1;
    }
    out
};

pub(crate) fn best_of_seven(cards: &[Card; 7]) -> HandRank {
    FIVE_OF_SEVEN.iter().map(|pick| evaluate5(&pick.map(|i| cards[i]))).max().expect("21 subsets")
}

/// Best five-card hand among seven distinct cards.
pub fn evaluate7(cards: &[Card]) -> Result<HandRank> {
    let cards: &[Card; 7] = cards.try_into().map_err(|_| Error::WrongCardCount { expected: 7, actual: cards.len() })?;
    check_distinct(cards)?;
    Ok(best_of_seven(cards))
}

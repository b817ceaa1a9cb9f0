use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suit {
    Spades,
    Hearts,
    Diamonds,
    Clubs,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Spades, Suit::Hearts, Suit::Diamonds, Suit::Clubs];

    fn symbol(self) -> char {
        match self {
            Suit::Spades => 's',
            Suit::Hearts => 'h',
            Suit::Diamonds => 'd',
            Suit::Clubs => 'c',
        }
    }
}

/// A playing card; rank runs 2..=14 with the ace high.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Card {
    rank: u8,
    suit: Suit,
}

impl Card {
    pub fn new(rank: u8, suit: Suit) -> Result<Self> {
        if !(2..=14).contains(&rank) {
            return Err(Error::InvalidCard(format!("rank {rank}")));
        }
        Ok(Self { rank, suit })
    }

    pub fn rank(self) -> u8 {
        self.rank
    }

    pub fn suit(self) -> Suit {
        self.suit
    }

    /// Dense index in `0..52`.
    pub fn index(self) -> usize {
        (self.rank as usize - 2) * 4 + self.suit as usize
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < 52, "card index {index} out of range");
        Self { rank: (index / 4) as u8 + 2, suit: Suit::ALL[index % 4] }
    }

    pub fn deck() -> impl Iterator<Item = Card> {
        (0..52).map(Card::from_index)
    }
}

const RANK_SYMBOLS: &[u8; 13] = b"23456789TJQKA";

impl FromStr for Card {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return Err(Error::InvalidCard(s.to_string()));
        }
        let rank = RANK_SYMBOLS.iter().position(|&c| c == bytes[0]).ok_or_else(|| Error::InvalidCard(s.to_string()))?
            as u8
            + 2;
        let suit = match bytes[1] {
            b's' => Suit::Spades,
            b'h' => Suit::Hearts,
            b'd' => Suit::Diamonds,
            b'c' => Suit::Clubs,
            _ => return Err(Error::InvalidCard(s.to_string())),
        };
        Ok(Self { rank, suit })
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", RANK_SYMBOLS[self.rank as usize - 2] as char, self.suit.symbol())
    }
}

pub fn parse_card(text: &str) -> Result<Card> {
    text.parse()
}

/// Parses whitespace-separated cards, e.g. `"Qh Js"`.
pub fn parse_cards(text: &str) -> Result<Vec<Card>> {
    text.split_whitespace().map(parse_card).collect()
}

/// Fails on the first card that appears twice.
pub fn check_distinct(cards: &[Card]) -> Result<()> {
    let mut seen = 0u64;
    for c in cards {
        let bit = 1u64 << c.index();
        if seen & bit != 0 {
            return Err(Error::DuplicateCard(c.to_string()));
        }
        seen |= bit;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_card("Qh").unwrap(), Card::new(12, Suit::Hearts).unwrap());
        assert_eq!(parse_card("As").unwrap(), Card::new(14, Suit::Spades).unwrap());
        assert_eq!(parse_card("Td").unwrap().rank(), 10);
        for bad in ["1x", "", "Q", "Qhh", "qh", "Qx", "10h"] {
            assert!(parse_card(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formatting_round_trips_whole_deck() {
        let deck: Vec<Card> = Card::deck().collect();
        assert_eq!(deck.len(), 52);
        for (i, c) in deck.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(parse_card(&c.to_string()).unwrap(), *c);
        }
        check_distinct(&deck).unwrap();
    }

    #[test]
    fn detects_duplicates() {
        let cards = parse_cards("Qh Js Qh").unwrap();
        assert!(matches!(check_distinct(&cards), Err(Error::DuplicateCard(c)) if c == "Qh"));
        assert!(Card::new(1, Suit::Clubs).is_err());
        assert!(Card::new(15, Suit::Clubs).is_err());
    }
}

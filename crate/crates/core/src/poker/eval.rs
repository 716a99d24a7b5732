//! Five-to-seven-card poker hand evaluation.

use thiserror::Error;

use crate::cards::{Card, Rank};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PokerEvalError {
    #[error("expected 5 to 7 cards, got {0}")]
    BadCardCount(usize),
    #[error("duplicate card {0:?}")]
    DuplicateCard(Card),
    #[error("{0:?} is not a plain french card")]
    NonStandardCard(Card),
}

/// Hand categories in ascending strength, so the derived order is the poker
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HandCategory {
    HighCard,
    OnePair,
    TwoPair,
    ThreeOfAKind,
    Straight,
    Flush,
    FullHouse,
    FourOfAKind,
    StraightFlush,
    RoyalFlush,
}

pub const ALL_HAND_CATEGORIES: [HandCategory; 10] = [
    HandCategory::HighCard,
    HandCategory::OnePair,
    HandCategory::TwoPair,
    HandCategory::ThreeOfAKind,
    HandCategory::Straight,
    HandCategory::Flush,
    HandCategory::FullHouse,
    HandCategory::FourOfAKind,
    HandCategory::StraightFlush,
    HandCategory::RoyalFlush,
];

/// Comparable strength of a 5-card hand: category first, then the group
/// ranks that break ties (pair rank before kickers, and so on), zero-padded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HandRank {
    pub category: HandCategory,
    tiebreak: [u8; 5],
}

impl HandRank {
    /// Tiebreak ranks in comparison order (highest significance first).
    pub fn tiebreak(&self) -> impl Iterator<Item = Rank> + '_ {
        self.tiebreak
            .iter()
            .take_while(|v| **v != 0)
            .map(|v| from_poker_value(*v))
    }
}

/// Ace-high numeric value: 2..14.
fn poker_value(rank: Rank) -> u8 {
    match rank {
        Rank::Ace => 14,
        r => r.index() as u8 + 1,
    }
}

fn from_poker_value(v: u8) -> Rank {
    match v {
        14 => Rank::Ace,
        v => Rank::from_index(v as usize - 1),
    }
}

/// If the five distinct values form a straight, its high value (5 for the
/// wheel A-2-3-4-5).
fn straight_high(values: &[u8; 5]) -> Option<u8> {
    let mut v = *values;
    v.sort_unstable();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    if v[4] - v[0] == 4 {
        return Some(v[4]);
    }
    if v == [2, 3, 4, 5, 14] {
        return Some(5);
    }
    None
}

fn rank_five(cards: &[Card; 5]) -> HandRank {
    let mut values = [0u8; 5];
    let mut suits = [0u8; 5];
    for (i, card) in cards.iter().enumerate() {
        match card {
            Card::Standard { suit, rank } => {
                values[i] = poker_value(*rank);
                suits[i] = suit.ch() as u8;
            }
            _ => unreachable!("callers validate cards"),
        }
    }
    let is_flush = suits.iter().all(|s| *s == suits[0]);
    let straight = straight_high(&values);

    // Distinct values ordered by (multiplicity, value) descending: the
    // group order is exactly the tiebreak order for every category.
    let mut counts = [0u8; 15];
    for v in values {
        counts[v as usize] += 1;
    }
    let mut groups: Vec<(u8, u8)> = (2..=14u8)
        .filter(|v| counts[*v as usize] > 0)
        .map(|v| (counts[v as usize], v))
        .collect();
    groups.sort_unstable_by(|a, b| b.cmp(a));

    let signature: Vec<u8> = groups.iter().map(|(n, _)| *n).collect();
    let category = match (signature.as_slice(), is_flush, straight) {
        (_, true, Some(14)) => HandCategory::RoyalFlush,
        (_, true, Some(_)) => HandCategory::StraightFlush,
        ([4, 1], _, _) => HandCategory::FourOfAKind,
        ([3, 2], _, _) => HandCategory::FullHouse,
        (_, true, None) => HandCategory::Flush,
        (_, false, Some(_)) => HandCategory::Straight,
        ([3, 1, 1], _, _) => HandCategory::ThreeOfAKind,
        ([2, 2, 1], _, _) => HandCategory::TwoPair,
        ([2, 1, 1, 1], _, _) => HandCategory::OnePair,
        _ => HandCategory::HighCard,
    };

    let mut tiebreak = [0u8; 5];
    match category {
        HandCategory::Straight | HandCategory::StraightFlush | HandCategory::RoyalFlush => {
            tiebreak[0] = straight.unwrap();
        }
        _ => {
            for (slot, (_, v)) in tiebreak.iter_mut().zip(&groups) {
                *slot = *v;
            }
        }
    }
    HandRank { category, tiebreak }
}

/// Rank the best 5-card hand choosable from 5, 6, or 7 distinct cards.
pub fn evaluate_hand(cards: &[Card]) -> Result<HandRank, PokerEvalError> {
    if !(5..=7).contains(&cards.len()) {
        return Err(PokerEvalError::BadCardCount(cards.len()));
    }
    for (i, card) in cards.iter().enumerate() {
        if !matches!(card, Card::Standard { .. }) {
            return Err(PokerEvalError::NonStandardCard(*card));
        }
        if cards[..i].contains(card) {
            return Err(PokerEvalError::DuplicateCard(*card));
        }
    }
    let n = cards.len();
    let mut best: Option<HandRank> = None;
    let mut pick = [0usize; 5];
    // All 5-subsets of n cards (at most C(7,5) = 21).
    fn subsets(
        cards: &[Card],
        pick: &mut [usize; 5],
        depth: usize,
        start: usize,
        best: &mut Option<HandRank>,
    ) {
        if depth == 5 {
            let five = [
                cards[pick[0]],
                cards[pick[1]],
                cards[pick[2]],
                cards[pick[3]],
                cards[pick[4]],
            ];
            let rank = rank_five(&five);
            if best.map_or(true, |b| rank > b) {
                *best = Some(rank);
            }
            return;
        }
        for i in start..cards.len() - (4 - depth) {
            pick[depth] = i;
            subsets(cards, pick, depth + 1, i + 1, best);
        }
    }
    let _ = n;
    subsets(cards, &mut pick, 0, 0, &mut best);
    Ok(best.expect("at least one 5-subset"))
}

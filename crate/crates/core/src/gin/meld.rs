//! Meld enumeration and the minimum-deadwood optimizer for Gin Rummy.
//! Ace is low: A-2-3 is a run, Q-K-A is not.

use thiserror::Error;

use crate::cards::{Card, ALL_SUITS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GinError {
    #[error("expected a 10- or 11-card hand, got {0}")]
    BadHandSize(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeldKind {
    Set,
    Run,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meld {
    pub kind: MeldKind,
    pub cards: Vec<Card>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadwoodResult {
    pub melds: Vec<Meld>,
    pub deadwood: Vec<Card>,
    pub count: u32,
}

fn card_value(card: &Card) -> u32 {
    card.rank().expect("french card").deadwood_value()
}

/// All sets (3–4 of a rank) and runs (3+ consecutive, one suit) present in
/// the hand, as index masks into `hand`.
fn candidate_melds(hand: &[Card]) -> Vec<(u16, MeldKind)> {
    let mut melds = Vec::new();

    // Sets: every 3-card subset of a rank group, plus the 4-card group.
    for rank_idx in 0..13 {
        let members: Vec<usize> = hand
            .iter()
            .enumerate()
            .filter(|(_, c)| c.rank().map(|r| r.index()) == Some(rank_idx))
            .map(|(i, _)| i)
            .collect();
        if members.len() >= 3 {
            for skip in 0..members.len() {
                let mask = members
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| members.len() == 3 || *k != skip)
                    .fold(0u16, |m, (_, i)| m | 1 << i);
                melds.push((mask, MeldKind::Set));
                if members.len() == 3 {
                    break;
                }
            }
            if members.len() == 4 {
                let mask = members.iter().fold(0u16, |m, i| m | 1 << i);
                melds.push((mask, MeldKind::Set));
            }
        }
    }

    // Runs: maximal consecutive segments per suit, then every sub-segment.
    for suit in ALL_SUITS {
        let mut by_rank: [Option<usize>; 13] = [None; 13];
        for (i, card) in hand.iter().enumerate() {
            if card.suit() == Some(suit) {
                by_rank[card.rank().unwrap().index()] = Some(i);
            }
        }
        let mut start = 0;
        while start < 13 {
            if by_rank[start].is_none() {
                start += 1;
                continue;
            }
            let mut end = start;
            while end + 1 < 13 && by_rank[end + 1].is_some() {
                end += 1;
            }
            for lo in start..=end {
                for hi in lo + 2..=end {
                    let mask = (lo..=hi).fold(0u16, |m, r| m | 1 << by_rank[r].unwrap());
                    melds.push((mask, MeldKind::Run));
                }
            }
            start = end + 1;
        }
    }
    melds
}

fn mask_to_meld(hand: &[Card], mask: u16, kind: MeldKind) -> Meld {
    let mut cards: Vec<Card> = (0..hand.len())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| hand[i])
        .collect();
    cards.sort();
    Meld { kind, cards }
}

/// Globally minimal deadwood over all disjoint meld selections.
pub fn min_deadwood(hand: &[Card]) -> Result<DeadwoodResult, GinError> {
    if !(hand.len() == 10 || hand.len() == 11) {
        return Err(GinError::BadHandSize(hand.len()));
    }
    Ok(min_deadwood_any(hand))
}

/// Same optimizer without the hand-size gate (used internally on the
/// defender's post-layoff cards and in tests).
pub fn min_deadwood_any(hand: &[Card]) -> DeadwoodResult {
    let melds = candidate_melds(hand);
    let total: u32 = hand.iter().map(card_value).sum();

    let mut best_value = total;
    let mut best_pick: Vec<usize> = Vec::new();
    let mut pick = Vec::new();

    fn dfs(
        melds: &[(u16, MeldKind)],
        hand: &[Card],
        index: usize,
        used: u16,
        melded_value: u32,
        total: u32,
        pick: &mut Vec<usize>,
        best_value: &mut u32,
        best_pick: &mut Vec<usize>,
    ) {
        if total - melded_value < *best_value {
            *best_value = total - melded_value;
            *best_pick = pick.clone();
        }
        for i in index..melds.len() {
            let (mask, _) = melds[i];
            if mask & used != 0 {
                continue;
            }
            let gain: u32 = (0..hand.len())
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| card_value(&hand[b]))
                .sum();
            pick.push(i);
            dfs(
                melds,
                hand,
                i + 1,
                used | mask,
                melded_value + gain,
                total,
                pick,
                best_value,
                best_pick,
            );
            pick.pop();
        }
    }
    dfs(
        &melds, hand, 0, 0, 0, total, &mut pick, &mut best_value, &mut best_pick,
    );

    let mut used = 0u16;
    let chosen: Vec<Meld> = best_pick
        .iter()
        .map(|i| {
            used |= melds[*i].0;
            mask_to_meld(hand, melds[*i].0, melds[*i].1)
        })
        .collect();
    let mut deadwood: Vec<Card> = (0..hand.len())
        .filter(|i| used & (1 << i) == 0)
        .map(|i| hand[i])
        .collect();
    deadwood.sort();
    DeadwoodResult {
        melds: chosen,
        deadwood,
        count: best_value,
    }
}

/// Defender layoff: extend the knocker's melds with deadwood cards until no
/// card fits. Returns (cards laid off, remaining deadwood count).
pub fn lay_off(knocker_melds: &[Meld], defender_deadwood: &[Card]) -> (Vec<Card>, u32) {
    let mut melds: Vec<Meld> = knocker_melds.to_vec();
    let mut remaining: Vec<Card> = defender_deadwood.to_vec();
    remaining.sort();
    let mut laid: Vec<Card> = Vec::new();
    loop {
        let mut moved = None;
        'outer: for (ci, card) in remaining.iter().enumerate() {
            for meld in melds.iter_mut() {
                if extends(meld, card) {
                    meld.cards.push(*card);
                    meld.cards.sort();
                    moved = Some(ci);
                    break 'outer;
                }
            }
        }
        match moved {
            Some(ci) => laid.push(remaining.remove(ci)),
            None => break,
        }
    }
    let count = remaining.iter().map(card_value).sum();
    (laid, count)
}

fn extends(meld: &Meld, card: &Card) -> bool {
    match meld.kind {
        MeldKind::Set => {
            meld.cards.len() < 4 && meld.cards[0].rank() == card.rank()
        }
        MeldKind::Run => {
            if meld.cards[0].suit() != card.suit() {
                return false;
            }
            let indices: Vec<usize> =
                meld.cards.iter().map(|c| c.rank().unwrap().index()).collect();
            let idx = card.rank().unwrap().index();
            let lo = *indices.iter().min().unwrap();
            let hi = *indices.iter().max().unwrap();
            idx + 1 == lo || idx == hi + 1
        }
    }
}

/// Deadwood total of an arbitrary card list (no melding).
pub fn raw_value(cards: &[Card]) -> u32 {
    cards.iter().map(card_value).sum()
}

/// Convenience used by tests and heuristics.
pub fn run_or_set(cards: &[Card]) -> Option<MeldKind> {
    if cards.len() < 3 {
        return None;
    }
    let mut sorted = cards.to_vec();
    sorted.sort();
    if sorted.iter().all(|c| c.rank() == sorted[0].rank()) && sorted.len() <= 4 {
        return Some(MeldKind::Set);
    }
    let same_suit = sorted.iter().all(|c| c.suit() == sorted[0].suit());
    let consecutive = sorted
        .windows(2)
        .all(|w| w[1].rank().unwrap().index() == w[0].rank().unwrap().index() + 1);
    if same_suit && consecutive {
        return Some(MeldKind::Run);
    }
    None
}

//! Dou Dizhu combination taxonomy: classification of a played card set,
//! enumeration of all moves available from a hand, and the beats relation.
//!
//! Cards are the integer encoding used on the wire: 3-14 for ranks 3
//! through ace, 17 for 2, 20 for the black joker, 30 for the red joker.

use std::collections::HashSet;

/// Wire integers in rank order. Index into this table is the comparison
/// order: 3 < 4 < ... < A < 2 < black joker < red joker.
pub const DOU_RANK_INTS: [u8; 15] = [3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 17, 20, 30];

/// Highest rank index eligible for chains: ace. 2 and the jokers are
/// non-consecutive.
const CHAIN_TOP: usize = 11;
const BLACK_JOKER: usize = 13;
const RED_JOKER: usize = 14;

pub fn dou_rank_index(card: u8) -> Option<usize> {
    DOU_RANK_INTS.iter().position(|c| *c == card)
}

type Counts = [u8; 15];

fn counts_of(cards: &[u8]) -> Option<Counts> {
    let mut counts = [0u8; 15];
    for card in cards {
        counts[dou_rank_index(*card)?] += 1;
    }
    if counts[BLACK_JOKER] > 1 || counts[RED_JOKER] > 1 {
        return None;
    }
    Some(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DouCategory {
    Solo,
    SoloChain,
    Pair,
    PairChain,
    Trio,
    TrioChain,
    TrioWithSolo,
    TrioChainWithSolo,
    TrioWithPair,
    TrioChainWithPair,
    Bomb,
    Rocket,
    FourWithDualSolo,
    FourWithDualPair,
}

/// A single playable combination. `primal` is the rank index of the
/// highest primal card (chain top, trio rank, quad rank); kickers never
/// participate in comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DouCombo {
    pub category: DouCategory,
    pub primal: usize,
    pub length: usize,
    pub cards: Vec<u8>,
    pub kickers: Vec<u8>,
}

impl DouCombo {
    fn new(category: DouCategory, primal: usize, length: usize, mut cards: Vec<u8>, mut kickers: Vec<u8>) -> Self {
        cards.sort_unstable();
        kickers.sort_unstable();
        DouCombo { category, primal, length, cards, kickers }
    }
}

/// True when `a` may be played on top of `b`.
pub fn compare_dou(a: &DouCombo, b: &DouCombo) -> bool {
    match (a.category, b.category) {
        (DouCategory::Rocket, _) => true,
        (_, DouCategory::Rocket) => false,
        (DouCategory::Bomb, DouCategory::Bomb) => a.primal > b.primal,
        (DouCategory::Bomb, _) => true,
        (_, DouCategory::Bomb) => false,
        (x, y) => x == y && a.length == b.length && a.primal > b.primal,
    }
}

/// Every move playable from `hand`: all combos when leading, or the
/// beating combos when `last` is the move to follow. Interpretations that
/// share a card multiset are deduplicated in favour of the earliest
/// category (so a pure chain wins over an airplane reading of the same
/// cards); passing is handled by the caller.
pub fn enumerate_dou_moves(hand: &[u8], last: Option<&DouCombo>) -> Vec<DouCombo> {
    let Some(counts) = counts_of(hand) else {
        return Vec::new();
    };
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    gen_all(&counts)
        .into_iter()
        .filter(|combo| last.is_none_or(|prev| compare_dou(combo, prev)))
        .filter(|combo| seen.insert(combo.cards.clone()))
        .collect()
}

/// Every valid reading of an exact card set. Most sets have one; a few
/// (e.g. four consecutive trios) read as both a pure chain and an
/// airplane with wings, and follow rules differ between readings.
pub fn classify_dou(cards: &[u8]) -> Vec<DouCombo> {
    let Some(counts) = counts_of(cards) else {
        return Vec::new();
    };
    gen_all(&counts)
        .into_iter()
        .filter(|combo| combo.cards.len() == cards.len())
        .collect()
}

/// All combos constructible from a count vector, in canonical order:
/// category declaration order, then ascending primal.
fn gen_all(counts: &Counts) -> Vec<DouCombo> {
    let mut out = Vec::new();
    let repeat = |idx: usize, n: usize| vec![DOU_RANK_INTS[idx]; n];

    for idx in 0..15 {
        if counts[idx] >= 1 {
            out.push(DouCombo::new(DouCategory::Solo, idx, 1, repeat(idx, 1), vec![]));
        }
    }
    push_chains(counts, 1, 5, 12, DouCategory::SoloChain, &mut out);
    for idx in 0..15 {
        if counts[idx] >= 2 {
            out.push(DouCombo::new(DouCategory::Pair, idx, 1, repeat(idx, 2), vec![]));
        }
    }
    push_chains(counts, 2, 3, 10, DouCategory::PairChain, &mut out);
    for idx in 0..15 {
        if counts[idx] >= 3 {
            out.push(DouCombo::new(DouCategory::Trio, idx, 1, repeat(idx, 3), vec![]));
        }
    }
    push_chains(counts, 3, 2, 6, DouCategory::TrioChain, &mut out);

    for trio in 0..15 {
        if counts[trio] < 3 {
            continue;
        }
        for kick in 0..15 {
            if kick == trio || counts[kick] == 0 {
                continue;
            }
            let mut cards = repeat(trio, 3);
            cards.push(DOU_RANK_INTS[kick]);
            out.push(DouCombo::new(DouCategory::TrioWithSolo, trio, 1, cards, repeat(kick, 1)));
        }
    }
    push_airplanes(counts, false, &mut out);
    for trio in 0..15 {
        if counts[trio] < 3 {
            continue;
        }
        for kick in 0..15 {
            if kick == trio || counts[kick] < 2 {
                continue;
            }
            let mut cards = repeat(trio, 3);
            cards.extend(repeat(kick, 2));
            out.push(DouCombo::new(DouCategory::TrioWithPair, trio, 1, cards, repeat(kick, 2)));
        }
    }
    push_airplanes(counts, true, &mut out);

    for idx in 0..15 {
        if counts[idx] == 4 {
            out.push(DouCombo::new(DouCategory::Bomb, idx, 1, repeat(idx, 4), vec![]));
        }
    }
    if counts[BLACK_JOKER] == 1 && counts[RED_JOKER] == 1 {
        let cards = vec![DOU_RANK_INTS[BLACK_JOKER], DOU_RANK_INTS[RED_JOKER]];
        out.push(DouCombo::new(DouCategory::Rocket, RED_JOKER, 1, cards, vec![]));
    }

    for quad in 0..15 {
        if counts[quad] != 4 {
            continue;
        }
        let mut outside = *counts;
        outside[quad] = 0;
        for wings in solo_wing_multisets(&outside, 2) {
            // The two loose kickers may share a rank but may not be the
            // joker pair: that would bury a Rocket.
            if wings == [BLACK_JOKER, RED_JOKER] {
                continue;
            }
            let mut cards = repeat(quad, 4);
            let kickers: Vec<u8> = wings.iter().map(|w| DOU_RANK_INTS[*w]).collect();
            cards.extend(&kickers);
            out.push(DouCombo::new(DouCategory::FourWithDualSolo, quad, 1, cards, kickers));
        }
        for hi in 0..15 {
            for lo in 0..hi {
                if outside[hi] >= 2 && outside[lo] >= 2 {
                    let mut cards = repeat(quad, 4);
                    let kickers = [repeat(lo, 2), repeat(hi, 2)].concat();
                    cards.extend(&kickers);
                    out.push(DouCombo::new(DouCategory::FourWithDualPair, quad, 1, cards, kickers));
                }
            }
        }
    }
    out
}

fn push_chains(counts: &Counts, copies: u8, min_len: usize, max_len: usize, category: DouCategory, out: &mut Vec<DouCombo>) {
    for len in min_len..=max_len {
        for start in 0..=CHAIN_TOP.saturating_sub(len - 1) {
            let window = start..start + len;
            if window.clone().all(|idx| counts[idx] >= copies) {
                let cards: Vec<u8> = window
                    .clone()
                    .flat_map(|idx| std::iter::repeat_n(DOU_RANK_INTS[idx], copies as usize))
                    .collect();
                out.push(DouCombo::new(category, start + len - 1, len, cards, vec![]));
            }
        }
    }
}

/// Airplanes: consecutive trios plus one wing per trio. Solo wings are any
/// cards outside the trio ranks (repeats allowed); pair wings are distinct
/// pair ranks outside the trio ranks.
fn push_airplanes(counts: &Counts, pair_wings: bool, out: &mut Vec<DouCombo>) {
    let (category, max_len) = if pair_wings {
        (DouCategory::TrioChainWithPair, 4)
    } else {
        (DouCategory::TrioChainWithSolo, 5)
    };
    for len in 2..=max_len {
        for start in 0..=CHAIN_TOP - (len - 1) {
            let window = start..start + len;
            if !window.clone().all(|idx| counts[idx] >= 3) {
                continue;
            }
            let mut outside = *counts;
            for idx in window.clone() {
                outside[idx] = 0;
            }
            let trios: Vec<u8> = window
                .clone()
                .flat_map(|idx| std::iter::repeat_n(DOU_RANK_INTS[idx], 3))
                .collect();
            if pair_wings {
                for picks in distinct_pair_wings(&outside, len) {
                    let kickers: Vec<u8> = picks.iter().flat_map(|p| vec![DOU_RANK_INTS[*p]; 2]).collect();
                    let cards = [trios.clone(), kickers.clone()].concat();
                    out.push(DouCombo::new(category, start + len - 1, len, cards, kickers));
                }
            } else {
                for wings in solo_wing_multisets(&outside, len) {
                    let kickers: Vec<u8> = wings.iter().map(|w| DOU_RANK_INTS[*w]).collect();
                    let cards = [trios.clone(), kickers.clone()].concat();
                    out.push(DouCombo::new(category, start + len - 1, len, cards, kickers));
                }
            }
        }
    }
}

/// Multisets of `size` rank indices drawn from the availability vector.
fn solo_wing_multisets(avail: &Counts, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn walk(avail: &Counts, idx: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        if idx >= 15 {
            return;
        }
        let take_max = (avail[idx] as usize).min(left);
        for take in (0..=take_max).rev() {
            for _ in 0..take {
                current.push(idx);
            }
            walk(avail, idx + 1, left - take, current, out);
            for _ in 0..take {
                current.pop();
            }
        }
    }
    walk(avail, 0, size, &mut current, &mut out);
    out.sort_unstable();
    out
}

/// Combinations of `size` distinct ranks that can each supply a pair.
fn distinct_pair_wings(avail: &Counts, size: usize) -> Vec<Vec<usize>> {
    let eligible: Vec<usize> = (0..15).filter(|idx| avail[*idx] >= 2).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn walk(eligible: &[usize], from: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for pos in from..eligible.len() {
            current.push(eligible[pos]);
            walk(eligible, pos + 1, left - 1, current, out);
            current.pop();
        }
    }
    walk(&eligible, 0, size, &mut current, &mut out);
    out
}

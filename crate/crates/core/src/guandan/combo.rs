//! Guandan combination logic: the eight playable types, level/wild-card
//! handling, enumeration with wild substitution, the beats relation, and
//! validation of the `[Type, Rank, Cards]` wire form.
//!
//! Rank order is 2 low through A high, except that cards of the current
//! level rank sit above aces and below the jokers. The two hearts of the
//! level rank are wild: they substitute for any non-joker card inside a
//! multi-card combination, but a lone wild is just a level-rank single.
//! Sequences (straights, tubes, plates) are built and compared by natural
//! position, with the ace usable low or high.

use std::collections::HashSet;

use crate::cards::{Card, Rank, Suit};

const SUITS: [Suit; 4] = [Suit::Spade, Suit::Heart, Suit::Club, Suit::Diamond];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuanType {
    Single,
    Pair,
    Trips,
    ThreePair,
    ThreeWithTwo,
    TripsPair,
    Straight,
    Boom,
}

impl GuanType {
    pub fn as_str(&self) -> &'static str {
        match self {
            GuanType::Single => "Single",
            GuanType::Pair => "Pair",
            GuanType::Trips => "Trips",
            GuanType::ThreePair => "ThreePair",
            GuanType::ThreeWithTwo => "ThreeWithTwo",
            GuanType::TripsPair => "TripsPair",
            GuanType::Straight => "Straight",
            GuanType::Boom => "Boom",
        }
    }

    pub fn from_str(text: &str) -> Option<GuanType> {
        Some(match text {
            "Single" => GuanType::Single,
            "Pair" => GuanType::Pair,
            "Trips" => GuanType::Trips,
            "ThreePair" => GuanType::ThreePair,
            "ThreeWithTwo" => GuanType::ThreeWithTwo,
            "TripsPair" => GuanType::TripsPair,
            "Straight" => GuanType::Straight,
            "Boom" => GuanType::Boom,
            _ => return None,
        })
    }
}

/// The level in force for the current deal; the two hearts of this rank
/// are the wild cards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelContext {
    pub current: Rank,
}

impl LevelContext {
    pub fn new(current: Rank) -> Self {
        LevelContext { current }
    }

    pub fn is_wild(&self, card: &Card) -> bool {
        matches!(card, Card::Standard { suit: Suit::Heart, rank } if *rank == self.current)
    }

    pub fn wild_card(&self) -> Card {
        Card::std(Suit::Heart, self.current)
    }

    /// Comparison order for set-type combos: 2..A are 0..12, the level
    /// rank is lifted to 13, jokers are 14 and 15.
    fn rank_order(&self, rank: Rank) -> u8 {
        if rank == self.current {
            13
        } else {
            nat_idx(rank) as u8
        }
    }

    pub fn card_order(&self, card: &Card) -> u8 {
        match card {
            Card::Standard { rank, .. } => self.rank_order(*rank),
            Card::BlackJoker => 14,
            Card::RedJoker => 15,
            _ => 0,
        }
    }

    /// Sort key for hands and canonical card lists.
    pub fn sort_key(&self, card: &Card) -> (u8, u8) {
        let suit = match card.suit() {
            Some(s) => SUITS.iter().position(|x| *x == s).unwrap() as u8,
            None => 4,
        };
        (self.card_order(card), suit)
    }
}

/// Natural index of a standard rank: 2 -> 0 .. A -> 12.
fn nat_idx(rank: Rank) -> usize {
    match rank {
        Rank::Ace => 12,
        other => other.index() - 1,
    }
}

fn rank_at_nat(idx: usize) -> Rank {
    if idx == 12 {
        Rank::Ace
    } else {
        Rank::from_index(idx + 1)
    }
}

/// Sequence positions 1..=14; the ace occupies both ends.
fn rank_at_seq(pos: usize) -> Rank {
    match pos {
        1 | 14 => Rank::Ace,
        p => rank_at_nat(p - 2),
    }
}

fn seq_pos_of_top(ch: char) -> Option<usize> {
    let rank = Rank::from_ch(ch)?;
    Some(match rank {
        Rank::Ace => 14,
        r => nat_idx(r) + 2,
    })
}

fn rank_ch_at_seq(pos: usize) -> char {
    rank_at_seq(pos).ch()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuanCombo {
    pub ty: GuanType,
    pub rank_ch: char,
    pub cards: Vec<Card>,
    pub wildcards_used: u8,
    pub straight_flush: bool,
    pub joker_bomb: bool,
}

impl GuanCombo {
    fn finish(mut self, ctx: &LevelContext) -> Self {
        self.cards.sort_by_key(|c| ctx.sort_key(c));
        self.wildcards_used = self.cards.iter().filter(|c| ctx.is_wild(c)).count() as u8;
        self
    }

    pub fn is_bomb(&self) -> bool {
        self.joker_bomb || self.straight_flush || self.ty == GuanType::Boom
    }

    /// Bomb strength: tier first (4-bomb, 5-bomb, straight flush, 6..10
    /// bombs, joker bomb), then rank within the tier.
    fn bomb_strength(&self, ctx: &LevelContext) -> Option<(u8, u8)> {
        if self.joker_bomb {
            return Some((9, 0));
        }
        if self.straight_flush {
            return Some((2, seq_pos_of_top(self.rank_ch).unwrap_or(0) as u8));
        }
        if self.ty == GuanType::Boom {
            let tier = match self.cards.len() {
                4 => 0,
                5 => 1,
                n => n as u8 - 3, // 6 -> 3 .. 10 -> 7
            };
            let rank = Rank::from_ch(self.rank_ch)?;
            return Some((tier, ctx.rank_order(rank)));
        }
        None
    }

    /// Comparison key among equal non-bomb types. Set types use level
    /// order; sequences use the natural position of their top card.
    fn normal_key(&self, ctx: &LevelContext) -> u8 {
        match self.ty {
            GuanType::Single | GuanType::Pair | GuanType::Trips | GuanType::ThreeWithTwo => match self.rank_ch {
                'B' => 14,
                'R' => 15,
                ch => Rank::from_ch(ch).map(|r| ctx.rank_order(r)).unwrap_or(0),
            },
            GuanType::ThreePair | GuanType::TripsPair | GuanType::Straight => {
                seq_pos_of_top(self.rank_ch).unwrap_or(0) as u8
            }
            GuanType::Boom => 0,
        }
    }
}

/// True when `a` may be played on top of `b`.
pub fn compare_guan(a: &GuanCombo, b: &GuanCombo, ctx: &LevelContext) -> bool {
    match (a.bomb_strength(ctx), b.bomb_strength(ctx)) {
        (Some(sa), Some(sb)) => sa > sb,
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (None, None) => a.ty == b.ty && a.normal_key(ctx) > b.normal_key(ctx),
    }
}

/// Physical resources of a hand, split into non-wild standard cards (by
/// natural rank and suit), wild cards, and jokers.
struct Resources {
    by_rank: [u8; 13],
    by_suit_rank: [[u8; 13]; 4],
    wilds: u8,
    black: u8,
    red: u8,
}

impl Resources {
    fn tally(hand: &[Card], ctx: &LevelContext) -> Resources {
        let mut res = Resources { by_rank: [0; 13], by_suit_rank: [[0; 13]; 4], wilds: 0, black: 0, red: 0 };
        for card in hand {
            if ctx.is_wild(card) {
                res.wilds += 1;
                continue;
            }
            match card {
                Card::Standard { suit, rank } => {
                    let s = SUITS.iter().position(|x| x == suit).unwrap();
                    res.by_rank[nat_idx(*rank)] += 1;
                    res.by_suit_rank[s][nat_idx(*rank)] += 1;
                }
                Card::BlackJoker => res.black += 1,
                Card::RedJoker => res.red += 1,
                _ => {}
            }
        }
        res
    }

    /// Build a concrete card list for rank demands `need` (natural index
    /// -> copies), topping up shortfalls with wilds. Suits are assigned
    /// deterministically. Returns None when the demand is infeasible or
    /// would use wilds with no natural card as anchor (a combo may be
    /// all-wild only at the level rank itself, where the wilds play at
    /// their printed rank).
    fn assemble(&self, need: &[(usize, u8)], ctx: &LevelContext) -> Option<Vec<Card>> {
        let mut deficit = 0u8;
        let mut naturals = 0u8;
        for (idx, n) in need {
            let have = self.by_rank[*idx].min(*n);
            naturals += have;
            deficit += n - have;
        }
        if deficit > self.wilds {
            return None;
        }
        let level_only = need.iter().all(|(idx, _)| *idx == nat_idx(ctx.current));
        if naturals == 0 && !level_only {
            return None;
        }
        let mut cards = Vec::new();
        for (idx, n) in need {
            let mut left = *n;
            for (s, suit) in SUITS.iter().enumerate() {
                let take = self.by_suit_rank[s][*idx].min(left);
                for _ in 0..take {
                    cards.push(Card::std(*suit, rank_at_nat(*idx)));
                }
                left -= take;
                if left == 0 {
                    break;
                }
            }
            for _ in 0..left {
                cards.push(ctx.wild_card());
            }
        }
        Some(cards)
    }

    /// Concrete cards for a suited run over sequence positions, using
    /// wilds for missing members.
    fn assemble_flush(&self, suit_idx: usize, window: &[usize], ctx: &LevelContext) -> Option<Vec<Card>> {
        let mut cards = Vec::new();
        let mut wilds_needed = 0u8;
        for pos in window {
            let rank = rank_at_seq(*pos);
            if self.by_suit_rank[suit_idx][nat_idx(rank)] >= 1 {
                cards.push(Card::std(SUITS[suit_idx], rank));
            } else {
                wilds_needed += 1;
                cards.push(ctx.wild_card());
            }
        }
        (wilds_needed <= self.wilds && wilds_needed < window.len() as u8).then_some(cards)
    }
}

/// All moves playable from `hand`: every combo when leading, or the combos
/// beating `last` when following. One canonical card assignment is
/// produced per (type, rank) shape, using as few wilds as possible.
pub fn enumerate_guan_moves(hand: &[Card], last: Option<&GuanCombo>, ctx: &LevelContext) -> Vec<GuanCombo> {
    let res = Resources::tally(hand, ctx);
    let mut out: Vec<GuanCombo> = Vec::new();
    let mut push = |ty: GuanType, rank_ch: char, cards: Vec<Card>, sf: bool, jb: bool| {
        out.push(
            GuanCombo { ty, rank_ch, cards, wildcards_used: 0, straight_flush: sf, joker_bomb: jb }.finish(ctx),
        );
    };

    for idx in 0..13 {
        let rank = rank_at_nat(idx);
        if res.by_rank[idx] >= 1 {
            let suit = SUITS[(0..4).find(|s| res.by_suit_rank[*s][idx] >= 1).unwrap()];
            push(GuanType::Single, rank.ch(), vec![Card::std(suit, rank)], false, false);
        } else if rank == ctx.current && res.wilds >= 1 {
            // A lone wild plays as a plain level-rank single.
            push(GuanType::Single, rank.ch(), vec![ctx.wild_card()], false, false);
        }
    }
    if res.black >= 1 {
        push(GuanType::Single, 'B', vec![Card::BlackJoker], false, false);
    }
    if res.red >= 1 {
        push(GuanType::Single, 'R', vec![Card::RedJoker], false, false);
    }

    for idx in 0..13 {
        if let Some(cards) = res.assemble(&[(idx, 2)], ctx) {
            push(GuanType::Pair, rank_at_nat(idx).ch(), cards, false, false);
        }
    }
    if res.black >= 2 {
        push(GuanType::Pair, 'B', vec![Card::BlackJoker; 2], false, false);
    }
    if res.red >= 2 {
        push(GuanType::Pair, 'R', vec![Card::RedJoker; 2], false, false);
    }

    for idx in 0..13 {
        if let Some(cards) = res.assemble(&[(idx, 3)], ctx) {
            push(GuanType::Trips, rank_at_nat(idx).ch(), cards, false, false);
        }
    }

    for top in 3..=14 {
        let need: Vec<(usize, u8)> = (top - 2..=top).map(|pos| (nat_idx(rank_at_seq(pos)), 2)).collect();
        if let Some(cards) = res.assemble(&need, ctx) {
            push(GuanType::ThreePair, rank_ch_at_seq(top), cards, false, false);
        }
    }
    for top in 2..=14 {
        let need: Vec<(usize, u8)> = [top - 1, top].iter().map(|pos| (nat_idx(rank_at_seq(*pos)), 3)).collect();
        if let Some(cards) = res.assemble(&need, ctx) {
            push(GuanType::TripsPair, rank_ch_at_seq(top), cards, false, false);
        }
    }

    for trio in 0..13 {
        for pair in 0..13 {
            if trio == pair {
                continue;
            }
            if let Some(cards) = res.assemble(&[(trio, 3), (pair, 2)], ctx) {
                push(GuanType::ThreeWithTwo, rank_at_nat(trio).ch(), cards, false, false);
            }
        }
        if let Some(mut cards) = res.assemble(&[(trio, 3)], ctx) {
            if res.black >= 2 {
                let mut with_jokers = cards.clone();
                with_jokers.extend([Card::BlackJoker, Card::BlackJoker]);
                push(GuanType::ThreeWithTwo, rank_at_nat(trio).ch(), with_jokers, false, false);
            }
            if res.red >= 2 {
                cards.extend([Card::RedJoker, Card::RedJoker]);
                push(GuanType::ThreeWithTwo, rank_at_nat(trio).ch(), cards, false, false);
            }
        }
    }

    for top in 5..=14 {
        let need: Vec<(usize, u8)> = (top - 4..=top).map(|pos| (nat_idx(rank_at_seq(pos)), 1)).collect();
        if let Some(cards) = res.assemble(&need, ctx) {
            push(GuanType::Straight, rank_ch_at_seq(top), cards, false, false);
        }
    }

    for idx in 0..13 {
        let max = res.by_rank[idx] + res.wilds;
        for size in 4..=max.min(10) {
            if let Some(cards) = res.assemble(&[(idx, size)], ctx) {
                push(GuanType::Boom, rank_at_nat(idx).ch(), cards, false, false);
            }
        }
    }
    for suit_idx in 0..4 {
        for top in 5..=14 {
            let window: Vec<usize> = (top - 4..=top).collect();
            if let Some(cards) = res.assemble_flush(suit_idx, &window, ctx) {
                push(GuanType::Boom, rank_ch_at_seq(top), cards, true, false);
            }
        }
    }
    if res.black == 2 && res.red == 2 {
        push(GuanType::Boom, 'R', vec![Card::BlackJoker, Card::BlackJoker, Card::RedJoker, Card::RedJoker], false, true);
    }

    let mut seen: HashSet<(GuanType, char, Vec<Card>)> = HashSet::new();
    out.retain(|combo| seen.insert((combo.ty, combo.rank_ch, combo.cards.clone())));
    if let Some(prev) = last {
        out.retain(|combo| compare_guan(combo, prev, ctx));
    }
    out
}

/// Validate a wire triple against the rules and produce the combo. The
/// declared rank disambiguates wild placement (e.g. which end of a run a
/// wild extends).
pub fn interpret_guan_wire(ty: GuanType, rank_ch: char, cards: &[Card], ctx: &LevelContext) -> Option<GuanCombo> {
    let wilds = cards.iter().filter(|c| ctx.is_wild(c)).count() as u8;
    let naturals: Vec<&Card> = cards.iter().filter(|c| !ctx.is_wild(c)).collect();
    let no_jokers = naturals.iter().all(|c| !c.is_joker());
    let accept = |sf: bool, jb: bool| {
        Some(
            GuanCombo {
                ty,
                rank_ch,
                cards: cards.to_vec(),
                wildcards_used: wilds,
                straight_flush: sf,
                joker_bomb: jb,
            }
            .finish(ctx),
        )
    };

    // Demand `copies` of each window rank from the given cards, wilds
    // covering shortfalls, with the all-wild anchor rule.
    let covers = |window: &[Rank], copies: usize| -> bool {
        if !no_jokers || cards.len() != window.len() * copies {
            return false;
        }
        let mut need: Vec<usize> = vec![copies; window.len()];
        for card in &naturals {
            let Some(slot) = window.iter().position(|r| Some(*r) == card.rank()) else {
                return false;
            };
            if need[slot] == 0 {
                return false;
            }
            need[slot] -= 1;
        }
        let deficit: usize = need.iter().sum();
        let level_only = window.iter().all(|r| *r == ctx.current);
        deficit == wilds as usize && (!naturals.is_empty() || level_only)
    };

    let joker_set = |joker: Card, copies: usize| cards.len() == copies && cards.iter().all(|c| *c == joker);

    match ty {
        GuanType::Single => {
            if cards.len() != 1 {
                return None;
            }
            let ch = match cards[0] {
                Card::BlackJoker => 'B',
                Card::RedJoker => 'R',
                Card::Standard { rank, .. } => rank.ch(),
                _ => return None,
            };
            (ch == rank_ch).then(|| accept(false, false)).flatten()
        }
        GuanType::Pair | GuanType::Trips => {
            let copies = if ty == GuanType::Pair { 2 } else { 3 };
            let ok = match rank_ch {
                'B' => joker_set(Card::BlackJoker, 2) && copies == 2,
                'R' => joker_set(Card::RedJoker, 2) && copies == 2,
                ch => Rank::from_ch(ch).is_some_and(|r| covers(&[r], copies)),
            };
            ok.then(|| accept(false, false)).flatten()
        }
        GuanType::ThreePair => {
            let top = seq_pos_of_top(rank_ch)?;
            if top < 3 {
                return None;
            }
            let window: Vec<Rank> = (top - 2..=top).map(rank_at_seq).collect();
            covers(&window, 2).then(|| accept(false, false)).flatten()
        }
        GuanType::TripsPair => {
            let top = seq_pos_of_top(rank_ch)?;
            if top < 2 {
                return None;
            }
            let window: Vec<Rank> = (top - 1..=top).map(rank_at_seq).collect();
            covers(&window, 3).then(|| accept(false, false)).flatten()
        }
        GuanType::ThreeWithTwo => {
            if cards.len() != 5 {
                return None;
            }
            let trio = Rank::from_ch(rank_ch)?;
            let jokers: Vec<&&Card> = naturals.iter().filter(|c| c.is_joker()).collect();
            let ok = if jokers.is_empty() {
                // Try every pair identity; naturals must fit trio+pair
                // with wilds covering the shortfall.
                (0..13).any(|p| {
                    let pair = rank_at_nat(p);
                    if pair == trio {
                        return false;
                    }
                    let mut need_trio = 3usize;
                    let mut need_pair = 2usize;
                    let mut fits = true;
                    for card in &naturals {
                        match card.rank() {
                            Some(r) if r == trio && need_trio > 0 => need_trio -= 1,
                            Some(r) if r == pair && need_pair > 0 => need_pair -= 1,
                            _ => fits = false,
                        }
                    }
                    fits && need_trio + need_pair == wilds as usize && !naturals.is_empty()
                })
            } else {
                // Joker pair: exactly two identical jokers, the rest the trio.
                let standards: Vec<&&Card> = naturals.iter().filter(|c| !c.is_joker()).collect();
                jokers.len() == 2
                    && jokers[0] == jokers[1]
                    && standards.iter().all(|c| c.rank() == Some(trio))
                    && standards.len() + wilds as usize == 3
                    && !standards.is_empty()
            };
            ok.then(|| accept(false, false)).flatten()
        }
        GuanType::Straight => {
            let top = seq_pos_of_top(rank_ch)?;
            if top < 5 {
                return None;
            }
            let window: Vec<Rank> = (top - 4..=top).map(rank_at_seq).collect();
            covers(&window, 1).then(|| accept(false, false)).flatten()
        }
        GuanType::Boom => {
            if rank_ch == 'R' && cards.len() == 4 && cards.iter().all(|c| c.is_joker()) {
                let blacks = cards.iter().filter(|c| **c == Card::BlackJoker).count();
                return (blacks == 2).then(|| accept(false, true)).flatten();
            }
            if let Some(rank) = Rank::from_ch(rank_ch) {
                if (4..=10).contains(&cards.len()) && covers(&[rank], cards.len()) {
                    return accept(false, false);
                }
                // Straight flush: suited naturals covering a five-run.
                if cards.len() == 5 && no_jokers {
                    let top = seq_pos_of_top(rank_ch)?;
                    if top >= 5 {
                        let window: Vec<Rank> = (top - 4..=top).map(rank_at_seq).collect();
                        let suits: HashSet<_> = naturals.iter().filter_map(|c| c.suit()).collect();
                        if suits.len() <= 1 && covers(&window, 1) && !naturals.is_empty() {
                            return accept(true, false);
                        }
                    }
                }
            }
            None
        }
    }
}

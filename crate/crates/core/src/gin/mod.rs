//! Two-player Gin Rummy: 11/10 deal, draw/discard turns, knock at deadwood
//! ten or less, gin at zero, undercut bonus 25, dead hand at a two-card
//! stock. Terminal "score N"/"score S" bookkeeping steps mirror the action
//! vocabulary and carry the result into trajectories.

pub mod meld;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::{build_deck, format_card_rank_first, parse_card_rank_first, Card, Game};
use crate::engine::EngineError;
use meld::{lay_off, min_deadwood_any, DeadwoodResult};

pub use meld::{min_deadwood, GinError, Meld, MeldKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GinAction {
    DrawCard,
    PickUpDiscard,
    Gin,
    Discard(Card),
    Knock(Card),
    DeclareDead,
    ScoreNorth,
    ScoreSouth,
}

impl GinAction {
    pub fn as_wire(&self) -> String {
        match self {
            GinAction::DrawCard => "draw_card".to_string(),
            GinAction::PickUpDiscard => "pick_up_discard".to_string(),
            GinAction::Gin => "gin".to_string(),
            GinAction::Discard(c) => format!("discard {}", format_card_rank_first(*c)),
            GinAction::Knock(c) => format!("knock {}", format_card_rank_first(*c)),
            GinAction::DeclareDead => "declare_dead".to_string(),
            GinAction::ScoreNorth => "score N".to_string(),
            GinAction::ScoreSouth => "score S".to_string(),
        }
    }

    pub fn from_wire(text: &str) -> Option<GinAction> {
        match text {
            "draw_card" => return Some(GinAction::DrawCard),
            "pick_up_discard" => return Some(GinAction::PickUpDiscard),
            "gin" => return Some(GinAction::Gin),
            "declare_dead" => return Some(GinAction::DeclareDead),
            "score N" => return Some(GinAction::ScoreNorth),
            "score S" => return Some(GinAction::ScoreSouth),
            _ => {}
        }
        if let Some(rest) = text.strip_prefix("discard ") {
            return parse_card_rank_first(rest).ok().map(GinAction::Discard);
        }
        if let Some(rest) = text.strip_prefix("knock ") {
            return parse_card_rank_first(rest).ok().map(GinAction::Knock);
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Discard,
    Draw,
    ScoreNorth,
    ScoreSouth,
    Done,
}

/// Observation fields for one acting seat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GinView {
    pub step: u32,
    pub id: u32,
    pub hand: Vec<String>,
    pub top_discard: String,
    pub other_discards: Vec<String>,
    pub opponent_known: Vec<String>,
    pub stock_left: u32,
    pub history: Vec<(u32, String)>,
}

/// Any draw phase at or past this step count forces a dead hand. Random
/// play can otherwise cycle through the discard pile indefinitely, because
/// only stock draws shrink the stock.
const DEAD_HAND_STEP_GUARD: u32 = 100;

#[derive(Debug, Clone)]
pub struct GinState {
    hands: [Vec<Card>; 2],
    stock: Vec<Card>,
    discard: Vec<Card>,
    to_act: usize,
    phase: Phase,
    known: [Vec<Card>; 2],
    just_picked: Option<Card>,
    step_count: u32,
    history: Vec<(usize, GinAction)>,
    scores: Option<[u32; 2]>,
}

fn hand_sort_key(card: &Card) -> (usize, crate::cards::Suit) {
    (card.rank().unwrap().index(), card.suit().unwrap())
}

impl GinState {
    pub fn new(rng: &mut ChaCha8Rng, dealer: usize) -> GinState {
        let mut deck = build_deck(Game::GinRummy);
        deck.shuffle(rng);
        let non_dealer = 1 - dealer;
        let mut hands: [Vec<Card>; 2] = [Vec::new(), Vec::new()];
        hands[non_dealer] = deck.split_off(deck.len() - 11);
        hands[dealer] = deck.split_off(deck.len() - 10);
        GinState {
            hands,
            stock: deck,
            discard: Vec::new(),
            to_act: non_dealer,
            phase: Phase::Discard,
            known: [Vec::new(), Vec::new()],
            just_picked: None,
            step_count: 0,
            history: Vec::new(),
            scores: None,
        }
    }

    pub fn seat_to_act(&self) -> usize {
        self.to_act
    }

    pub fn is_terminal(&self) -> bool {
        self.phase == Phase::Done
    }

    fn sorted_hand(&self, seat: usize) -> Vec<Card> {
        let mut hand = self.hands[seat].clone();
        hand.sort_by_key(hand_sort_key);
        hand
    }

    pub fn legal_actions(&self) -> Vec<GinAction> {
        match self.phase {
            Phase::Done => Vec::new(),
            Phase::ScoreNorth => vec![GinAction::ScoreNorth],
            Phase::ScoreSouth => vec![GinAction::ScoreSouth],
            Phase::Draw => {
                if self.stock.len() <= 2 || self.step_count >= DEAD_HAND_STEP_GUARD {
                    vec![GinAction::DeclareDead]
                } else if self.discard.is_empty() {
                    vec![GinAction::DrawCard]
                } else {
                    vec![GinAction::DrawCard, GinAction::PickUpDiscard]
                }
            }
            Phase::Discard => {
                let hand = self.sorted_hand(self.to_act);
                let mut discards = Vec::new();
                let mut knocks = Vec::new();
                let mut gin_possible = false;
                for card in &hand {
                    if Some(*card) == self.just_picked {
                        continue;
                    }
                    let rest: Vec<Card> = self
                        .hands[self.to_act]
                        .iter()
                        .copied()
                        .filter(|c| c != card)
                        .collect();
                    let count = min_deadwood_any(&rest).count;
                    discards.push(GinAction::Discard(*card));
                    if count == 0 {
                        gin_possible = true;
                    }
                    if count <= 10 {
                        knocks.push(GinAction::Knock(*card));
                    }
                }
                let mut actions = Vec::new();
                if gin_possible {
                    actions.push(GinAction::Gin);
                }
                actions.extend(discards);
                actions.extend(knocks);
                actions
            }
        }
    }

    pub fn apply(&mut self, action: GinAction) -> Result<(), EngineError> {
        if !self.legal_actions().contains(&action) {
            return Err(EngineError::IllegalAction {
                seat: self.to_act,
                action: action.as_wire(),
            });
        }
        let seat = self.to_act;
        self.history.push((seat, action));
        self.step_count += 1;
        match action {
            GinAction::DrawCard => {
                let card = self.stock.pop().expect("legality checked stock size");
                self.hands[seat].push(card);
                self.just_picked = None;
                self.phase = Phase::Discard;
            }
            GinAction::PickUpDiscard => {
                let card = self.discard.pop().expect("legality checked discard");
                self.hands[seat].push(card);
                self.known[seat].push(card);
                self.just_picked = Some(card);
                self.phase = Phase::Discard;
            }
            GinAction::Discard(card) => {
                self.remove_from_hand(seat, card);
                self.discard.push(card);
                self.just_picked = None;
                self.to_act = 1 - seat;
                self.phase = Phase::Draw;
            }
            GinAction::Knock(card) => {
                self.remove_from_hand(seat, card);
                self.discard.push(card);
                self.settle(seat, false);
            }
            GinAction::Gin => {
                let card = self
                    .sorted_hand(seat)
                    .into_iter()
                    .filter(|c| Some(*c) != self.just_picked)
                    .find(|c| {
                        let rest: Vec<Card> = self.hands[seat]
                            .iter()
                            .copied()
                            .filter(|x| x != c)
                            .collect();
                        min_deadwood_any(&rest).count == 0
                    })
                    .expect("legality guarantees a gin discard");
                self.remove_from_hand(seat, card);
                self.discard.push(card);
                self.settle(seat, true);
            }
            GinAction::DeclareDead => {
                self.scores = Some([0, 0]);
                self.phase = Phase::ScoreNorth;
                self.to_act = 0;
            }
            GinAction::ScoreNorth => {
                self.phase = Phase::ScoreSouth;
                self.to_act = 1;
            }
            GinAction::ScoreSouth => {
                self.phase = Phase::Done;
            }
        }
        Ok(())
    }

    fn remove_from_hand(&mut self, seat: usize, card: Card) {
        let idx = self.hands[seat]
            .iter()
            .position(|c| *c == card)
            .expect("legality guarantees the card is in hand");
        self.hands[seat].remove(idx);
        self.known[seat].retain(|c| *c != card);
    }

    fn settle(&mut self, knocker: usize, is_gin: bool) {
        let knocker_result = min_deadwood_any(&self.hands[knocker]);
        let defender_result: DeadwoodResult = min_deadwood_any(&self.hands[1 - knocker]);
        let defender_count = if is_gin {
            defender_result.count
        } else {
            lay_off(&knocker_result.melds, &defender_result.deadwood).1
        };
        let mut scores = [0u32; 2];
        if defender_count > knocker_result.count {
            scores[knocker] = defender_count - knocker_result.count;
        } else {
            scores[1 - knocker] = (knocker_result.count - defender_count) + 25;
        }
        self.scores = Some(scores);
        self.phase = Phase::ScoreNorth;
        self.to_act = 0;
    }

    /// Raw points, available once the hand settles.
    pub fn scores(&self) -> Option<[u32; 2]> {
        self.scores
    }

    /// Points difference scaled by 100 and clamped to [-1, 1].
    pub fn payoffs(&self) -> Option<Vec<f64>> {
        if !self.is_terminal() {
            return None;
        }
        self.scores.map(|s| {
            let diff = (s[0] as f64 - s[1] as f64) / 100.0;
            let clamped = diff.clamp(-1.0, 1.0);
            vec![clamped, -clamped]
        })
    }

    pub fn observe(&self, seat: usize) -> GinView {
        let fmt = |cards: &[Card]| -> Vec<String> {
            let mut sorted = cards.to_vec();
            sorted.sort_by_key(hand_sort_key);
            sorted.iter().map(|c| format_card_rank_first(*c)).collect()
        };
        GinView {
            step: self.step_count,
            id: seat as u32,
            hand: fmt(&self.hands[seat]),
            top_discard: self
                .discard
                .last()
                .map(|c| format_card_rank_first(*c))
                .unwrap_or_else(|| "none".to_string()),
            other_discards: self.discard[..self.discard.len().saturating_sub(1)]
                .iter()
                .map(|c| format_card_rank_first(*c))
                .collect(),
            opponent_known: fmt(&self.known[1 - seat]),
            stock_left: self.stock.len() as u32,
            history: self
                .history
                .iter()
                .map(|(s, a)| (*s as u32, a.as_wire()))
                .collect(),
        }
    }

    pub fn all_cards(&self) -> Vec<Card> {
        let mut cards = self.hands[0].clone();
        cards.extend(&self.hands[1]);
        cards.extend(&self.stock);
        cards.extend(&self.discard);
        cards
    }

    pub fn hand_sizes(&self) -> [usize; 2] {
        [self.hands[0].len(), self.hands[1].len()]
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }

    /// Test hook: replace both hands (sizes 11/10 by phase convention).
    #[doc(hidden)]
    pub fn set_hands_for_test(&mut self, acting: Vec<Card>, other: Vec<Card>) {
        let seat = self.to_act;
        let mut pool: Vec<Card> = acting.iter().chain(other.iter()).copied().collect();
        pool.extend(self.stock.iter());
        self.hands[seat] = acting;
        self.hands[1 - seat] = other;
        // Rebuild the stock from whatever is left of the deck so census
        // stays exact.
        let full = build_deck(Game::GinRummy);
        let mut remaining = full;
        for used in self.hands[0].iter().chain(self.hands[1].iter()).chain(self.discard.iter()) {
            let idx = remaining.iter().position(|c| c == used).expect("valid hands");
            remaining.remove(idx);
        }
        self.stock = remaining;
    }
}

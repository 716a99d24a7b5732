//! Dou Dizhu: three seats, landlord vs two farmers, trick-taking over the
//! combo taxonomy in [`combo`]. Seat 0 is always the landlord and holds the
//! three extra cards; seats 1 and 2 are `landlord_down` and `landlord_up`.

pub mod combo;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::EngineError;
use combo::{classify_dou, compare_dou, enumerate_dou_moves, DouCategory, DouCombo, DOU_RANK_INTS};

pub const DOU_ROLES: [&str; 3] = ["landlord", "landlord_down", "landlord_up"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DouAction {
    /// Play the given card integers (one valid combo).
    Play(Vec<u8>),
    Pass,
}

/// Everything a seat is allowed to see, in template field order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DouView {
    pub turn: u32,
    pub role: String,
    pub hand: Vec<i64>,
    pub others_union: Vec<i64>,
    pub last_move: Vec<i64>,
    pub played: Vec<i64>,
    pub cards_left: Vec<u32>,
    pub bombs_played: u32,
    pub history: Vec<(u32, Vec<i64>)>,
}

#[derive(Debug, Clone)]
pub struct DouState {
    hands: [Vec<u8>; 3],
    to_act: usize,
    turn: u32,
    last_move: Option<(usize, DouCombo)>,
    passes: usize,
    played: Vec<u8>,
    bombs_played: u32,
    history: Vec<(usize, Vec<u8>)>,
    outcome: Option<[i64; 3]>,
}

impl DouState {
    pub fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut deck: Vec<u8> = DOU_RANK_INTS[..13]
            .iter()
            .flat_map(|card| std::iter::repeat_n(*card, 4))
            .collect();
        deck.push(20);
        deck.push(30);
        deck.shuffle(rng);
        let mut hands = [deck[..20].to_vec(), deck[20..37].to_vec(), deck[37..].to_vec()];
        for hand in &mut hands {
            hand.sort_unstable();
        }
        Self::from_hands(hands)
    }

    /// Start from explicit hands; scripted tests use short hands to reach
    /// terminal states quickly.
    #[doc(hidden)]
    pub fn from_hands(hands: [Vec<u8>; 3]) -> Self {
        DouState {
            hands,
            to_act: 0,
            turn: 1,
            last_move: None,
            passes: 0,
            played: Vec::new(),
            bombs_played: 0,
            history: Vec::new(),
            outcome: None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn to_act(&self) -> usize {
        self.to_act
    }

    pub fn role(seat: usize) -> &'static str {
        DOU_ROLES[seat]
    }

    fn following(&self) -> Option<&DouCombo> {
        self.last_move.as_ref().map(|(_, combo)| combo)
    }

    pub fn legal_actions(&self) -> Vec<DouAction> {
        if self.is_terminal() {
            return Vec::new();
        }
        let mut actions: Vec<DouAction> = enumerate_dou_moves(&self.hands[self.to_act], self.following())
            .into_iter()
            .map(|combo| DouAction::Play(combo.cards))
            .collect();
        if self.last_move.is_some() {
            actions.push(DouAction::Pass);
        }
        actions
    }

    pub fn apply(&mut self, action: &DouAction) -> Result<(), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::TerminalState);
        }
        let seat = self.to_act;
        match action {
            DouAction::Pass => {
                let Some((holder, _)) = self.last_move else {
                    return Err(EngineError::IllegalAction { seat, action: "pass while leading".into() });
                };
                self.history.push((seat, Vec::new()));
                self.turn += 1;
                self.passes += 1;
                if self.passes == 2 {
                    self.last_move = None;
                    self.passes = 0;
                    self.to_act = holder;
                } else {
                    self.to_act = (seat + 1) % 3;
                }
            }
            DouAction::Play(cards) => {
                let combo = self.resolve_play(seat, cards)?;
                self.remove_from_hand(seat, cards)?;
                self.played.extend_from_slice(cards);
                self.played.sort_unstable();
                if matches!(combo.category, DouCategory::Bomb | DouCategory::Rocket) {
                    self.bombs_played += 1;
                }
                self.history.push((seat, combo.cards.clone()));
                self.turn += 1;
                self.last_move = Some((seat, combo));
                self.passes = 0;
                if self.hands[seat].is_empty() {
                    self.outcome = Some(if seat == 0 { [1, -1, -1] } else { [-1, 1, 1] });
                } else {
                    self.to_act = (seat + 1) % 3;
                }
            }
        }
        Ok(())
    }

    /// Pick the first reading of `cards` (canonical order) that is legal
    /// against the standing move.
    fn resolve_play(&self, seat: usize, cards: &[u8]) -> Result<DouCombo, EngineError> {
        classify_dou(cards)
            .into_iter()
            .find(|combo| self.following().is_none_or(|prev| compare_dou(combo, prev)))
            .ok_or_else(|| EngineError::IllegalAction { seat, action: format!("{cards:?}") })
    }

    fn remove_from_hand(&mut self, seat: usize, cards: &[u8]) -> Result<(), EngineError> {
        let hand = &mut self.hands[seat];
        for card in cards {
            let Some(pos) = hand.iter().position(|c| c == card) else {
                return Err(EngineError::IllegalAction { seat, action: format!("{cards:?} not in hand") });
            };
            hand.remove(pos);
        }
        Ok(())
    }

    pub fn payoffs(&self) -> Result<[i64; 3], EngineError> {
        self.outcome.ok_or(EngineError::NonTerminal)
    }

    /// True when the seat is on the winning side.
    pub fn is_winner(&self, seat: usize) -> Result<bool, EngineError> {
        Ok(self.payoffs()?[seat] > 0)
    }

    pub fn observe(&self, seat: usize) -> DouView {
        let ints = |cards: &[u8]| cards.iter().map(|c| *c as i64).collect::<Vec<i64>>();
        let mut others: Vec<u8> = self.hands[(seat + 1) % 3]
            .iter()
            .chain(&self.hands[(seat + 2) % 3])
            .copied()
            .collect();
        others.sort_unstable();
        DouView {
            turn: self.turn,
            role: DOU_ROLES[seat].to_string(),
            hand: ints(&self.hands[seat]),
            others_union: ints(&others),
            last_move: self.following().map(|combo| ints(&combo.cards)).unwrap_or_default(),
            played: ints(&self.played),
            cards_left: self.hands.iter().map(|h| h.len() as u32).collect(),
            bombs_played: self.bombs_played,
            history: self
                .history
                .iter()
                .map(|(seat, cards)| (*seat as u32, ints(cards)))
                .collect(),
        }
    }

    /// All cards in play (hands plus discards), for conservation checks.
    pub fn all_cards(&self) -> Vec<u8> {
        let mut cards: Vec<u8> = self.hands.iter().flatten().copied().collect();
        cards.extend_from_slice(&self.played);
        cards.sort_unstable();
        cards
    }

    pub fn step_count(&self) -> u32 {
        self.turn
    }
}

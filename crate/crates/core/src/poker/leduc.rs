//! Leduc Hold'em: six-card deck, one private card each, one public card,
//! two betting rounds with fixed raise sizes 2 and 4 and a two-bet cap.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::{build_deck, Card, Game};
use crate::engine::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeducAction {
    Call,
    Raise,
    Fold,
    Check,
}

/// Fixed action-space order shared by Leduc and Limit Hold'em (used for
/// feature/Q-vector indexing).
pub const ROUND_ACTION_SPACE: [LeducAction; 4] = [
    LeducAction::Call,
    LeducAction::Raise,
    LeducAction::Fold,
    LeducAction::Check,
];

impl LeducAction {
    pub fn as_str(&self) -> &'static str {
        match self {
            LeducAction::Call => "call",
            LeducAction::Raise => "raise",
            LeducAction::Fold => "fold",
            LeducAction::Check => "check",
        }
    }

    pub fn from_str(s: &str) -> Option<LeducAction> {
        match s {
            "call" => Some(LeducAction::Call),
            "raise" => Some(LeducAction::Raise),
            "fold" => Some(LeducAction::Fold),
            "check" => Some(LeducAction::Check),
            _ => None,
        }
    }
}

/// Observation fields for one acting seat, pre-formatted for rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeducView {
    pub round: u32,
    pub position: u32,
    pub hand: String,
    pub public_card: String,
    pub my_chips: u32,
    pub pot: u32,
    pub num_raises: u32,
    pub history: Vec<(u32, String)>,
}

const RAISE_SIZES: [u32; 2] = [2, 4];
const RAISE_CAP: u32 = 2;

#[derive(Debug, Clone)]
pub struct LeducState {
    holes: [Card; 2],
    board: Card,
    undealt: Vec<Card>,
    dealer: usize,
    round: usize,
    committed: [u32; 2],
    round_bets: [u32; 2],
    raises_this_round: u32,
    total_raises: u32,
    actions_this_round: u32,
    to_act: usize,
    history: Vec<(usize, LeducAction)>,
    /// Net chip outcome per seat once terminal.
    outcome: Option<[i64; 2]>,
}

impl LeducState {
    pub fn new(rng: &mut ChaCha8Rng, dealer: usize) -> LeducState {
        let mut deck = build_deck(Game::Leduc);
        deck.shuffle(rng);
        let holes = [deck[0], deck[1]];
        let board = deck[2];
        Self::with_deal(holes, board, deck[3..].to_vec(), dealer)
    }

    /// Explicit deal, used by exhaustive analyses.
    pub fn with_deal(holes: [Card; 2], board: Card, undealt: Vec<Card>, dealer: usize) -> LeducState {
        LeducState {
            holes,
            board,
            undealt,
            dealer,
            round: 0,
            committed: [1, 1], // antes
            round_bets: [0, 0],
            raises_this_round: 0,
            total_raises: 0,
            actions_this_round: 0,
            to_act: 1 - dealer,
            history: Vec::new(),
            outcome: None,
        }
    }

    pub fn seat_to_act(&self) -> usize {
        self.to_act
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn legal_actions(&self) -> Vec<LeducAction> {
        if self.is_terminal() {
            return Vec::new();
        }
        let facing = self.round_bets[1 - self.to_act] > self.round_bets[self.to_act];
        let mut actions = Vec::with_capacity(3);
        actions.push(if facing { LeducAction::Call } else { LeducAction::Check });
        if self.raises_this_round < RAISE_CAP {
            actions.push(LeducAction::Raise);
        }
        actions.push(LeducAction::Fold);
        actions
    }

    pub fn apply(&mut self, action: LeducAction) -> Result<(), EngineError> {
        if !self.legal_actions().contains(&action) {
            return Err(EngineError::IllegalAction {
                seat: self.to_act,
                action: action.as_str().to_string(),
            });
        }
        let seat = self.to_act;
        self.history.push((seat, action));
        self.actions_this_round += 1;
        let owed = self.round_bets[1 - seat] - self.round_bets[seat];
        match action {
            LeducAction::Fold => {
                let loss = self.committed[seat] as i64;
                let mut outcome = [0i64; 2];
                outcome[seat] = -loss;
                outcome[1 - seat] = loss;
                self.outcome = Some(outcome);
            }
            LeducAction::Check => {
                if self.actions_this_round >= 2 {
                    self.advance_round();
                } else {
                    self.to_act = 1 - seat;
                }
            }
            LeducAction::Call => {
                self.round_bets[seat] += owed;
                self.committed[seat] += owed;
                self.advance_round();
            }
            LeducAction::Raise => {
                let amount = owed + RAISE_SIZES[self.round];
                self.round_bets[seat] += amount;
                self.committed[seat] += amount;
                self.raises_this_round += 1;
                self.total_raises += 1;
                self.to_act = 1 - seat;
            }
        }
        Ok(())
    }

    fn advance_round(&mut self) {
        if self.round == 0 {
            self.round = 1;
            self.round_bets = [0, 0];
            self.raises_this_round = 0;
            self.actions_this_round = 0;
            self.to_act = 1 - self.dealer;
        } else {
            self.showdown();
        }
    }

    fn showdown(&mut self) {
        let score = |seat: usize| {
            let rank = self.holes[seat].rank().expect("leduc holes are french cards");
            if Some(rank) == self.board.rank() {
                // A pair with the board beats any unpaired rank.
                100
            } else {
                rank.index() as i32
            }
        };
        let (a, b) = (score(0), score(1));
        let outcome = if a == b {
            [0, 0]
        } else {
            let winner = if a > b { 0 } else { 1 };
            let loss = self.committed[1 - winner] as i64;
            let mut o = [0i64; 2];
            o[winner] = loss;
            o[1 - winner] = -loss;
            o
        };
        self.outcome = Some(outcome);
    }

    /// Net chips divided by 2, the reward unit used in evaluation.
    pub fn payoffs(&self) -> Option<Vec<f64>> {
        self.outcome
            .map(|o| o.iter().map(|chips| *chips as f64 / 2.0).collect())
    }

    pub fn observe(&self, seat: usize) -> LeducView {
        let rank_letter = |card: Card| card.rank().expect("french card").ch().to_string();
        LeducView {
            round: self.round as u32 + 1,
            position: seat as u32,
            hand: rank_letter(self.holes[seat]),
            public_card: if self.round == 0 {
                "none".to_string()
            } else {
                rank_letter(self.board)
            },
            my_chips: self.committed[seat],
            pot: self.committed.iter().sum(),
            num_raises: self.total_raises,
            history: self
                .history
                .iter()
                .map(|(s, a)| (*s as u32, a.as_str().to_string()))
                .collect(),
        }
    }

    /// Every card in play, for conservation checks.
    pub fn all_cards(&self) -> Vec<Card> {
        let mut cards = vec![self.holes[0], self.holes[1], self.board];
        cards.extend(&self.undealt);
        cards
    }

    pub fn committed(&self) -> [u32; 2] {
        self.committed
    }

    pub fn step_count(&self) -> u32 {
        self.history.len() as u32
    }
}

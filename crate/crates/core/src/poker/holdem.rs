//! Heads-up Limit and No-limit Texas Hold'em betting engines.
//!
//! Shared structure: blinds 1/2 (dealer posts the small blind and acts
//! first pre-flop, the other seat acts first after the flop), four betting
//! rounds, five community cards revealed 3/1/1, winner by best 5-of-7 hand.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::{build_deck, format_card, Card, Game};
use crate::engine::EngineError;
use crate::poker::eval::evaluate_hand;
use crate::poker::leduc::LeducAction;

pub const ROUND_NAMES: [&str; 4] = ["pre-flop", "flop", "turn", "river"];
const SMALL_BLIND: u32 = 1;
const BIG_BLIND: u32 = 2;

fn board_cards_for_round(round: usize) -> usize {
    match round {
        0 => 0,
        1 => 3,
        2 => 4,
        _ => 5,
    }
}

/// Observation fields for Limit Hold'em.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitView {
    pub round: String,
    pub position: u32,
    pub hole_cards: Vec<String>,
    pub community_cards: Vec<String>,
    pub my_chips: u32,
    pub pot: u32,
    pub num_raises: u32,
    pub history: Vec<(u32, String)>,
}

#[derive(Debug, Clone)]
pub struct LimitState {
    holes: [[Card; 2]; 2],
    board: [Card; 5],
    undealt: Vec<Card>,
    dealer: usize,
    round: usize,
    committed: [u32; 2],
    round_bets: [u32; 2],
    acted: [bool; 2],
    raises_this_round: u32,
    total_raises: u32,
    to_act: usize,
    history: Vec<(usize, LeducAction)>,
    outcome: Option<[i64; 2]>,
}

const LIMIT_RAISE_CAP: u32 = 4;

impl LimitState {
    pub fn new(rng: &mut ChaCha8Rng, dealer: usize) -> LimitState {
        let mut deck = build_deck(Game::LimitHoldem);
        deck.shuffle(rng);
        let holes = [[deck[0], deck[1]], [deck[2], deck[3]]];
        let board = [deck[4], deck[5], deck[6], deck[7], deck[8]];
        Self::with_deal(holes, board, deck[9..].to_vec(), dealer)
    }

    pub fn with_deal(
        holes: [[Card; 2]; 2],
        board: [Card; 5],
        undealt: Vec<Card>,
        dealer: usize,
    ) -> LimitState {
        let mut committed = [0u32; 2];
        committed[dealer] = SMALL_BLIND;
        committed[1 - dealer] = BIG_BLIND;
        LimitState {
            holes,
            board,
            undealt,
            dealer,
            round: 0,
            round_bets: committed,
            committed,
            acted: [false; 2],
            raises_this_round: 0,
            total_raises: 0,
            to_act: dealer,
            history: Vec::new(),
            outcome: None,
        }
    }

    fn raise_size(&self) -> u32 {
        if self.round < 2 {
            2
        } else {
            4
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
        let owed = self.round_bets[1 - self.to_act].saturating_sub(self.round_bets[self.to_act]);
        let mut actions = Vec::with_capacity(3);
        actions.push(if owed > 0 { LeducAction::Call } else { LeducAction::Check });
        if self.raises_this_round < LIMIT_RAISE_CAP {
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
        let owed = self.round_bets[1 - seat] - self.round_bets[seat];
        match action {
            LeducAction::Fold => {
                let loss = self.committed[seat] as i64;
                let mut outcome = [0i64; 2];
                outcome[seat] = -loss;
                outcome[1 - seat] = loss;
                self.outcome = Some(outcome);
                return Ok(());
            }
            LeducAction::Check => {
                self.acted[seat] = true;
            }
            LeducAction::Call => {
                self.round_bets[seat] += owed;
                self.committed[seat] += owed;
                self.acted[seat] = true;
            }
            LeducAction::Raise => {
                let amount = owed + self.raise_size();
                self.round_bets[seat] += amount;
                self.committed[seat] += amount;
                self.raises_this_round += 1;
                self.total_raises += 1;
                self.acted[seat] = true;
            }
        }
        if self.round_bets[0] == self.round_bets[1] && self.acted[0] && self.acted[1] {
            self.advance_round();
        } else {
            self.to_act = 1 - seat;
        }
        Ok(())
    }

    fn advance_round(&mut self) {
        if self.round == 3 {
            self.showdown();
            return;
        }
        self.round += 1;
        self.round_bets = [0, 0];
        self.acted = [false, false];
        self.raises_this_round = 0;
        self.to_act = 1 - self.dealer;
    }

    fn showdown(&mut self) {
        let rank = |seat: usize| {
            let mut cards = self.holes[seat].to_vec();
            cards.extend_from_slice(&self.board);
            evaluate_hand(&cards).expect("7 distinct french cards")
        };
        let (a, b) = (rank(0), rank(1));
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

    pub fn payoffs(&self) -> Option<Vec<f64>> {
        self.outcome
            .map(|o| o.iter().map(|chips| *chips as f64 / 2.0).collect())
    }

    pub fn observe(&self, seat: usize) -> LimitView {
        LimitView {
            round: ROUND_NAMES[self.round].to_string(),
            position: seat as u32,
            hole_cards: self.holes[seat].iter().map(|c| format_card(*c)).collect(),
            community_cards: self.board[..board_cards_for_round(self.round)]
                .iter()
                .map(|c| format_card(*c))
                .collect(),
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

    pub fn all_cards(&self) -> Vec<Card> {
        let mut cards: Vec<Card> = self.holes.iter().flatten().copied().collect();
        cards.extend_from_slice(&self.board);
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NlAction {
    Fold,
    CheckCall,
    RaiseHalfPot,
    RaisePot,
    AllIn,
}

pub const NL_ACTION_SPACE: [NlAction; 5] = [
    NlAction::Fold,
    NlAction::CheckCall,
    NlAction::RaiseHalfPot,
    NlAction::RaisePot,
    NlAction::AllIn,
];

impl NlAction {
    pub fn as_str(&self) -> &'static str {
        match self {
            NlAction::Fold => "FOLD",
            NlAction::CheckCall => "CHECK_CALL",
            NlAction::RaiseHalfPot => "RAISE_HALF_POT",
            NlAction::RaisePot => "RAISE_POT",
            NlAction::AllIn => "ALL_IN",
        }
    }

    pub fn from_str(s: &str) -> Option<NlAction> {
        match s {
            "FOLD" => Some(NlAction::Fold),
            "CHECK_CALL" => Some(NlAction::CheckCall),
            "RAISE_HALF_POT" => Some(NlAction::RaiseHalfPot),
            "RAISE_POT" => Some(NlAction::RaisePot),
            "ALL_IN" => Some(NlAction::AllIn),
            _ => None,
        }
    }
}

/// Observation fields for No-limit Hold'em.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoLimitView {
    pub round: String,
    pub position: u32,
    pub hole_cards: Vec<String>,
    pub community_cards: Vec<String>,
    pub my_chips: u32,
    pub all_chips: Vec<u32>,
    pub pot: u32,
    pub stakes: Vec<u32>,
    pub history: Vec<(u32, String)>,
}

pub const NL_STARTING_STACK: u32 = 100;

#[derive(Debug, Clone)]
pub struct NoLimitState {
    holes: [[Card; 2]; 2],
    board: [Card; 5],
    undealt: Vec<Card>,
    dealer: usize,
    round: usize,
    committed: [u32; 2],
    stacks: [u32; 2],
    round_bets: [u32; 2],
    acted: [bool; 2],
    last_raise_size: u32,
    to_act: usize,
    history: Vec<(usize, NlAction)>,
    outcome: Option<[i64; 2]>,
}

impl NoLimitState {
    pub fn new(rng: &mut ChaCha8Rng, dealer: usize) -> NoLimitState {
        let mut deck = build_deck(Game::NoLimitHoldem);
        deck.shuffle(rng);
        let holes = [[deck[0], deck[1]], [deck[2], deck[3]]];
        let board = [deck[4], deck[5], deck[6], deck[7], deck[8]];
        Self::with_deal(holes, board, deck[9..].to_vec(), dealer)
    }

    pub fn with_deal(
        holes: [[Card; 2]; 2],
        board: [Card; 5],
        undealt: Vec<Card>,
        dealer: usize,
    ) -> NoLimitState {
        let mut committed = [0u32; 2];
        committed[dealer] = SMALL_BLIND;
        committed[1 - dealer] = BIG_BLIND;
        let mut stacks = [NL_STARTING_STACK; 2];
        stacks[dealer] -= SMALL_BLIND;
        stacks[1 - dealer] -= BIG_BLIND;
        NoLimitState {
            holes,
            board,
            undealt,
            dealer,
            round: 0,
            round_bets: committed,
            committed,
            stacks,
            acted: [false; 2],
            last_raise_size: BIG_BLIND,
            to_act: dealer,
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

    fn owed(&self, seat: usize) -> u32 {
        self.round_bets[1 - seat].saturating_sub(self.round_bets[seat])
    }

    /// Chips beyond the call that a named raise would add, before the
    /// min-raise floor and all-in collapse.
    fn pot_raise_extra(&self, seat: usize, action: NlAction) -> u32 {
        let pot_after_call: u32 = self.committed.iter().sum::<u32>() + self.owed(seat);
        match action {
            NlAction::RaiseHalfPot => pot_after_call.div_ceil(2),
            NlAction::RaisePot => pot_after_call,
            _ => 0,
        }
    }

    /// Resolve a named raise into (extra beyond call, collapses to all-in).
    fn resolve_raise(&self, seat: usize, action: NlAction) -> (u32, bool) {
        let owed = self.owed(seat);
        let extra = self.pot_raise_extra(seat, action).max(self.last_raise_size);
        if owed + extra >= self.stacks[seat] {
            (self.stacks[seat] - owed, true)
        } else {
            (extra, false)
        }
    }

    pub fn legal_actions(&self) -> Vec<NlAction> {
        if self.is_terminal() {
            return Vec::new();
        }
        let seat = self.to_act;
        let owed = self.owed(seat);
        let mut actions = vec![NlAction::Fold, NlAction::CheckCall];
        if self.stacks[seat] > owed {
            for named in [NlAction::RaiseHalfPot, NlAction::RaisePot] {
                let (_, is_all_in) = self.resolve_raise(seat, named);
                if !is_all_in {
                    actions.push(named);
                }
            }
            actions.push(NlAction::AllIn);
        }
        actions
    }

    pub fn apply(&mut self, action: NlAction) -> Result<(), EngineError> {
        if !self.legal_actions().contains(&action) {
            return Err(EngineError::IllegalAction {
                seat: self.to_act,
                action: action.as_str().to_string(),
            });
        }
        let seat = self.to_act;
        self.history.push((seat, action));
        let owed = self.owed(seat);
        match action {
            NlAction::Fold => {
                let loss = self.committed[seat] as i64;
                let mut outcome = [0i64; 2];
                outcome[seat] = -loss;
                outcome[1 - seat] = loss;
                self.outcome = Some(outcome);
                return Ok(());
            }
            NlAction::CheckCall => {
                self.pay(seat, owed);
                self.acted[seat] = true;
            }
            NlAction::RaiseHalfPot | NlAction::RaisePot | NlAction::AllIn => {
                let extra = if action == NlAction::AllIn {
                    self.stacks[seat] - owed
                } else {
                    self.resolve_raise(seat, action).0
                };
                self.pay(seat, owed + extra);
                self.last_raise_size = self.last_raise_size.max(extra);
                self.acted[seat] = true;
            }
        }
        if self.round_bets[0] == self.round_bets[1] && self.acted[0] && self.acted[1] {
            self.advance_round();
        } else {
            self.to_act = 1 - seat;
        }
        Ok(())
    }

    fn pay(&mut self, seat: usize, amount: u32) {
        debug_assert!(amount <= self.stacks[seat]);
        self.stacks[seat] -= amount;
        self.round_bets[seat] += amount;
        self.committed[seat] += amount;
    }

    fn advance_round(&mut self) {
        if self.round == 3 {
            self.showdown();
            return;
        }
        self.round += 1;
        self.round_bets = [0, 0];
        self.acted = [false, false];
        self.last_raise_size = BIG_BLIND;
        self.to_act = 1 - self.dealer;
        // Nobody can act once a stack is empty: run out the board.
        if self.stacks.iter().any(|s| *s == 0) {
            self.advance_round();
        }
    }

    fn showdown(&mut self) {
        let rank = |seat: usize| {
            let mut cards = self.holes[seat].to_vec();
            cards.extend_from_slice(&self.board);
            evaluate_hand(&cards).expect("7 distinct french cards")
        };
        let (a, b) = (rank(0), rank(1));
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

    /// Net chips divided by the big blind.
    pub fn payoffs(&self) -> Option<Vec<f64>> {
        self.outcome
            .map(|o| o.iter().map(|chips| *chips as f64 / BIG_BLIND as f64).collect())
    }

    pub fn observe(&self, seat: usize) -> NoLimitView {
        NoLimitView {
            round: ROUND_NAMES[self.round].to_string(),
            position: seat as u32,
            hole_cards: self.holes[seat].iter().map(|c| format_card(*c)).collect(),
            community_cards: self.board[..board_cards_for_round(self.round)]
                .iter()
                .map(|c| format_card(*c))
                .collect(),
            my_chips: self.committed[seat],
            all_chips: self.committed.to_vec(),
            pot: self.committed.iter().sum(),
            stakes: self.stacks.to_vec(),
            history: self
                .history
                .iter()
                .map(|(s, a)| (*s as u32, a.as_str().to_string()))
                .collect(),
        }
    }

    pub fn all_cards(&self) -> Vec<Card> {
        let mut cards: Vec<Card> = self.holes.iter().flatten().copied().collect();
        cards.extend_from_slice(&self.board);
        cards.extend(&self.undealt);
        cards
    }

    pub fn committed(&self) -> [u32; 2] {
        self.committed
    }

    pub fn stacks(&self) -> [u32; 2] {
        self.stacks
    }

    pub fn step_count(&self) -> u32 {
        self.history.len() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_card;
    use crate::engine::match_rng;

    fn cards(list: &[&str]) -> Vec<Card> {
        list.iter().map(|n| parse_card(n).unwrap()).collect()
    }

    fn limit_fixed(dealer: usize) -> LimitState {
        let deck = build_deck(Game::LimitHoldem);
        LimitState::with_deal(
            [[deck[0], deck[1]], [deck[2], deck[3]]],
            [deck[4], deck[5], deck[6], deck[7], deck[8]],
            deck[9..].to_vec(),
            dealer,
        )
    }

    fn nl_fixed(dealer: usize) -> NoLimitState {
        let deck = build_deck(Game::NoLimitHoldem);
        NoLimitState::with_deal(
            [[deck[0], deck[1]], [deck[2], deck[3]]],
            [deck[4], deck[5], deck[6], deck[7], deck[8]],
            deck[9..].to_vec(),
            dealer,
        )
    }

    #[test]
    fn blinds_posted_and_dealer_acts_first_preflop() {
        let s = limit_fixed(0);
        assert_eq!(s.committed(), [1, 2]);
        assert_eq!(s.seat_to_act(), 0);
        let s = limit_fixed(1);
        assert_eq!(s.committed(), [2, 1]);
        assert_eq!(s.seat_to_act(), 1);
    }

    #[test]
    fn big_blind_has_the_option_preflop() {
        let mut s = limit_fixed(0);
        s.apply(LeducAction::Call).unwrap();
        // Round must not close: the big blind still gets to act.
        assert_eq!(s.seat_to_act(), 1);
        assert!(s.legal_actions().contains(&LeducAction::Check));
        s.apply(LeducAction::Check).unwrap();
        assert_eq!(s.observe(0).round, "flop");
        assert_eq!(s.observe(0).community_cards.len(), 3);
        assert_eq!(s.seat_to_act(), 1); // non-dealer first post-flop
    }

    #[test]
    fn limit_raise_sizes_by_street() {
        let mut s = limit_fixed(0);
        s.apply(LeducAction::Raise).unwrap(); // pre-flop: to 4 (owed 1 + size 2)
        assert_eq!(s.committed(), [4, 2]);
        s.apply(LeducAction::Call).unwrap();
        assert_eq!(s.observe(0).round, "flop");
        s.apply(LeducAction::Raise).unwrap(); // flop size 2
        assert_eq!(s.committed(), [4, 6]);
        s.apply(LeducAction::Call).unwrap();
        s.apply(LeducAction::Raise).unwrap(); // turn size 4
        assert_eq!(s.committed(), [6, 10]);
    }

    #[test]
    fn limit_caps_raises_at_four_per_round() {
        let mut s = limit_fixed(0);
        for _ in 0..4 {
            s.apply(LeducAction::Raise).unwrap();
        }
        assert_eq!(
            s.legal_actions(),
            vec![LeducAction::Call, LeducAction::Fold]
        );
    }

    #[test]
    fn limit_showdown_and_zero_sum() {
        let mut s = LimitState::with_deal(
            [
                [parse_card("SA").unwrap(), parse_card("HA").unwrap()],
                [parse_card("S2").unwrap(), parse_card("H7").unwrap()],
            ],
            cards(&["CA", "DA", "C5", "D9", "CK"]).try_into().unwrap(),
            vec![],
            0,
        );
        while !s.is_terminal() {
            let legal = s.legal_actions();
            let action = if legal.contains(&LeducAction::Call) {
                LeducAction::Call
            } else {
                LeducAction::Check
            };
            s.apply(action).unwrap();
        }
        let p = s.payoffs().unwrap();
        assert_eq!(p, vec![1.0, -1.0]); // quad aces win the 4-chip pot
        assert_eq!(p[0] + p[1], 0.0);
    }

    #[test]
    fn nl_half_pot_raise_arithmetic() {
        // Spec example shape: pot 10 after calling -> raise 5 above the call.
        let mut s = nl_fixed(0);
        s.apply(NlAction::CheckCall).unwrap(); // pot 4
        s.apply(NlAction::CheckCall).unwrap(); // flop, pot 4
        s.apply(NlAction::RaisePot).unwrap(); // seat1 bets 4, pot 8
        assert_eq!(s.committed(), [2, 6]);
        // seat0: owed 4, pot after call 12 -> half = 6
        s.apply(NlAction::RaiseHalfPot).unwrap();
        assert_eq!(s.committed(), [12, 6]);
    }

    #[test]
    fn nl_min_raise_floor() {
        let mut s = nl_fixed(0);
        // Pre-flop pot 3, owed 1, pot after call 4 -> half-pot = 2 which
        // meets the min-raise (big blind 2) exactly.
        s.apply(NlAction::RaiseHalfPot).unwrap();
        assert_eq!(s.committed(), [4, 2]);
        // seat1: owed 2, pot after call 8 -> half = 4, above min-raise 2.
        s.apply(NlAction::RaiseHalfPot).unwrap();
        assert_eq!(s.committed(), [4, 8]);
    }

    #[test]
    fn nl_all_in_collapse_and_dedup() {
        let mut s = nl_fixed(0);
        s.apply(NlAction::AllIn).unwrap();
        assert_eq!(s.committed(), [100, 2]);
        assert_eq!(s.stacks(), [0, 98]);
        // Facing the all-in: no raise can exceed it, only fold/call remain.
        assert_eq!(s.legal_actions(), vec![NlAction::Fold, NlAction::CheckCall]);
        s.apply(NlAction::CheckCall).unwrap();
        // Board runs out, hand resolves with no further decisions.
        assert!(s.is_terminal());
        let p = s.payoffs().unwrap();
        assert_eq!(p[0] + p[1], 0.0);
        assert!(p[0].abs() == 50.0 || p[0] == 0.0);
    }

    #[test]
    fn nl_pot_raises_collapse_near_all_in() {
        let mut s = nl_fixed(0);
        s.apply(NlAction::RaisePot).unwrap(); // owed 1, pot after call 4 -> call + 4
        assert_eq!(s.committed(), [6, 2]);
        s.apply(NlAction::RaisePot).unwrap(); // owed 4, pot after call 12 -> call + 12
        assert_eq!(s.committed(), [6, 18]);
        s.apply(NlAction::RaisePot).unwrap(); // owed 12, pot after call 36 -> call + 36
        assert_eq!(s.committed(), [54, 18]);
        // seat1: owed 36, stack 82; even half pot (54 extra) would exceed the
        // stack, so both named raises collapse into ALL_IN.
        assert_eq!(
            s.legal_actions(),
            vec![NlAction::Fold, NlAction::CheckCall, NlAction::AllIn]
        );
    }

    #[test]
    fn nl_chip_conservation() {
        let mut rng = match_rng(5, 3);
        let mut s = NoLimitState::new(&mut rng, 1);
        use rand::Rng;
        while !s.is_terminal() {
            let legal = s.legal_actions();
            let action = legal[rng.gen_range(0..legal.len())];
            s.apply(action).unwrap();
            let total: u32 = s.committed().iter().sum::<u32>() + s.stacks().iter().sum::<u32>();
            assert_eq!(total, 200);
        }
    }

    #[test]
    fn deals_are_deterministic_per_seed() {
        let a = LimitState::new(&mut match_rng(9, 4), 0);
        let b = LimitState::new(&mut match_rng(9, 4), 0);
        assert_eq!(a.observe(0).hole_cards, b.observe(0).hole_cards);
        assert_eq!(a.all_cards(), b.all_cards());
    }
}

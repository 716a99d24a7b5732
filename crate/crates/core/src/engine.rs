//! Shared engine machinery: errors, deterministic per-match seeding, and
//! the [`GameState`] facade dispatching to the per-game engines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{parse_card, Game};
use crate::dou::combo::DOU_RANK_INTS;
use crate::dou::{DouAction, DouState, DouView};
use crate::gin::{GinAction, GinState, GinView};
use crate::guandan::combo::{interpret_guan_wire, GuanType};
use crate::guandan::{
    guan_action_value, GuanAction, GuanMode, GuanSettings, GuanState, GuanView,
};
use crate::poker::holdem::{LimitState, LimitView, NlAction, NoLimitState, NoLimitView};
use crate::poker::leduc::{LeducAction, LeducState, LeducView};
use crate::uno::{UnoAction, UnoState, UnoView};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("unsupported game: {0}")]
    UnsupportedGame(String),
    #[error("illegal action {action:?} for seat {seat}")]
    IllegalAction { seat: usize, action: String },
    #[error("action family does not match the running game")]
    ActionMismatch,
    #[error("state is terminal")]
    TerminalState,
    #[error("state is not terminal")]
    NonTerminal,
}

/// splitmix64 finalizer; mixes a base seed with a match index into an
/// independent, platform-stable RNG stream per match.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn match_rng(base_seed: u64, match_index: u64) -> ChaCha8Rng {
    let stream = mix(base_seed ^ mix(match_index));
    ChaCha8Rng::seed_from_u64(stream)
}

/// An action in any of the seven games. Leduc and Limit Hold'em share the
/// four-move betting vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Dou(DouAction),
    Guan(GuanAction),
    Uno(UnoAction),
    Gin(GinAction),
    Bet(LeducAction),
    NoLimit(NlAction),
}

impl Action {
    /// Canonical wire text, matching each game's action notation.
    pub fn wire(&self) -> String {
        match self {
            Action::Dou(DouAction::Pass) => "[]".to_string(),
            Action::Dou(DouAction::Play(cards)) => {
                let ints: Vec<i64> = cards.iter().map(|c| *c as i64).collect();
                serde_json::to_string(&ints).expect("numbers serialize")
            }
            Action::Guan(action) => guan_action_value(action).to_string(),
            Action::Uno(action) => action.as_wire(),
            Action::Gin(action) => action.as_wire(),
            Action::Bet(action) => action.as_str().to_string(),
            Action::NoLimit(action) => action.as_str().to_string(),
        }
    }
}

/// A per-seat observation: the game, the seat it belongs to, and the
/// game-specific fields.
#[derive(Debug, Clone)]
pub struct Observation {
    pub game: Game,
    pub seat: usize,
    pub view: View,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "game", content = "fields", rename_all = "snake_case")]
pub enum View {
    Dou(DouView),
    Guan(GuanView),
    Uno(UnoView),
    Gin(GinView),
    Leduc(LeducView),
    Limit(LimitView),
    NoLimit(NoLimitView),
}

/// A running match of any supported game, seeded deterministically.
#[derive(Debug, Clone)]
pub enum GameState {
    Doudizhu(DouState),
    Guandan(GuanState),
    Uno(UnoState),
    GinRummy(GinState),
    Leduc(LeducState),
    LimitHoldem(LimitState),
    NoLimitHoldem(NoLimitState),
}

impl GameState {
    /// Start the data-generation unit for `game`: one deal (a single
    /// scored deal for Guandan). Two-player games alternate the dealer
    /// with the match index.
    pub fn reset(game: Game, base_seed: u64, match_index: u64) -> GameState {
        Self::reset_with_guandan_mode(game, base_seed, match_index, GuanMode::SingleDeal)
    }

    /// Start the evaluation unit: identical to [`GameState::reset`] except
    /// that Guandan runs a full match to a win at level A.
    pub fn reset_for_eval(game: Game, base_seed: u64, match_index: u64) -> GameState {
        Self::reset_with_guandan_mode(game, base_seed, match_index, GuanMode::FullMatch)
    }

    fn reset_with_guandan_mode(
        game: Game,
        base_seed: u64,
        match_index: u64,
        guan_mode: GuanMode,
    ) -> GameState {
        let mut rng = match_rng(base_seed, match_index);
        let dealer = (match_index % 2) as usize;
        match game {
            Game::Doudizhu => GameState::Doudizhu(DouState::new(&mut rng)),
            Game::Guandan => {
                let settings = GuanSettings { mode: guan_mode, ..GuanSettings::default() };
                GameState::Guandan(GuanState::new(&mut rng, settings))
            }
            Game::Uno => GameState::Uno(UnoState::new(rng)),
            Game::GinRummy => GameState::GinRummy(GinState::new(&mut rng, dealer)),
            Game::Leduc => GameState::Leduc(LeducState::new(&mut rng, dealer)),
            Game::LimitHoldem => GameState::LimitHoldem(LimitState::new(&mut rng, dealer)),
            Game::NoLimitHoldem => GameState::NoLimitHoldem(NoLimitState::new(&mut rng, dealer)),
        }
    }

    pub fn game(&self) -> Game {
        match self {
            GameState::Doudizhu(_) => Game::Doudizhu,
            GameState::Guandan(_) => Game::Guandan,
            GameState::Uno(_) => Game::Uno,
            GameState::GinRummy(_) => Game::GinRummy,
            GameState::Leduc(_) => Game::Leduc,
            GameState::LimitHoldem(_) => Game::LimitHoldem,
            GameState::NoLimitHoldem(_) => Game::NoLimitHoldem,
        }
    }

    pub fn num_seats(&self) -> usize {
        self.game().num_seats()
    }

    pub fn is_terminal(&self) -> bool {
        match self {
            GameState::Doudizhu(s) => s.is_terminal(),
            GameState::Guandan(s) => s.is_terminal(),
            GameState::Uno(s) => s.is_terminal(),
            GameState::GinRummy(s) => s.is_terminal(),
            GameState::Leduc(s) => s.is_terminal(),
            GameState::LimitHoldem(s) => s.is_terminal(),
            GameState::NoLimitHoldem(s) => s.is_terminal(),
        }
    }

    pub fn seat_to_act(&self) -> usize {
        match self {
            GameState::Doudizhu(s) => s.to_act(),
            GameState::Guandan(s) => s.to_act(),
            GameState::Uno(s) => s.seat_to_act(),
            GameState::GinRummy(s) => s.seat_to_act(),
            GameState::Leduc(s) => s.seat_to_act(),
            GameState::LimitHoldem(s) => s.seat_to_act(),
            GameState::NoLimitHoldem(s) => s.seat_to_act(),
        }
    }

    pub fn step_count(&self) -> u32 {
        match self {
            GameState::Doudizhu(s) => s.step_count(),
            GameState::Guandan(s) => s.step_count(),
            GameState::Uno(s) => s.step_count(),
            GameState::GinRummy(s) => s.step_count(),
            GameState::Leduc(s) => s.step_count(),
            GameState::LimitHoldem(s) => s.step_count(),
            GameState::NoLimitHoldem(s) => s.step_count(),
        }
    }

    pub fn legal_actions(&self) -> Vec<Action> {
        match self {
            GameState::Doudizhu(s) => s.legal_actions().into_iter().map(Action::Dou).collect(),
            GameState::Guandan(s) => s.legal_actions().into_iter().map(Action::Guan).collect(),
            GameState::Uno(s) => s.legal_actions().into_iter().map(Action::Uno).collect(),
            GameState::GinRummy(s) => s.legal_actions().into_iter().map(Action::Gin).collect(),
            GameState::Leduc(s) => s.legal_actions().into_iter().map(Action::Bet).collect(),
            GameState::LimitHoldem(s) => s.legal_actions().into_iter().map(Action::Bet).collect(),
            GameState::NoLimitHoldem(s) => {
                s.legal_actions().into_iter().map(Action::NoLimit).collect()
            }
        }
    }

    pub fn apply(&mut self, action: &Action) -> Result<(), EngineError> {
        match (self, action) {
            (GameState::Doudizhu(s), Action::Dou(a)) => s.apply(a),
            (GameState::Guandan(s), Action::Guan(a)) => s.apply(a),
            (GameState::Uno(s), Action::Uno(a)) => s.apply(*a),
            (GameState::GinRummy(s), Action::Gin(a)) => s.apply(*a),
            (GameState::Leduc(s), Action::Bet(a)) => s.apply(*a),
            (GameState::LimitHoldem(s), Action::Bet(a)) => s.apply(*a),
            (GameState::NoLimitHoldem(s), Action::NoLimit(a)) => s.apply(*a),
            _ => Err(EngineError::ActionMismatch),
        }
    }

    /// Terminal rewards, one per seat, in each game's reward unit.
    pub fn payoffs(&self) -> Result<Vec<f64>, EngineError> {
        match self {
            GameState::Doudizhu(s) => Ok(s.payoffs()?.iter().map(|p| *p as f64).collect()),
            GameState::Guandan(s) => Ok(s.payoffs()?.iter().map(|p| *p as f64).collect()),
            GameState::Uno(s) => s.payoffs().ok_or(EngineError::NonTerminal),
            GameState::GinRummy(s) => s.payoffs().ok_or(EngineError::NonTerminal),
            GameState::Leduc(s) => s.payoffs().ok_or(EngineError::NonTerminal),
            GameState::LimitHoldem(s) => s.payoffs().ok_or(EngineError::NonTerminal),
            GameState::NoLimitHoldem(s) => s.payoffs().ok_or(EngineError::NonTerminal),
        }
    }

    /// Whether the seat ended with a strictly positive reward.
    pub fn is_winner(&self, seat: usize) -> Result<bool, EngineError> {
        Ok(self.payoffs()?[seat] > 0.0)
    }

    /// Guandan only: the seat that emptied its hand first in the latest
    /// finished deal. `None` for other games or before any deal ends.
    pub fn first_finisher(&self) -> Option<usize> {
        match self {
            GameState::Guandan(s) => s.first_finisher(),
            _ => None,
        }
    }

    /// Guandan only: the team that won each completed deal so far, in
    /// order. Empty for other games.
    pub fn deal_winning_teams(&self) -> &[usize] {
        match self {
            GameState::Guandan(s) => s.deal_results(),
            _ => &[],
        }
    }

    pub fn observe(&self, seat: usize) -> Observation {
        let view = match self {
            GameState::Doudizhu(s) => View::Dou(s.observe(seat)),
            GameState::Guandan(s) => View::Guan(s.observe(seat)),
            GameState::Uno(s) => View::Uno(s.observe(seat)),
            GameState::GinRummy(s) => View::Gin(s.observe(seat)),
            GameState::Leduc(s) => View::Leduc(s.observe(seat)),
            GameState::LimitHoldem(s) => View::Limit(s.observe(seat)),
            GameState::NoLimitHoldem(s) => View::NoLimit(s.observe(seat)),
        };
        Observation { game: self.game(), seat, view }
    }

    /// Parse an action from its wire text in the context of this state
    /// (Guandan decoding needs the level in force).
    pub fn decode_action(&self, text: &str) -> Option<Action> {
        match self {
            GameState::Doudizhu(_) => decode_dou_wire(text).map(Action::Dou),
            GameState::Guandan(s) => {
                decode_guan_wire(text, s).map(Action::Guan)
            }
            GameState::Uno(_) => UnoAction::from_wire(text).map(Action::Uno),
            GameState::GinRummy(_) => GinAction::from_wire(text).map(Action::Gin),
            GameState::Leduc(_) | GameState::LimitHoldem(_) => {
                LeducAction::from_str(text).map(Action::Bet)
            }
            GameState::NoLimitHoldem(_) => NlAction::from_str(text).map(Action::NoLimit),
        }
    }
}

fn decode_dou_wire(text: &str) -> Option<DouAction> {
    let ints: Vec<i64> = serde_json::from_str(text).ok()?;
    if ints.is_empty() {
        return Some(DouAction::Pass);
    }
    let mut cards = Vec::with_capacity(ints.len());
    for int in ints {
        let card = u8::try_from(int).ok()?;
        if !DOU_RANK_INTS.contains(&card) {
            return None;
        }
        cards.push(card);
    }
    cards.sort_unstable();
    Some(DouAction::Play(cards))
}

fn decode_guan_wire(text: &str, state: &GuanState) -> Option<GuanAction> {
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    let parts = value.as_array()?;
    if parts.len() != 3 {
        return None;
    }
    let tag = parts[0].as_str()?;
    if tag == "PASS" {
        return (parts[1] == "PASS" && parts[2] == "PASS").then_some(GuanAction::Pass);
    }
    if tag == "tribute" || tag == "back" {
        let cards = parts[2].as_array()?;
        if cards.len() != 1 {
            return None;
        }
        let card = parse_card(cards[0].as_str()?).ok()?;
        return Some(if tag == "tribute" {
            GuanAction::Tribute(card)
        } else {
            GuanAction::Back(card)
        });
    }
    let ty = GuanType::from_str(tag)?;
    let rank_text = parts[1].as_str()?;
    let mut rank_chars = rank_text.chars();
    let rank_ch = rank_chars.next()?;
    if rank_chars.next().is_some() {
        return None;
    }
    let mut cards = Vec::new();
    for value in parts[2].as_array()? {
        cards.push(parse_card(value.as_str()?).ok()?);
    }
    let combo = interpret_guan_wire(ty, rank_ch, &cards, state.level_context())?;
    Some(GuanAction::Play(combo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::{Game, ALL_GAMES};
    use rand::RngCore;

    #[test]
    fn match_rng_is_deterministic_and_distinct() {
        let mut a = match_rng(7, 0);
        let mut b = match_rng(7, 0);
        assert_eq!(a.next_u64(), b.next_u64());

        let mut c = match_rng(7, 1);
        let mut d = match_rng(8, 0);
        let base = match_rng(7, 0).next_u64();
        assert_ne!(base, c.next_u64());
        assert_ne!(base, d.next_u64());
    }

    #[test]
    fn unsupported_game_message() {
        let err = Game::from_str("mahjong").unwrap_err();
        assert!(err.contains("unsupported"));
    }

    #[test]
    fn reset_is_deterministic_per_seed_and_index() {
        for game in ALL_GAMES {
            let a = GameState::reset(game, 11, 3);
            let b = GameState::reset(game, 11, 3);
            assert_eq!(format!("{:?}", a.observe(0).view), format!("{:?}", b.observe(0).view));
            assert_eq!(a.seat_to_act(), b.seat_to_act());

            let c = GameState::reset(game, 11, 4);
            assert_ne!(
                format!("{a:?}"),
                format!("{c:?}"),
                "{game}: different matches must differ"
            );
        }
    }

    #[test]
    fn two_player_games_alternate_the_dealer() {
        // Leduc: the non-dealer acts first, so the opener alternates.
        let a = GameState::reset(Game::Leduc, 5, 0);
        let b = GameState::reset(Game::Leduc, 5, 1);
        assert_eq!(a.seat_to_act(), 1);
        assert_eq!(b.seat_to_act(), 0);
        // Hold'em: the dealer acts first pre-flop.
        let a = GameState::reset(Game::LimitHoldem, 5, 0);
        let b = GameState::reset(Game::LimitHoldem, 5, 1);
        assert_eq!(a.seat_to_act(), 0);
        assert_eq!(b.seat_to_act(), 1);
    }

    #[test]
    fn legal_actions_decode_from_their_own_wire_text() {
        for game in ALL_GAMES {
            let state = GameState::reset(game, 21, 2);
            let legal = state.legal_actions();
            assert!(!legal.is_empty());
            for action in &legal {
                let wire = action.wire();
                let decoded = state.decode_action(&wire);
                assert_eq!(decoded.as_ref(), Some(action), "{game}: {wire}");
            }
        }
    }

    #[test]
    fn mismatched_action_family_is_rejected() {
        let mut state = GameState::reset(Game::Uno, 1, 0);
        let err = state.apply(&Action::Bet(LeducAction::Check)).unwrap_err();
        assert_eq!(err, EngineError::ActionMismatch);
    }

    #[test]
    fn facade_runs_a_full_match_of_each_game() {
        use rand::Rng;
        for game in ALL_GAMES {
            let mut state = GameState::reset(game, 33, 7);
            let mut rng = match_rng(34, 7);
            let mut steps = 0;
            while !state.is_terminal() {
                let legal = state.legal_actions();
                assert!(!legal.is_empty(), "{game}");
                let action = legal[rng.gen_range(0..legal.len())].clone();
                state.apply(&action).unwrap();
                steps += 1;
                assert!(steps < 3000, "{game}: runaway");
            }
            let payoffs = state.payoffs().unwrap();
            assert_eq!(payoffs.len(), state.num_seats(), "{game}");
            assert!(state.legal_actions().is_empty());
        }
    }
}

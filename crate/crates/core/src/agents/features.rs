//! Fixed-width numeric encodings of poker observations for Q-networks.

use crate::cards::{parse_card, Card, Game, ALL_SUITS};
use crate::engine::{EngineError, Observation, View};
use crate::poker::holdem::{LimitView, NoLimitView, NL_STARTING_STACK, ROUND_NAMES};
use crate::poker::leduc::LeducView;

pub const LEDUC_FEATURE_WIDTH: usize = 11;
pub const LIMIT_FEATURE_WIDTH: usize = 110;
pub const NOLIMIT_FEATURE_WIDTH: usize = 112;

/// Chip scaling constants keep inputs in a small range; the exact divisor
/// is arbitrary but fixed.
const LEDUC_CHIP_SCALE: f64 = 14.0;
const LIMIT_CHIP_SCALE: f64 = 50.0;
const NOLIMIT_CHIP_SCALE: f64 = NL_STARTING_STACK as f64;
const LEDUC_RAISE_SCALE: f64 = 4.0;

pub fn feature_width(game: Game) -> Result<usize, EngineError> {
    match game {
        Game::Leduc => Ok(LEDUC_FEATURE_WIDTH),
        Game::LimitHoldem => Ok(LIMIT_FEATURE_WIDTH),
        Game::NoLimitHoldem => Ok(NOLIMIT_FEATURE_WIDTH),
        other => Err(EngineError::UnsupportedGame(format!(
            "{other} has no feature encoding"
        ))),
    }
}

/// Encode a poker observation as a fixed-width vector:
/// Leduc = own-rank one-hot (3) + board one-hot J/Q/K/none (4) + round
/// flag (1) + scaled committed chips, own then opponent (2) + scaled raise
/// count (1); Limit = 52-hot hole + 52-hot board + round one-hot (4) +
/// scaled chips (2); No-limit adds scaled remaining stacks (2).
pub fn encode_features(obs: &Observation) -> Result<Vec<f64>, EngineError> {
    match &obs.view {
        View::Leduc(view) => Ok(encode_leduc(view)),
        View::Limit(view) => Ok(encode_limit(view)),
        View::NoLimit(view) => Ok(encode_nolimit(view)),
        _ => Err(EngineError::UnsupportedGame(format!(
            "{} has no feature encoding",
            obs.game
        ))),
    }
}

fn leduc_rank_slot(text: &str) -> usize {
    match text {
        "J" => 0,
        "Q" => 1,
        "K" => 2,
        _ => 3,
    }
}

fn encode_leduc(view: &LeducView) -> Vec<f64> {
    let mut features = vec![0.0; LEDUC_FEATURE_WIDTH];
    features[leduc_rank_slot(&view.hand)] = 1.0;
    features[3 + leduc_rank_slot(&view.public_card)] = 1.0;
    features[7] = f64::from(view.round - 1);
    features[8] = f64::from(view.my_chips) / LEDUC_CHIP_SCALE;
    features[9] = f64::from(view.pot - view.my_chips) / LEDUC_CHIP_SCALE;
    features[10] = f64::from(view.num_raises) / LEDUC_RAISE_SCALE;
    features
}

/// Index of a standard card in a 52-slot block, rank-major.
fn card_slot(card: Card) -> usize {
    let rank = card.rank().expect("standard card").index();
    let suit = card.suit().expect("standard card");
    let suit_index = ALL_SUITS.iter().position(|s| *s == suit).expect("suit");
    rank * 4 + suit_index
}

fn mark_cards(block: &mut [f64], cards: &[String]) {
    for text in cards {
        let card = parse_card(text).expect("well-formed view card");
        block[card_slot(card)] = 1.0;
    }
}

fn round_index(name: &str) -> usize {
    ROUND_NAMES
        .iter()
        .position(|r| *r == name)
        .expect("known round name")
}

fn encode_limit(view: &LimitView) -> Vec<f64> {
    let mut features = vec![0.0; LIMIT_FEATURE_WIDTH];
    mark_cards(&mut features[..52], &view.hole_cards);
    mark_cards(&mut features[52..104], &view.community_cards);
    features[104 + round_index(&view.round)] = 1.0;
    features[108] = f64::from(view.my_chips) / LIMIT_CHIP_SCALE;
    features[109] = f64::from(view.pot - view.my_chips) / LIMIT_CHIP_SCALE;
    features
}

fn encode_nolimit(view: &NoLimitView) -> Vec<f64> {
    let mut features = vec![0.0; NOLIMIT_FEATURE_WIDTH];
    mark_cards(&mut features[..52], &view.hole_cards);
    mark_cards(&mut features[52..104], &view.community_cards);
    features[104 + round_index(&view.round)] = 1.0;
    let seat = view.position as usize;
    features[108] = f64::from(view.my_chips) / NOLIMIT_CHIP_SCALE;
    features[109] = f64::from(view.all_chips[1 - seat]) / NOLIMIT_CHIP_SCALE;
    features[110] = f64::from(view.stakes[seat]) / NOLIMIT_CHIP_SCALE;
    features[111] = f64::from(view.stakes[1 - seat]) / NOLIMIT_CHIP_SCALE;
    features
}

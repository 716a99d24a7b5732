//! Seat policies: uniform random, deterministic per-game rule baselines,
//! and a small DQN teacher for the poker games.

pub mod dqn;
pub mod features;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cards::{parse_card, parse_card_rank_first, Card, UnoColor, UnoFace, ALL_UNO_COLORS};
use crate::dou::DouAction;
use crate::engine::{Action, Observation, View};
use crate::gin::meld::min_deadwood_any;
use crate::gin::GinAction;
use crate::guandan::combo::GuanCombo;
use crate::guandan::GuanAction;
use crate::poker::holdem::NlAction;
use crate::poker::leduc::LeducAction;
use crate::uno::UnoAction;

pub use features::{encode_features, feature_width};

/// A seat policy: maps an observation and its legal actions to a choice.
/// Implementations must return an element of `legal`.
pub trait Policy: Send + Sync {
    fn choose(&self, obs: &Observation, legal: &[Action], rng: &mut ChaCha8Rng) -> Action;
    fn name(&self) -> &'static str;
}

/// Uniform random choice over the legal actions.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn choose(&self, _obs: &Observation, legal: &[Action], rng: &mut ChaCha8Rng) -> Action {
        legal[rng.gen_range(0..legal.len())].clone()
    }

    fn name(&self) -> &'static str {
        "random"
    }
}

/// Deterministic rule baseline for every game. The heuristics are documented
/// choices, not tuned players: climbing games beat with the cheapest combo
/// and lead long-and-low, Uno dumps the highest matching card, Gin Rummy
/// minimizes deadwood, poker always checks or calls.
pub struct RulePolicy;

impl Policy for RulePolicy {
    fn choose(&self, obs: &Observation, legal: &[Action], _rng: &mut ChaCha8Rng) -> Action {
        match &obs.view {
            View::Dou(_) => dou_rule(legal),
            View::Guan(view) => guan_rule(legal, &view.current_rank),
            View::Uno(view) => uno_rule(legal, &view.hand),
            View::Gin(view) => gin_rule(legal, &view.hand, &view.top_discard),
            View::Leduc(_) | View::Limit(_) => bet_rule(legal),
            View::NoLimit(_) => nolimit_rule(legal),
        }
    }

    fn name(&self) -> &'static str {
        "rule"
    }
}

fn dou_is_rocket(cards: &[u8]) -> bool {
    cards == [20, 30]
}

fn dou_is_bomb(cards: &[u8]) -> bool {
    cards.len() == 4 && cards.iter().all(|c| *c == cards[0])
}

/// Cheapest-beat follower, longest-cheapest leader. Bombs are spent only
/// when nothing plainer is available.
fn dou_rule(legal: &[Action]) -> Action {
    let mut pass = None;
    let mut normal: Vec<&Vec<u8>> = Vec::new();
    let mut bombs: Vec<&Vec<u8>> = Vec::new();
    let mut rocket = None;
    for action in legal {
        match action {
            Action::Dou(DouAction::Pass) => pass = Some(action),
            Action::Dou(DouAction::Play(cards)) => {
                if dou_is_rocket(cards) {
                    rocket = Some(action);
                } else if dou_is_bomb(cards) {
                    bombs.push(cards);
                } else {
                    normal.push(cards);
                }
            }
            _ => {}
        }
    }
    let leading = pass.is_none();
    let best_normal = if leading {
        normal
            .iter()
            .copied()
            .min_by_key(|c| (std::cmp::Reverse(c.len()), (*c).clone()))
    } else {
        normal.iter().copied().min_by_key(|c| (*c).clone())
    };
    if let Some(cards) = best_normal {
        return Action::Dou(DouAction::Play(cards.clone()));
    }
    if let Some(cards) = bombs.iter().min_by_key(|c| c[0]) {
        return Action::Dou(DouAction::Play((*cards).clone()));
    }
    if let Some(action) = rocket {
        return action.clone();
    }
    pass.expect("follower can always pass").clone()
}

/// Rank strength at the current level: natural order, with the level rank
/// promoted above the ace and the jokers on top.
fn guan_order(rank_ch: char, level_ch: char) -> u8 {
    match rank_ch {
        'B' => 14,
        'R' => 15,
        ch if ch == level_ch => 13,
        ch => "23456789TJQKA".find(ch).map(|i| i as u8).unwrap_or(12),
    }
}

fn guan_bomb_tier(combo: &GuanCombo) -> u8 {
    if combo.joker_bomb {
        9
    } else if combo.straight_flush {
        2
    } else {
        match combo.cards.len() {
            4 => 0,
            5 => 1,
            n => (n as u8).saturating_sub(3),
        }
    }
}

fn guan_rule(legal: &[Action], current_rank: &str) -> Action {
    let level_ch = current_rank.chars().next().unwrap_or('2');
    // Exchange phases: hand over the forced tribute; give back the lowest
    // useful card, preferring printed ten or below.
    let mut exchanges: Vec<(&Action, Card)> = legal
        .iter()
        .filter_map(|a| match a {
            Action::Guan(GuanAction::Tribute(c)) | Action::Guan(GuanAction::Back(c)) => {
                Some((a, *c))
            }
            _ => None,
        })
        .collect();
    if !exchanges.is_empty() {
        exchanges.sort_by_key(|(_, card)| {
            let rank_index = card.rank().map(|r| r.index()).unwrap_or(13);
            (rank_index > 8, rank_index, card.suit())
        });
        return exchanges[0].0.clone();
    }

    let mut pass = None;
    let mut normal: Vec<&GuanCombo> = Vec::new();
    let mut bombs: Vec<&GuanCombo> = Vec::new();
    for action in legal {
        match action {
            Action::Guan(GuanAction::Pass) => pass = Some(action),
            Action::Guan(GuanAction::Play(combo)) => {
                if combo.ty == crate::guandan::combo::GuanType::Boom {
                    bombs.push(combo);
                } else {
                    normal.push(combo);
                }
            }
            _ => {}
        }
    }
    let leading = pass.is_none();
    let cheapest = |combo: &GuanCombo| {
        (
            guan_order(combo.rank_ch, level_ch),
            combo.wildcards_used,
            combo.cards.clone(),
        )
    };
    let best_normal = if leading {
        normal
            .iter()
            .copied()
            .min_by_key(|c| (std::cmp::Reverse(c.cards.len()), cheapest(c)))
    } else {
        normal.iter().copied().min_by_key(|c| cheapest(c))
    };
    if let Some(combo) = best_normal {
        return Action::Guan(GuanAction::Play(combo.clone()));
    }
    if let Some(bomb) = bombs
        .iter()
        .copied()
        .min_by_key(|c| (guan_bomb_tier(c), cheapest(c)))
    {
        return Action::Guan(GuanAction::Play(bomb.clone()));
    }
    pass.expect("follower can always pass").clone()
}

/// Higher is dumped first: action cards before big digits before small.
fn uno_face_priority(face: UnoFace) -> u8 {
    match face {
        UnoFace::DrawTwo => 22,
        UnoFace::Skip => 21,
        UnoFace::Reverse => 20,
        UnoFace::Digit(d) => d,
        UnoFace::Wild | UnoFace::WildDrawFour => 0,
    }
}

fn uno_color_slot(color: UnoColor) -> usize {
    ALL_UNO_COLORS.iter().position(|c| *c == color).expect("uno color")
}

fn uno_rule(legal: &[Action], hand: &[String]) -> Action {
    // Declared color for wilds: the most common printed color in hand.
    let mut counts = [0u32; 4];
    for text in hand {
        if let Ok(Card::Uno { color, face }) = parse_card(text) {
            if !matches!(face, UnoFace::Wild | UnoFace::WildDrawFour) {
                counts[uno_color_slot(color)] += 1;
            }
        }
    }
    let preferred = ALL_UNO_COLORS[counts
        .iter()
        .enumerate()
        .max_by_key(|(slot, n)| (**n, std::cmp::Reverse(*slot)))
        .map(|(slot, _)| slot)
        .unwrap_or(0)];

    let mut best: Option<(&Action, (u8, u8, bool, usize))> = None;
    for action in legal {
        let key = match action {
            Action::Uno(UnoAction::Play(color, face)) => match face {
                UnoFace::Wild => (1, 0, *color != preferred, uno_color_slot(*color)),
                UnoFace::WildDrawFour => (2, 0, *color != preferred, uno_color_slot(*color)),
                _ => (
                    0,
                    u8::MAX - uno_face_priority(*face),
                    false,
                    uno_color_slot(*color),
                ),
            },
            Action::Uno(UnoAction::Draw) => (3, 0, false, 0),
            _ => continue,
        };
        if best.as_ref().is_none_or(|(_, held)| key < *held) {
            best = Some((action, key));
        }
    }
    best.expect("uno always has a legal action").0.clone()
}

fn gin_parse_hand(hand: &[String]) -> Vec<Card> {
    hand.iter()
        .map(|t| parse_card_rank_first(t).expect("well-formed view card"))
        .collect()
}

/// Deadwood after melding `hand` without `discard`.
fn gin_deadwood_without(hand: &[Card], discard: Card) -> u32 {
    let mut rest: Vec<Card> = hand.to_vec();
    let pos = rest.iter().position(|c| *c == discard).expect("card in hand");
    rest.remove(pos);
    min_deadwood_any(&rest).count
}

fn gin_rule(legal: &[Action], hand: &[String], top_discard: &str) -> Action {
    if let Some(gin) = legal
        .iter()
        .find(|a| matches!(a, Action::Gin(GinAction::Gin)))
    {
        return gin.clone();
    }
    let cards = gin_parse_hand(hand);

    let best_exit = |knock: bool| {
        legal
            .iter()
            .filter_map(|a| match a {
                Action::Gin(GinAction::Knock(c)) if knock => Some((a, *c)),
                Action::Gin(GinAction::Discard(c)) if !knock => Some((a, *c)),
                _ => None,
            })
            .min_by_key(|(_, c)| {
                let value = c.rank().map(|r| r.deadwood_value()).unwrap_or(0);
                (gin_deadwood_without(&cards, *c), std::cmp::Reverse(value), *c)
            })
            .map(|(a, _)| a.clone())
    };
    if let Some(action) = best_exit(true) {
        return action;
    }
    if let Some(action) = best_exit(false) {
        return action;
    }

    let can_draw = legal
        .iter()
        .any(|a| matches!(a, Action::Gin(GinAction::DrawCard)));
    let can_pick = legal
        .iter()
        .any(|a| matches!(a, Action::Gin(GinAction::PickUpDiscard)));
    if can_draw && can_pick {
        if let Ok(top) = parse_card_rank_first(top_discard) {
            let current = min_deadwood_any(&cards).count;
            let mut with_top = cards.clone();
            with_top.push(top);
            let improved = with_top
                .iter()
                .map(|c| gin_deadwood_without(&with_top, *c))
                .min()
                .unwrap_or(current);
            if improved < current {
                return Action::Gin(GinAction::PickUpDiscard);
            }
        }
        return Action::Gin(GinAction::DrawCard);
    }
    // Forced moves: dead-hand declaration and the scoring steps.
    legal.first().expect("gin always has a legal action").clone()
}

fn bet_rule(legal: &[Action]) -> Action {
    for wanted in [LeducAction::Call, LeducAction::Check] {
        if let Some(action) = legal.iter().find(|a| matches!(a, Action::Bet(b) if *b == wanted)) {
            return action.clone();
        }
    }
    legal.first().expect("betting always has a legal action").clone()
}

fn nolimit_rule(legal: &[Action]) -> Action {
    legal
        .iter()
        .find(|a| matches!(a, Action::NoLimit(NlAction::CheckCall)))
        .unwrap_or_else(|| legal.first().expect("betting always has a legal action"))
        .clone()
}

//! Feature-encoder contracts: fixed widths, the documented one-hot layout,
//! and injectivity over the exhaustive Leduc information-set enumeration.

use std::collections::HashMap;

use cardgen_core::agents::{encode_features, feature_width};
use cardgen_core::cards::{build_deck, Game};
use cardgen_core::engine::{match_rng, EngineError, GameState};
use cardgen_core::poker::leduc::LeducState;
use rand::Rng;

#[test]
fn widths_are_fixed_and_non_poker_games_are_rejected() {
    assert_eq!(feature_width(Game::Leduc).unwrap(), 11);
    assert_eq!(feature_width(Game::LimitHoldem).unwrap(), 110);
    assert_eq!(feature_width(Game::NoLimitHoldem).unwrap(), 112);
    assert!(matches!(
        feature_width(Game::Uno),
        Err(EngineError::UnsupportedGame(_))
    ));

    let mut rng = match_rng(7, 7);
    for game in [Game::Leduc, Game::LimitHoldem, Game::NoLimitHoldem] {
        let width = feature_width(game).unwrap();
        for episode in 0..200 {
            let mut state = GameState::reset(game, 90, episode);
            while !state.is_terminal() {
                let seat = state.seat_to_act();
                let features = encode_features(&state.observe(seat)).unwrap();
                assert_eq!(features.len(), width, "{game}");
                assert!(features.iter().all(|v| v.is_finite()));
                let legal = state.legal_actions();
                let action = legal[rng.gen_range(0..legal.len())].clone();
                state.apply(&action).unwrap();
            }
        }
    }

    let uno = GameState::reset(Game::Uno, 1, 1);
    assert!(matches!(
        encode_features(&uno.observe(0)),
        Err(EngineError::UnsupportedGame(_))
    ));
}

#[test]
fn leduc_layout_matches_the_documented_one_hots() {
    let deck = build_deck(Game::Leduc);
    // deck is J,J,Q,Q,K,K in some suit order; find one jack and one queen.
    let jack = *deck
        .iter()
        .find(|c| c.rank().unwrap().ch() == 'J')
        .unwrap();
    let queen = *deck
        .iter()
        .find(|c| c.rank().unwrap().ch() == 'Q')
        .unwrap();
    let king = *deck
        .iter()
        .find(|c| c.rank().unwrap().ch() == 'K')
        .unwrap();
    let rest: Vec<_> = deck
        .iter()
        .copied()
        .filter(|c| *c != jack && *c != queen && *c != king)
        .collect();
    let state = GameState::Leduc(LeducState::with_deal(
        [jack, queen],
        king,
        rest,
        0,
    ));

    let features = encode_features(&state.observe(0)).unwrap();
    // Own jack: first block (1,0,0); board hidden in round 1: none slot.
    assert_eq!(&features[..3], &[1.0, 0.0, 0.0]);
    assert_eq!(&features[3..7], &[0.0, 0.0, 0.0, 1.0]);
    assert_eq!(features[7], 0.0, "round flag");
    assert!(features[8] > 0.0 && features[9] > 0.0, "antes committed");
    assert_eq!(features[10], 0.0, "no raises yet");

    let queen_view = encode_features(&state.observe(1)).unwrap();
    assert_eq!(&queen_view[..3], &[0.0, 1.0, 0.0]);
}

/// Exhaustively walk every Leduc deal and betting line. The encoder
/// abstracts an information set to (own card, public card, round, own
/// committed, opponent committed, raise count); within one seat role,
/// distinct abstractions must encode to distinct vectors, and any two
/// betting lines that share a vector must be chip-equivalent transpositions
/// (e.g. check-raise-call and raise-call both reach a 3/3 pot with one
/// raise — indistinguishable to a chip-state encoder by construction).
#[test]
fn distinct_leduc_information_sets_encode_distinctly() {
    let deck = build_deck(Game::Leduc);
    // vector bits -> (role, info set description)
    let mut seen: HashMap<(bool, Vec<u64>), String> = HashMap::new();
    let mut nodes = 0u64;

    for dealer in 0..2 {
        for h0 in 0..deck.len() {
            for h1 in 0..deck.len() {
                if h1 == h0 {
                    continue;
                }
                for board in 0..deck.len() {
                    if board == h0 || board == h1 {
                        continue;
                    }
                    let rest: Vec<_> = deck
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != h0 && *i != h1 && *i != board)
                        .map(|(_, c)| *c)
                        .collect();
                    let state = GameState::Leduc(LeducState::with_deal(
                        [deck[h0], deck[h1]],
                        deck[board],
                        rest,
                        dealer,
                    ));
                    walk(&state, dealer, &mut seen, &mut nodes);
                }
            }
        }
    }
    assert!(nodes > 5_000, "only {nodes} decision nodes visited");
}

fn walk(
    state: &GameState,
    dealer: usize,
    seen: &mut HashMap<(bool, Vec<u64>), String>,
    nodes: &mut u64,
) {
    if state.is_terminal() {
        return;
    }
    *nodes += 1;
    let seat = state.seat_to_act();
    let obs = state.observe(seat);
    let features = encode_features(&obs).unwrap();
    let bits: Vec<u64> = features.iter().map(|v| v.to_bits()).collect();
    let is_dealer = seat == dealer;

    // The abstraction the encoder is meant to carry, written independently
    // from the view fields.
    let info = match &obs.view {
        cardgen_core::engine::View::Leduc(v) => format!(
            "hand {} public {} round {} mine {} theirs {} raises {}",
            v.hand,
            v.public_card,
            v.round,
            v.my_chips,
            v.pot - v.my_chips,
            v.num_raises
        ),
        _ => unreachable!(),
    };
    match seen.get(&(is_dealer, bits.clone())) {
        Some(existing) => assert_eq!(
            existing, &info,
            "two distinct information sets share one feature vector"
        ),
        None => {
            seen.insert((is_dealer, bits), info);
        }
    }

    for action in state.legal_actions() {
        let mut next = state.clone();
        next.apply(&action).unwrap();
        walk(&next, dealer, seen, nodes);
    }
}

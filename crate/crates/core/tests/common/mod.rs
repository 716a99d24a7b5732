//! Shared rollout machinery for the engine property and acceptance suites.

use cardgen_core::cards::{build_deck, same_multiset, Card, Game};
use cardgen_core::dou::combo::DOU_RANK_INTS;
use cardgen_core::engine::{match_rng, GameState};
use cardgen_core::poker::holdem::NL_STARTING_STACK;
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashSet;

/// Per-game hard cap on random-rollout length.
pub fn step_bound(game: Game) -> u32 {
    match game {
        Game::Doudizhu => 200,
        Game::Guandan => 600,
        Game::Uno => 2000,
        Game::GinRummy => 120,
        Game::Leduc | Game::LimitHoldem | Game::NoLimitHoldem => 30,
    }
}

#[derive(Debug, Default)]
pub struct RolloutStats {
    pub matches: u64,
    pub steps: u64,
    /// States where every legal action was applied to a clone.
    pub exhaustive_states: u64,
    /// Matches replayed from their recorded action sequence.
    pub replays: u64,
}

impl RolloutStats {
    fn absorb(&mut self, other: RolloutStats) {
        self.matches += other.matches;
        self.steps += other.steps;
        self.exhaustive_states += other.exhaustive_states;
        self.replays += other.replays;
    }
}

fn dou_full_deck() -> Vec<u8> {
    let mut deck: Vec<u8> = DOU_RANK_INTS[..13]
        .iter()
        .flat_map(|r| std::iter::repeat_n(*r, 4))
        .collect();
    deck.push(20);
    deck.push(30);
    deck.sort_unstable();
    deck
}

fn check_conservation(state: &GameState, deck: &[Card], dou_deck: &[u8]) -> Result<(), String> {
    let ok = match state {
        GameState::Doudizhu(s) => s.all_cards() == dou_deck,
        GameState::Guandan(s) => same_multiset(&s.all_cards(), deck),
        GameState::Uno(s) => same_multiset(&s.all_cards(), deck),
        GameState::GinRummy(s) => same_multiset(&s.all_cards(), deck),
        GameState::Leduc(s) => same_multiset(&s.all_cards(), deck),
        GameState::LimitHoldem(s) => same_multiset(&s.all_cards(), deck),
        GameState::NoLimitHoldem(s) => {
            same_multiset(&s.all_cards(), deck)
                && (0..2).all(|i| s.committed()[i] + s.stacks()[i] == NL_STARTING_STACK)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{}: card conservation violated", state.game()))
    }
}

fn check_terminal_payoffs(state: &GameState) -> Result<(), String> {
    let game = state.game();
    let payoffs = state
        .payoffs()
        .map_err(|e| format!("{game}: terminal state refused payoffs: {e}"))?;
    if payoffs.len() != state.num_seats() {
        return Err(format!("{game}: payoff count {}", payoffs.len()));
    }
    match game {
        Game::Doudizhu => {
            if payoffs.iter().any(|p| *p == 0.0) {
                return Err(format!("{game}: zero payoff in {payoffs:?}"));
            }
            let winners: Vec<usize> =
                (0..3).filter(|s| payoffs[*s] > 0.0).collect();
            let solo_side_won = winners.len() == 1;
            let team_side_won =
                winners.len() == 2 && payoffs[winners[0]] == payoffs[winners[1]];
            if !(solo_side_won || team_side_won) {
                return Err(format!("{game}: bad winner split {payoffs:?}"));
            }
        }
        Game::Guandan => {
            let teams_agree = payoffs[0] == payoffs[2] && payoffs[1] == payoffs[3];
            if !teams_agree || payoffs[0] != -payoffs[1] || payoffs[0].abs() != 1.0 {
                return Err(format!("{game}: bad team payoffs {payoffs:?}"));
            }
        }
        _ => {
            if payoffs[0] + payoffs[1] != 0.0 {
                return Err(format!("{game}: payoffs not antisymmetric {payoffs:?}"));
            }
        }
    }
    Ok(())
}

fn run_match(
    game: Game,
    base_seed: u64,
    match_index: u64,
    deck: &[Card],
    dou_deck: &[u8],
    stats: &mut RolloutStats,
) -> Result<(), String> {
    let bound = step_bound(game);
    let mut state = GameState::reset(game, base_seed, match_index);
    let mut rng = match_rng(base_seed ^ 0x5EED_FACE, match_index);
    let replay = match_index % 25 == 0;
    let mut recorded = Vec::new();

    let mut steps: u32 = 0;
    while !state.is_terminal() {
        if steps >= bound {
            return Err(format!(
                "{game}: seed {base_seed} match {match_index} exceeded {bound} steps"
            ));
        }
        let seat = state.seat_to_act();
        if seat >= state.num_seats() {
            return Err(format!("{game}: seat {seat} out of range"));
        }
        let legal = state.legal_actions();
        if legal.is_empty() {
            return Err(format!("{game}: empty legal set in a live state"));
        }

        // Periodically apply every legal action to a clone and check the
        // wire forms are distinct.
        if (steps as u64 + match_index) % 13 == 0 {
            let mut wires = HashSet::new();
            for action in &legal {
                if !wires.insert(action.wire()) {
                    return Err(format!("{game}: duplicate legal action {}", action.wire()));
                }
                let mut probe = state.clone();
                probe.apply(action).map_err(|e| {
                    format!("{game}: legal action {} rejected: {e}", action.wire())
                })?;
            }
            stats.exhaustive_states += 1;
        }

        let action = legal[rng.gen_range(0..legal.len())].clone();
        if replay {
            recorded.push(action.clone());
        }
        state
            .apply(&action)
            .map_err(|e| format!("{game}: chosen action rejected: {e}"))?;
        check_conservation(&state, deck, dou_deck)?;
        steps += 1;
    }

    if !state.legal_actions().is_empty() {
        return Err(format!("{game}: terminal state offers actions"));
    }
    check_terminal_payoffs(&state)?;
    if let Some(last) = recorded.last() {
        match state.apply(last) {
            Err(_) => {}
            Ok(()) => return Err(format!("{game}: terminal state accepted an action")),
        }
    }

    if replay {
        let mut twin = GameState::reset(game, base_seed, match_index);
        for action in &recorded {
            twin.apply(action)
                .map_err(|e| format!("{game}: replay diverged: {e}"))?;
        }
        if format!("{twin:?}") != format!("{state:?}") {
            return Err(format!(
                "{game}: seed {base_seed} match {match_index} replay produced a different state"
            ));
        }
        if twin.payoffs().ok() != state.payoffs().ok() {
            return Err(format!("{game}: replay produced different payoffs"));
        }
        stats.replays += 1;
    }

    stats.matches += 1;
    stats.steps += u64::from(steps);
    Ok(())
}

/// Random-play every match in `seeds × matches_per_seed`, checking legality,
/// card conservation, determinism, and termination bounds throughout.
pub fn run_rollout_properties(
    game: Game,
    seeds: std::ops::Range<u64>,
    matches_per_seed: u64,
) -> Result<RolloutStats, String> {
    let deck = build_deck(game);
    let dou_deck = dou_full_deck();
    let per_seed: Vec<RolloutStats> = seeds
        .collect::<Vec<u64>>()
        .into_par_iter()
        .map(|base_seed| {
            let mut stats = RolloutStats::default();
            for match_index in 0..matches_per_seed {
                run_match(game, base_seed, match_index, &deck, &dou_deck, &mut stats)?;
            }
            Ok(stats)
        })
        .collect::<Result<_, String>>()?;
    let mut total = RolloutStats::default();
    for stats in per_seed {
        total.absorb(stats);
    }
    Ok(total)
}

//! Guandan: four seats in two partnerships (0+2 vs 1+3), playing deals of
//! 27 cards each from a 108-card double deck. Teams climb levels 2..A by
//! winning deals; the winning team's level sets the deal's trump context.
//! Between deals the losing side pays tribute and receives a card back.
//!
//! Two modes: a single scored deal (the trajectory-generation unit) or a
//! full match that ends when a team wins a deal while at level A.

pub mod combo;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cards::{build_deck, format_card, Card, Game, Rank};
use crate::engine::EngineError;
use combo::{compare_guan, enumerate_guan_moves, GuanCombo, LevelContext};

pub const GUAN_TEAMS: [[usize; 2]; 2] = [[0, 2], [1, 3]];

pub fn team_of(seat: usize) -> usize {
    seat % 2
}

fn partner(seat: usize) -> usize {
    (seat + 2) % 4
}

/// The ordered ladder of levels a team climbs.
const LEVELS: [Rank; 13] = [
    Rank::Two,
    Rank::Three,
    Rank::Four,
    Rank::Five,
    Rank::Six,
    Rank::Seven,
    Rank::Eight,
    Rank::Nine,
    Rank::Ten,
    Rank::Jack,
    Rank::Queen,
    Rank::King,
    Rank::Ace,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuanMode {
    /// One deal, scored and terminal: the generation unit.
    SingleDeal,
    /// Deals until a team wins while at level A (or the deal cap).
    FullMatch,
}

#[derive(Debug, Clone, Copy)]
pub struct GuanSettings {
    pub mode: GuanMode,
    /// Level gain when the winners' partner finishes 2nd, 3rd, 4th.
    pub ladder: [u8; 3],
    /// Safety cap on deals per match.
    pub deal_cap: usize,
}

impl Default for GuanSettings {
    fn default() -> Self {
        GuanSettings { mode: GuanMode::SingleDeal, ladder: [3, 2, 1], deal_cap: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuanAction {
    Play(GuanCombo),
    Pass,
    Tribute(Card),
    Back(Card),
}

/// Wire value for an action: `[Type, Rank, Cards]`, with the pass triple
/// spelled `["PASS", "PASS", "PASS"]`.
pub fn guan_action_value(action: &GuanAction) -> Value {
    let card_rank_ch = |card: &Card| match card {
        Card::BlackJoker => 'B',
        Card::RedJoker => 'R',
        Card::Standard { rank, .. } => rank.ch(),
        _ => '?',
    };
    match action {
        GuanAction::Pass => json!(["PASS", "PASS", "PASS"]),
        GuanAction::Play(combo) => {
            let cards: Vec<String> = combo.cards.iter().map(|c| format_card(*c)).collect();
            json!([combo.ty.as_str(), combo.rank_ch.to_string(), cards])
        }
        GuanAction::Tribute(card) => {
            json!(["tribute", card_rank_ch(card).to_string(), vec![format_card(*card)]])
        }
        GuanAction::Back(card) => {
            json!(["back", card_rank_ch(card).to_string(), vec![format_card(*card)]])
        }
    }
}

/// Template observation: relative piles run down-player, teammate, up-player.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuanView {
    pub position: u32,
    pub hand: Vec<String>,
    pub others_remaining: Vec<String>,
    pub last_action: String,
    pub teammate_last: String,
    pub cards_left: Vec<u32>,
    pub played_down: Vec<String>,
    pub played_teammate: Vec<String>,
    pub played_up: Vec<String>,
    pub self_rank: String,
    pub opponent_rank: String,
    pub current_rank: String,
}

#[derive(Debug, Clone)]
enum Phase {
    /// Payers still owing tribute, in paying order.
    Tribute { queue: Vec<usize> },
    /// (receiver, payer) pairs still owing a returned card.
    Back { queue: Vec<(usize, usize)> },
    Play,
}

#[derive(Debug, Clone)]
pub struct GuanState {
    settings: GuanSettings,
    rng: ChaCha8Rng,
    levels: [usize; 2],
    leading_team: Option<usize>,
    deals_played: usize,
    deal_results: Vec<usize>,
    match_winner: Option<usize>,

    ctx: LevelContext,
    hands: [Vec<Card>; 4],
    phase: Phase,
    to_act: usize,
    last_move: Option<(usize, GuanCombo)>,
    finish_order: Vec<usize>,
    prev_finish: Vec<usize>,
    played: [Vec<Card>; 4],
    log: Vec<(usize, GuanAction)>,
    tributes: Vec<(usize, Card)>,
    tribute_leader: usize,
    step_count: u32,
}

impl GuanState {
    pub fn new(rng: &mut ChaCha8Rng, settings: GuanSettings) -> Self {
        let mut state = GuanState {
            settings,
            rng: rng.clone(),
            levels: [0, 0],
            leading_team: None,
            deals_played: 0,
            deal_results: Vec::new(),
            match_winner: None,
            ctx: LevelContext::new(Rank::Two),
            hands: Default::default(),
            phase: Phase::Play,
            to_act: 0,
            last_move: None,
            finish_order: Vec::new(),
            prev_finish: Vec::new(),
            played: Default::default(),
            log: Vec::new(),
            tributes: Vec::new(),
            tribute_leader: 0,
            step_count: 0,
        };
        // Keep the caller's stream in sync with the cards we consumed.
        state.start_deal();
        *rng = state.rng.clone();
        state
    }

    /// Start mid-deal from explicit hands; scripted tests use short hands
    /// to reach known finish orders quickly.
    #[doc(hidden)]
    pub fn from_hands(hands: [Vec<Card>; 4], current: Rank, settings: GuanSettings) -> Self {
        let ctx = LevelContext::new(current);
        let mut state = GuanState {
            settings,
            rng: ChaCha8Rng::seed_from_u64(0),
            levels: [LEVELS.iter().position(|l| *l == current).unwrap_or(0); 2],
            leading_team: None,
            deals_played: 0,
            deal_results: Vec::new(),
            match_winner: None,
            ctx,
            hands,
            phase: Phase::Play,
            to_act: 0,
            last_move: None,
            finish_order: Vec::new(),
            prev_finish: Vec::new(),
            played: Default::default(),
            log: Vec::new(),
            tributes: Vec::new(),
            tribute_leader: 0,
            step_count: 0,
        };
        for hand in &mut state.hands {
            hand.sort_by_key(|c| ctx.sort_key(c));
        }
        state
    }

    /// Rebuild the between-deals state (finished previous deal, fresh
    /// hands) and run tribute detection; fixture hook for tests.
    #[doc(hidden)]
    pub fn resume_after_deal_for_test(&mut self, prev_finish: [usize; 4], hands: [Vec<Card>; 4]) {
        self.prev_finish = prev_finish.to_vec();
        self.deals_played = 1;
        self.hands = hands;
        let ctx = self.ctx;
        for hand in &mut self.hands {
            hand.sort_by_key(|c| ctx.sort_key(c));
        }
        self.last_move = None;
        self.finish_order.clear();
        self.played = Default::default();
        self.log.clear();
        self.tributes.clear();
        self.enter_tribute_phase();
    }

    pub fn is_terminal(&self) -> bool {
        self.match_winner.is_some()
    }

    /// Seat that emptied its hand first in the most recently finished deal.
    pub fn first_finisher(&self) -> Option<usize> {
        self.prev_finish.first().copied()
    }

    pub fn to_act(&self) -> usize {
        self.to_act
    }

    pub fn level_context(&self) -> &LevelContext {
        &self.ctx
    }

    pub fn current_level(&self) -> Rank {
        self.ctx.current
    }

    /// Team index that won each completed deal.
    pub fn deal_results(&self) -> &[usize] {
        &self.deal_results
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }

    fn start_deal(&mut self) {
        let current = LEVELS[self.levels[self.leading_team.unwrap_or(0)]];
        self.ctx = LevelContext::new(current);
        let mut deck = build_deck(Game::Guandan);
        deck.shuffle(&mut self.rng);
        for (seat, chunk) in deck.chunks(27).enumerate() {
            let mut hand = chunk.to_vec();
            hand.sort_by_key(|c| self.ctx.sort_key(c));
            self.hands[seat] = hand;
        }
        self.last_move = None;
        self.finish_order.clear();
        self.played = Default::default();
        self.log.clear();
        self.tributes.clear();

        if self.deals_played == 0 {
            self.phase = Phase::Play;
            self.to_act = 0;
            return;
        }
        self.enter_tribute_phase();
    }

    /// Tribute setup from the previous deal's result.
    fn enter_tribute_phase(&mut self) {
        let banker = self.last_banker();
        let payers = self.tribute_payers();
        let red_jokers = payers
            .iter()
            .flat_map(|p| self.hands[*p].iter())
            .filter(|c| **c == Card::RedJoker)
            .count();
        if red_jokers >= 2 {
            // Anti-tribute: the exchange is waived and the banker leads.
            self.phase = Phase::Play;
            self.to_act = banker;
        } else {
            self.to_act = payers[0];
            self.phase = Phase::Tribute { queue: payers };
        }
    }

    fn last_banker(&self) -> usize {
        self.prev_finish[0]
    }

    /// Who owes tribute: both losers when the winning pair took 1st and
    /// 2nd, otherwise the losing team's worst finisher.
    fn tribute_payers(&self) -> Vec<usize> {
        let order = &self.prev_finish;
        if team_of(order[1]) == team_of(order[0]) {
            vec![order[2], order[3]]
        } else {
            let loser_team = 1 - team_of(order[0]);
            let worst = *order[1..].iter().rev().find(|s| team_of(**s) == loser_team).unwrap();
            vec![worst]
        }
    }

    pub fn legal_actions(&self) -> Vec<GuanAction> {
        if self.is_terminal() {
            return Vec::new();
        }
        match &self.phase {
            Phase::Tribute { .. } => {
                let card = self.highest_non_wild(self.to_act);
                vec![GuanAction::Tribute(card)]
            }
            Phase::Back { .. } => self
                .back_candidates(self.to_act)
                .into_iter()
                .map(GuanAction::Back)
                .collect(),
            Phase::Play => {
                let following = self.standing_move();
                let mut actions: Vec<GuanAction> =
                    enumerate_guan_moves(&self.hands[self.to_act], following, &self.ctx)
                        .into_iter()
                        .map(GuanAction::Play)
                        .collect();
                if following.is_some() {
                    actions.push(GuanAction::Pass);
                }
                actions
            }
        }
    }

    fn standing_move(&self) -> Option<&GuanCombo> {
        self.last_move.as_ref().map(|(_, combo)| combo)
    }

    fn highest_non_wild(&self, seat: usize) -> Card {
        *self.hands[seat]
            .iter()
            .filter(|c| !self.ctx.is_wild(c))
            .max_by_key(|c| self.ctx.sort_key(c))
            .expect("a 27-card hand holds at most 2 wilds")
    }

    /// Cards returnable after tribute: printed rank ten or lower, else the
    /// lowest cards in hand.
    fn back_candidates(&self, seat: usize) -> Vec<Card> {
        let mut low: Vec<Card> = self.hands[seat]
            .iter()
            .filter(|c| matches!(c.rank(), Some(r) if r != Rank::Ace && r.index() <= Rank::Ten.index()))
            .copied()
            .collect();
        if low.is_empty() {
            let min = self.hands[seat].iter().map(|c| self.ctx.sort_key(c)).min().unwrap();
            low = self.hands[seat].iter().filter(|c| self.ctx.sort_key(c) == min).copied().collect();
        }
        low.sort_by_key(|c| self.ctx.sort_key(c));
        low.dedup();
        low
    }

    pub fn apply(&mut self, action: &GuanAction) -> Result<(), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::TerminalState);
        }
        let seat = self.to_act;
        let illegal = |what: &str| EngineError::IllegalAction { seat, action: what.to_string() };
        match (self.phase.clone(), action) {
            (Phase::Tribute { queue }, GuanAction::Tribute(card)) => {
                if *card != self.highest_non_wild(seat) {
                    return Err(illegal("tribute must be the highest non-wild card"));
                }
                self.take_card(seat, card)?;
                self.tributes.push((seat, *card));
                self.log.push((seat, action.clone()));
                self.step_count += 1;
                let rest: Vec<usize> = queue[1..].to_vec();
                if let Some(next) = rest.first() {
                    self.to_act = *next;
                    self.phase = Phase::Tribute { queue: rest };
                } else {
                    self.settle_tributes();
                }
            }
            (Phase::Back { queue }, GuanAction::Back(card)) => {
                if !self.back_candidates(seat).contains(card) {
                    return Err(illegal("returned card must rank ten or lower"));
                }
                let (receiver, payer) = queue[0];
                debug_assert_eq!(receiver, seat);
                self.take_card(seat, card)?;
                self.give_card(payer, *card);
                self.log.push((seat, action.clone()));
                self.step_count += 1;
                let rest: Vec<(usize, usize)> = queue[1..].to_vec();
                if let Some((next, _)) = rest.first() {
                    self.to_act = *next;
                    self.phase = Phase::Back { queue: rest };
                } else {
                    self.phase = Phase::Play;
                    self.to_act = self.first_leader();
                }
            }
            (Phase::Play, GuanAction::Pass) => {
                if self.standing_move().is_none() {
                    return Err(illegal("pass while leading"));
                }
                self.log.push((seat, GuanAction::Pass));
                self.step_count += 1;
                self.advance_turn();
            }
            (Phase::Play, GuanAction::Play(combo)) => {
                if let Some(prev) = self.standing_move() {
                    if !compare_guan(combo, prev, &self.ctx) {
                        return Err(illegal("combo does not beat the standing move"));
                    }
                }
                let valid = combo::interpret_guan_wire(combo.ty, combo.rank_ch, &combo.cards, &self.ctx);
                if valid.as_ref() != Some(combo) {
                    return Err(illegal("malformed combination"));
                }
                for card in &combo.cards {
                    self.take_card(seat, card)?;
                }
                self.played[seat].extend(&combo.cards);
                self.played[seat].sort_by_key(|c| self.ctx.sort_key(c));
                self.log.push((seat, action.clone()));
                self.step_count += 1;
                self.last_move = Some((seat, combo.clone()));
                if self.hands[seat].is_empty() {
                    self.finish_order.push(seat);
                    if self.finish_order.len() == 3 {
                        self.finish_deal();
                        return Ok(());
                    }
                }
                self.advance_turn();
            }
            _ => return Err(illegal("action does not match phase")),
        }
        Ok(())
    }

    fn take_card(&mut self, seat: usize, card: &Card) -> Result<(), EngineError> {
        let hand = &mut self.hands[seat];
        let Some(pos) = hand.iter().position(|c| c == card) else {
            return Err(EngineError::IllegalAction { seat, action: format!("{card:?} not in hand") });
        };
        hand.remove(pos);
        Ok(())
    }

    fn give_card(&mut self, seat: usize, card: Card) {
        self.hands[seat].push(card);
        let ctx = self.ctx;
        self.hands[seat].sort_by_key(|c| ctx.sort_key(c));
    }

    fn settle_tributes(&mut self) {
        let banker = self.last_banker();
        if self.tributes.len() == 1 {
            let (payer, card) = self.tributes[0];
            self.give_card(banker, card);
            self.to_act = banker;
            self.phase = Phase::Back { queue: vec![(banker, payer)] };
            self.tribute_leader = payer;
        } else {
            // Double tribute: the banker takes the higher card, the
            // partner the other; the payer of the higher card leads.
            let mut pairs = self.tributes.clone();
            pairs.sort_by_key(|(_, card)| std::cmp::Reverse(self.ctx.sort_key(card)));
            let (high_payer, high_card) = pairs[0];
            let (low_payer, low_card) = pairs[1];
            self.give_card(banker, high_card);
            self.give_card(partner(banker), low_card);
            self.to_act = banker;
            self.phase = Phase::Back { queue: vec![(banker, high_payer), (partner(banker), low_payer)] };
            self.tribute_leader = high_payer;
        }
    }

    fn first_leader(&self) -> usize {
        self.tribute_leader
    }

    /// Move to the next seat with cards; when the turn returns to the
    /// standing move's holder the trick is over and the holder (or, if
    /// they have finished, their partner, or failing that the next active
    /// seat) leads fresh.
    fn advance_turn(&mut self) {
        let (holder, _) = *self.last_move.as_ref().expect("advance only after a move exists");
        let mut seat = self.to_act;
        loop {
            seat = (seat + 1) % 4;
            if seat == holder {
                let leader = if !self.hands[holder].is_empty() {
                    holder
                } else if !self.hands[partner(holder)].is_empty() {
                    partner(holder)
                } else {
                    let mut next = holder;
                    loop {
                        next = (next + 1) % 4;
                        if !self.hands[next].is_empty() {
                            break next;
                        }
                    }
                };
                self.last_move = None;
                self.to_act = leader;
                return;
            }
            if !self.hands[seat].is_empty() {
                self.to_act = seat;
                return;
            }
        }
    }

    fn finish_deal(&mut self) {
        let dweller = (0..4).find(|s| !self.finish_order.contains(s)).unwrap();
        self.finish_order.push(dweller);
        let order = self.finish_order.clone();
        let winner_team = team_of(order[0]);
        self.deal_results.push(winner_team);
        self.deals_played += 1;
        self.prev_finish = order.clone();

        let partner_pos = order.iter().position(|s| *s == partner(order[0])).unwrap();
        let gain = self.settings.ladder[partner_pos - 1] as usize;
        let at_ace = self.levels[winner_team] == LEVELS.len() - 1;
        self.leading_team = Some(winner_team);

        if self.settings.mode == GuanMode::SingleDeal || at_ace {
            // A single scored deal, or a win while already at level A,
            // ends the match.
            self.match_winner = Some(winner_team);
            return;
        }
        self.levels[winner_team] = (self.levels[winner_team] + gain).min(LEVELS.len() - 1);
        if self.deals_played >= self.settings.deal_cap {
            // Cap reached: higher level wins, ties to the last deal's winner.
            let winner = match self.levels[0].cmp(&self.levels[1]) {
                std::cmp::Ordering::Greater => 0,
                std::cmp::Ordering::Less => 1,
                std::cmp::Ordering::Equal => winner_team,
            };
            self.match_winner = Some(winner);
        } else {
            self.start_deal();
        }
    }

    pub fn payoffs(&self) -> Result<[i64; 4], EngineError> {
        let winner = self.match_winner.ok_or(EngineError::NonTerminal)?;
        let mut out = [0i64; 4];
        for (seat, slot) in out.iter_mut().enumerate() {
            *slot = if team_of(seat) == winner { 1 } else { -1 };
        }
        Ok(out)
    }

    pub fn is_winner(&self, seat: usize) -> Result<bool, EngineError> {
        Ok(self.payoffs()?[seat] > 0)
    }

    pub fn observe(&self, seat: usize) -> GuanView {
        let fmt = |cards: &[Card]| cards.iter().map(|c| format_card(*c)).collect::<Vec<String>>();
        let mut others: Vec<Card> = (1..4).flat_map(|d| self.hands[(seat + d) % 4].iter().copied()).collect();
        others.sort_by_key(|c| self.ctx.sort_key(c));
        let last_by = |pred: &dyn Fn(usize) -> bool| {
            self.log
                .iter()
                .rev()
                .find(|(actor, _)| pred(*actor))
                .map(|(_, action)| guan_action_value(action).to_string())
                .unwrap_or_else(|| "[]".to_string())
        };
        let down = (seat + 1) % 4;
        let mate = partner(seat);
        let up = (seat + 3) % 4;
        GuanView {
            position: seat as u32,
            hand: fmt(&self.hands[seat]),
            others_remaining: fmt(&others),
            last_action: last_by(&|actor| actor != seat),
            teammate_last: last_by(&|actor| actor == mate),
            cards_left: vec![
                self.hands[down].len() as u32,
                self.hands[mate].len() as u32,
                self.hands[up].len() as u32,
            ],
            played_down: fmt(&self.played[down]),
            played_teammate: fmt(&self.played[mate]),
            played_up: fmt(&self.played[up]),
            self_rank: LEVELS[self.levels[team_of(seat)]].ch().to_string(),
            opponent_rank: LEVELS[self.levels[1 - team_of(seat)]].ch().to_string(),
            current_rank: self.ctx.current.ch().to_string(),
        }
    }

    /// Cards in the current deal (hands plus played piles).
    pub fn all_cards(&self) -> Vec<Card> {
        let mut cards: Vec<Card> = self.hands.iter().flatten().copied().collect();
        cards.extend(self.played.iter().flatten().copied());
        cards.sort();
        cards
    }
}

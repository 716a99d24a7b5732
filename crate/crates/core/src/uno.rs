//! Two-player Uno. Skip, Reverse, Draw Two, and Wild Draw Four all give the
//! acting player another turn (the opponent misses theirs); a drawn playable
//! card must be played; an exhausted draw pile reshuffles the discard pile
//! except its top card.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cards::{build_deck, Card, Game, UnoColor, UnoFace, ALL_UNO_COLORS};
use crate::engine::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnoAction {
    Draw,
    /// Play a card of this face; for wild faces the color is the declared
    /// color, otherwise it is the card's printed color.
    Play(UnoColor, UnoFace),
}

impl UnoAction {
    pub fn as_wire(&self) -> String {
        match self {
            UnoAction::Draw => "draw".to_string(),
            UnoAction::Play(color, face) => format!("{}-{}", color.ch(), face.as_str()),
        }
    }

    pub fn from_wire(text: &str) -> Option<UnoAction> {
        if text == "draw" {
            return Some(UnoAction::Draw);
        }
        match crate::cards::parse_card(text) {
            Ok(Card::Uno { color, face }) => Some(UnoAction::Play(color, face)),
            _ => None,
        }
    }
}

/// Observation fields for one acting seat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnoView {
    pub step: u32,
    pub position: u32,
    pub hand: Vec<String>,
    pub top_card: String,
    pub played_cards: Vec<String>,
    pub cards_left: Vec<u32>,
    pub history: Vec<(u32, String)>,
}

#[derive(Debug, Clone)]
pub struct UnoState {
    hands: [Vec<Card>; 2],
    draw_pile: Vec<Card>,
    discard: Vec<Card>,
    /// Color and face the top discard plays as (declared color for wilds).
    top_as_played: (UnoColor, UnoFace),
    to_act: usize,
    pending_forced: Option<Card>,
    step_count: u32,
    consecutive_noop_draws: u32,
    history: Vec<(usize, UnoAction)>,
    winner: Option<usize>,
    drawn_to_draw: bool,
    rng: ChaCha8Rng,
}

impl UnoState {
    pub fn new(mut rng: ChaCha8Rng) -> UnoState {
        let mut deck = build_deck(Game::Uno);
        deck.shuffle(&mut rng);
        let hands = [deck.split_off(deck.len() - 7), deck.split_off(deck.len() - 7)];
        // Flip the starting card; wilds are shuffled back in until a colored
        // card appears.
        let top = loop {
            let card = deck.pop().expect("100 non-wild cards remain");
            match card {
                Card::Uno { face, .. } if face.is_wild() => {
                    deck.insert(0, card);
                    deck.shuffle(&mut rng);
                }
                _ => break card,
            }
        };
        let (color, face) = match top {
            Card::Uno { color, face } => (color, face),
            _ => unreachable!("uno deck"),
        };
        UnoState {
            hands,
            draw_pile: deck,
            discard: vec![top],
            top_as_played: (color, face),
            to_act: 0,
            pending_forced: None,
            step_count: 0,
            consecutive_noop_draws: 0,
            history: Vec::new(),
            winner: None,
            drawn_to_draw: false,
            rng,
        }
    }

    pub fn seat_to_act(&self) -> usize {
        self.to_act
    }

    pub fn is_terminal(&self) -> bool {
        self.winner.is_some() || self.drawn_to_draw
    }

    fn playable(&self, card: &Card) -> bool {
        let (active_color, top_face) = self.top_as_played;
        match card {
            Card::Uno { face, .. } if face.is_wild() => true,
            Card::Uno { color, face } => *color == active_color || *face == top_face,
            _ => unreachable!("uno hands hold uno cards"),
        }
    }

    fn play_actions_for(&self, card: &Card) -> Vec<UnoAction> {
        match card {
            Card::Uno { face, .. } if face.is_wild() => ALL_UNO_COLORS
                .iter()
                .map(|color| UnoAction::Play(*color, *face))
                .collect(),
            Card::Uno { color, face } => vec![UnoAction::Play(*color, *face)],
            _ => unreachable!("uno hands hold uno cards"),
        }
    }

    pub fn legal_actions(&self) -> Vec<UnoAction> {
        if self.is_terminal() {
            return Vec::new();
        }
        if let Some(card) = self.pending_forced {
            return self.play_actions_for(&card);
        }
        let hand = &self.hands[self.to_act];
        let mut plays: Vec<UnoAction> = hand
            .iter()
            .filter(|c| self.playable(c))
            .flat_map(|c| self.play_actions_for(c))
            .collect();
        plays.sort_by_key(|a| match a {
            UnoAction::Play(c, f) => (*c, *f),
            UnoAction::Draw => unreachable!(),
        });
        plays.dedup();
        if plays.is_empty() {
            vec![UnoAction::Draw]
        } else {
            plays
        }
    }

    pub fn apply(&mut self, action: UnoAction) -> Result<(), EngineError> {
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
            UnoAction::Draw => {
                self.refill_draw_pile();
                match self.draw_pile.pop() {
                    Some(card) => {
                        self.consecutive_noop_draws = 0;
                        self.hands[seat].push(card);
                        if self.playable(&card) {
                            self.pending_forced = Some(card);
                            return Ok(()); // same seat must play it
                        }
                        self.to_act = 1 - seat;
                    }
                    None => {
                        // Nothing left to draw anywhere: pass, and end the
                        // game as drawn if both players are stuck.
                        self.consecutive_noop_draws += 1;
                        if self.consecutive_noop_draws >= 2 {
                            self.drawn_to_draw = true;
                            return Ok(());
                        }
                        self.to_act = 1 - seat;
                    }
                }
            }
            UnoAction::Play(color, face) => {
                self.consecutive_noop_draws = 0;
                self.pending_forced = None;
                let hand = &mut self.hands[seat];
                let idx = hand
                    .iter()
                    .position(|c| match c {
                        Card::Uno { face: f, .. } if face.is_wild() => *f == face,
                        Card::Uno { color: c2, face: f } => (*c2, *f) == (color, face),
                        _ => false,
                    })
                    .expect("legality guarantees the card is in hand");
                let card = hand.remove(idx);
                self.discard.push(card);
                self.top_as_played = (color, face);
                if self.hands[seat].is_empty() {
                    self.winner = Some(seat);
                    return Ok(());
                }
                match face {
                    UnoFace::Skip | UnoFace::Reverse => {} // 2-player: act again
                    UnoFace::DrawTwo => self.opponent_draws(seat, 2),
                    UnoFace::WildDrawFour => self.opponent_draws(seat, 4),
                    UnoFace::Wild | UnoFace::Digit(_) => self.to_act = 1 - seat,
                }
            }
        }
        Ok(())
    }

    fn opponent_draws(&mut self, seat: usize, count: usize) {
        for _ in 0..count {
            self.refill_draw_pile();
            match self.draw_pile.pop() {
                Some(card) => self.hands[1 - seat].push(card),
                None => break,
            }
        }
        // Opponent misses their turn; the actor plays again.
    }

    fn refill_draw_pile(&mut self) {
        if self.draw_pile.is_empty() && self.discard.len() > 1 {
            let top = self.discard.pop().expect("non-empty");
            self.draw_pile.append(&mut self.discard);
            self.discard.push(top);
            self.draw_pile.shuffle(&mut self.rng);
        }
    }

    pub fn payoffs(&self) -> Option<Vec<f64>> {
        if self.drawn_to_draw {
            return Some(vec![0.0, 0.0]);
        }
        self.winner.map(|w| {
            let mut p = vec![-1.0, -1.0];
            p[w] = 1.0;
            p
        })
    }

    pub fn winner(&self) -> Option<usize> {
        self.winner
    }

    pub fn observe(&self, seat: usize) -> UnoView {
        let mut hand: Vec<Card> = self.hands[seat].clone();
        hand.sort();
        let (color, face) = self.top_as_played;
        UnoView {
            step: self.step_count,
            position: seat as u32,
            hand: hand.iter().map(|c| crate::cards::format_card(*c)).collect(),
            top_card: format!("{}-{}", color.ch(), face.as_str()),
            played_cards: self
                .discard
                .iter()
                .map(|c| crate::cards::format_card(*c))
                .collect(),
            cards_left: self.hands.iter().map(|h| h.len() as u32).collect(),
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
        cards.extend(&self.draw_pile);
        cards.extend(&self.discard);
        cards
    }

    pub fn hand_sizes(&self) -> [usize; 2] {
        [self.hands[0].len(), self.hands[1].len()]
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::{format_card, same_multiset};
    use crate::engine::match_rng;
    use rand::Rng;

    fn new_state(seed: u64, index: u64) -> UnoState {
        UnoState::new(match_rng(seed, index))
    }

    #[test]
    fn deal_is_seven_each_with_one_flipped() {
        let s = new_state(1, 0);
        assert_eq!(s.hand_sizes(), [7, 7]);
        assert_eq!(s.observe(0).played_cards.len(), 1);
        let top = &s.observe(0).top_card;
        assert!(!top.contains("wild"), "starting flip must be colored: {top}");
    }

    #[test]
    fn conservation_and_legality_through_random_play() {
        let deck = build_deck(Game::Uno);
        for idx in 0..40 {
            let mut s = new_state(42, idx);
            let mut rng = match_rng(7, idx);
            while !s.is_terminal() {
                assert!(same_multiset(&s.all_cards(), &deck));
                let legal = s.legal_actions();
                assert!(!legal.is_empty());
                let action = legal[rng.gen_range(0..legal.len())];
                s.apply(action).unwrap();
                assert!(s.step_count() <= 2000, "runaway game");
            }
            let p = s.payoffs().unwrap();
            assert_eq!(p[0] + p[1], 0.0);
        }
    }

    #[test]
    fn draw_only_when_nothing_playable() {
        for idx in 0..200 {
            let s = new_state(3, idx);
            let legal = s.legal_actions();
            if legal.contains(&UnoAction::Draw) {
                assert_eq!(legal.len(), 1);
            } else {
                assert!(!legal.is_empty());
            }
        }
    }

    #[test]
    fn skip_reverse_draw_two_retain_turn() {
        // Search for a state whose legal set contains each effect card and
        // verify the same seat acts again after playing it.
        let mut found = [false; 3];
        for idx in 0..400 {
            let s = new_state(11, idx);
            let seat = s.seat_to_act();
            for action in s.legal_actions() {
                let slot = match action {
                    UnoAction::Play(_, UnoFace::Skip) => 0,
                    UnoAction::Play(_, UnoFace::Reverse) => 1,
                    UnoAction::Play(_, UnoFace::DrawTwo) => 2,
                    _ => continue,
                };
                let mut next = s.clone();
                let before = next.hand_sizes()[1 - seat];
                next.apply(action).unwrap();
                if next.is_terminal() {
                    continue;
                }
                assert_eq!(next.seat_to_act(), seat, "{action:?}");
                if slot == 2 {
                    assert_eq!(next.hand_sizes()[1 - seat], before + 2);
                }
                found[slot] = true;
            }
            if found.iter().all(|f| *f) {
                break;
            }
        }
        assert!(found.iter().all(|f| *f), "coverage: {found:?}");
    }

    #[test]
    fn wild_expands_to_four_declarations() {
        for idx in 0..400 {
            let s = new_state(19, idx);
            let wild_plays: Vec<_> = s
                .legal_actions()
                .into_iter()
                .filter(|a| matches!(a, UnoAction::Play(_, UnoFace::Wild)))
                .collect();
            if wild_plays.is_empty() {
                continue;
            }
            assert_eq!(wild_plays.len(), 4);
            let mut s2 = s.clone();
            s2.apply(UnoAction::Play(UnoColor::Green, UnoFace::Wild)).unwrap();
            assert_eq!(s2.observe(0).top_card, "g-wild");
            return;
        }
        panic!("no wild-holding start state found");
    }

    #[test]
    fn forced_play_after_drawing_playable_card() {
        // Find a state where draw is the only action and the drawn card is
        // playable; the same seat must then be forced to play exactly it.
        for idx in 0..2000 {
            let mut s = new_state(23, idx);
            if s.legal_actions() != vec![UnoAction::Draw] {
                continue;
            }
            let seat = s.seat_to_act();
            let before = s.hand_sizes()[seat];
            s.apply(UnoAction::Draw).unwrap();
            if s.seat_to_act() == seat && !s.is_terminal() {
                assert_eq!(s.hand_sizes()[seat], before + 1);
                let legal = s.legal_actions();
                assert!(!legal.is_empty() && legal.len() <= 4);
                assert!(!legal.contains(&UnoAction::Draw));
                let drawn = *s.pending_forced.as_ref().unwrap();
                for a in &legal {
                    match (a, drawn) {
                        (UnoAction::Play(_, f), Card::Uno { face, .. }) => assert_eq!(*f, face),
                        _ => panic!("unexpected action {a:?}"),
                    }
                }
                return;
            }
        }
        panic!("no forced-play scenario found");
    }

    #[test]
    fn wire_roundtrip() {
        let actions = [
            UnoAction::Draw,
            UnoAction::Play(UnoColor::Red, UnoFace::Digit(5)),
            UnoAction::Play(UnoColor::Blue, UnoFace::WildDrawFour),
            UnoAction::Play(UnoColor::Green, UnoFace::DrawTwo),
        ];
        for a in actions {
            assert_eq!(UnoAction::from_wire(&a.as_wire()), Some(a));
        }
        assert_eq!(UnoAction::from_wire("draw").unwrap(), UnoAction::Draw);
        assert!(UnoAction::from_wire("x-5").is_none());
    }

    #[test]
    fn independent_matcher_agrees_on_playability() {
        // Rule-text matcher written directly against the template wording.
        for idx in 0..100 {
            let s = new_state(31, idx);
            let view = s.observe(s.seat_to_act());
            let top = &view.top_card;
            let (top_color, top_face) = top.split_once('-').unwrap();
            for notation in &view.hand {
                let (color, face) = notation.split_once('-').unwrap();
                let matcher_says = face == "wild"
                    || face == "wild_draw_4"
                    || color == top_color
                    || face == top_face;
                let card = crate::cards::parse_card(notation).unwrap();
                assert_eq!(s.playable(&card), matcher_says, "{notation} on {top}");
                let _ = format_card(card);
            }
        }
    }
}

//! Brute-force verification of Guandan move enumeration: an independent
//! subset classifier enumerates every playable shape a hand supports, and
//! the engine's move list must match it exactly — same shapes, minimal
//! wild usage, correct follow filtering, and a clean trip through the
//! `[Type, Rank, Cards]` wire form.

use std::collections::HashMap;

use cardgen_core::cards::{build_deck, parse_card, Card, Game, Rank, Suit};
use cardgen_core::guandan::combo::{
    compare_guan, enumerate_guan_moves, interpret_guan_wire, GuanCombo, GuanType, LevelContext,
};
use cardgen_core::guandan::{guan_action_value, GuanAction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A playable shape: type, declared rank, card count, and the two bomb
/// distinctions that the type/rank pair alone does not carry.
type Shape = (GuanType, char, usize, bool, bool);

fn shape_of(combo: &GuanCombo) -> Shape {
    (combo.ty, combo.rank_ch, combo.cards.len(), combo.straight_flush, combo.joker_bomb)
}

/// Natural rank order, 2 low through A high.
const NAT: [char; 13] = ['2', '3', '4', '5', '6', '7', '8', '9', 'T', 'J', 'Q', 'K', 'A'];

fn nat_pos(ch: char) -> usize {
    NAT.iter().position(|c| *c == ch).unwrap()
}

/// Rank char at a sequence position 1..=14 (ace at both ends).
fn seq_ch(pos: usize) -> char {
    match pos {
        1 | 14 => 'A',
        p => NAT[p - 2],
    }
}

/// Set-type comparison order: 2..A natural, the level rank lifted above
/// aces, jokers on top.
fn order_of(ch: char, level: char) -> usize {
    match ch {
        'B' => 14,
        'R' => 15,
        c if c == level => 13,
        c => nat_pos(c),
    }
}

/// All shapes a subset forms using every one of its cards. Written from
/// the rules directly: jokers only pair with themselves (or form the
/// four-joker bomb, or serve as the pair of a full house), the two level
/// hearts substitute for any non-joker as long as one natural card
/// anchors the combination, and sequences run over positions 1..=14.
fn classify_subset(cards: &[Card], level: Rank) -> Vec<Shape> {
    let n = cards.len();
    let mut shapes = Vec::new();
    let wild = Card::std(Suit::Heart, level);
    let wilds = cards.iter().filter(|c| **c == wild).count();
    let blacks = cards.iter().filter(|c| **c == Card::BlackJoker).count();
    let reds = cards.iter().filter(|c| **c == Card::RedJoker).count();
    let naturals: Vec<Card> = cards
        .iter()
        .filter(|c| **c != wild && !c.is_joker())
        .copied()
        .collect();
    let nat_chars: Vec<char> = naturals.iter().map(|c| c.rank().unwrap().ch()).collect();

    if naturals.is_empty() && wilds == 0 {
        match (blacks, reds, n) {
            (1, 0, 1) => shapes.push((GuanType::Single, 'B', 1, false, false)),
            (0, 1, 1) => shapes.push((GuanType::Single, 'R', 1, false, false)),
            (2, 0, 2) => shapes.push((GuanType::Pair, 'B', 2, false, false)),
            (0, 2, 2) => shapes.push((GuanType::Pair, 'R', 2, false, false)),
            (2, 2, 4) => shapes.push((GuanType::Boom, 'R', 4, false, true)),
            _ => {}
        }
    }

    // Full house with a joker pair: two identical jokers plus a wild-backed
    // trio of one natural rank.
    if n == 5
        && ((blacks == 2 && reds == 0) || (reds == 2 && blacks == 0))
        && !naturals.is_empty()
        && naturals.len() + wilds == 3
        && nat_chars.iter().all(|c| *c == nat_chars[0])
    {
        shapes.push((GuanType::ThreeWithTwo, nat_chars[0], 5, false, false));
    }

    if blacks > 0 || reds > 0 {
        return shapes;
    }

    // Same-rank sets, wilds topping up.
    if naturals.is_empty() {
        // All wilds: they play at their printed rank.
        match n {
            1 => shapes.push((GuanType::Single, level.ch(), 1, false, false)),
            2 => shapes.push((GuanType::Pair, level.ch(), 2, false, false)),
            _ => {}
        }
    } else if nat_chars.iter().all(|c| *c == nat_chars[0]) {
        let ch = nat_chars[0];
        match n {
            1 => shapes.push((GuanType::Single, ch, 1, false, false)),
            2 => shapes.push((GuanType::Pair, ch, 2, false, false)),
            3 => shapes.push((GuanType::Trips, ch, 3, false, false)),
            4..=10 => shapes.push((GuanType::Boom, ch, n, false, false)),
            _ => {}
        }
    }

    // Full house from standards: naturals split across a trio rank and a
    // pair rank, wilds covering the shortfall.
    if n == 5 && !naturals.is_empty() {
        for trio in NAT {
            for pair in NAT {
                if trio == pair {
                    continue;
                }
                let ct = nat_chars.iter().filter(|c| **c == trio).count();
                let cp = nat_chars.iter().filter(|c| **c == pair).count();
                if ct + cp == naturals.len()
                    && ct <= 3
                    && cp <= 2
                    && (3 - ct) + (2 - cp) == wilds
                    && !shapes.contains(&(GuanType::ThreeWithTwo, trio, 5, false, false))
                {
                    shapes.push((GuanType::ThreeWithTwo, trio, 5, false, false));
                }
            }
        }
    }

    // Sequences: straights (five singles), tubes (three pairs), plates
    // (two trios), each over consecutive positions.
    for (ty, span, copies) in [
        (GuanType::Straight, 5usize, 1usize),
        (GuanType::ThreePair, 3, 2),
        (GuanType::TripsPair, 2, 3),
    ] {
        if n != span * copies || naturals.is_empty() {
            continue;
        }
        for top in span..=14 {
            let window: Vec<char> = (top - span + 1..=top).map(seq_ch).collect();
            let mut deficit = 0usize;
            let mut fits = true;
            for ch in &window {
                let have = nat_chars.iter().filter(|c| **c == *ch).count();
                if have > copies {
                    fits = false;
                    break;
                }
                deficit += copies - have;
            }
            let all_in_window = nat_chars.iter().all(|c| window.contains(c));
            if fits && all_in_window && deficit == wilds {
                shapes.push((ty, seq_ch(top), n, false, false));
            }
        }
    }

    // Straight flush: a suited five-run, wilds filling gaps.
    if n == 5 && !naturals.is_empty() {
        let suits: Vec<Suit> = naturals.iter().filter_map(|c| c.suit()).collect();
        if suits.iter().all(|s| *s == suits[0]) {
            for top in 5..=14 {
                let window: Vec<char> = (top - 4..=top).map(seq_ch).collect();
                let mut deficit = 0usize;
                let mut fits = true;
                for ch in &window {
                    let have = nat_chars.iter().filter(|c| **c == *ch).count();
                    if have > 1 {
                        fits = false;
                        break;
                    }
                    deficit += 1 - have;
                }
                let all_in_window = nat_chars.iter().all(|c| window.contains(c));
                if fits && all_in_window && deficit == wilds {
                    shapes.push((GuanType::Boom, seq_ch(top), 5, true, false));
                }
            }
        }
    }

    shapes
}

/// Every shape the hand can play, with the fewest wilds any card choice
/// needs for it, by exhausting all subsets.
fn oracle_moves(hand: &[Card], level: Rank) -> HashMap<Shape, usize> {
    let wild = Card::std(Suit::Heart, level);
    let mut best: HashMap<Shape, usize> = HashMap::new();
    for mask in 1u32..(1 << hand.len()) {
        let subset: Vec<Card> = (0..hand.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| hand[i])
            .collect();
        let wilds_used = subset.iter().filter(|c| **c == wild).count();
        for shape in classify_subset(&subset, level) {
            let entry = best.entry(shape).or_insert(usize::MAX);
            *entry = (*entry).min(wilds_used);
        }
    }
    best
}

/// Independent beats relation on shapes: bombs rank by tier (four cards,
/// five, straight flush, six through ten, jokers) then rank; everything
/// else must match types and exceed in rank order.
fn oracle_beats(a: Shape, b: Shape, level: char) -> bool {
    let tier = |s: Shape| -> Option<(usize, usize)> {
        let (ty, ch, len, sf, jb) = s;
        if jb {
            return Some((9, 0));
        }
        if sf {
            return Some((2, if ch == 'A' { 14 } else { nat_pos(ch) + 2 }));
        }
        if ty == GuanType::Boom {
            let t = match len {
                4 => 0,
                5 => 1,
                l => l - 3,
            };
            return Some((t, order_of(ch, level)));
        }
        None
    };
    match (tier(a), tier(b)) {
        (Some(x), Some(y)) => x > y,
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (None, None) => {
            let (ty_a, ch_a, len_a, ..) = a;
            let (ty_b, ch_b, len_b, ..) = b;
            if ty_a != ty_b || len_a != len_b {
                return false;
            }
            let key = |ch: char| match ty_a {
                GuanType::Straight | GuanType::ThreePair | GuanType::TripsPair => {
                    if ch == 'A' {
                        14
                    } else {
                        nat_pos(ch) + 2
                    }
                }
                _ => order_of(ch, level),
            };
            key(ch_a) > key(ch_b)
        }
    }
}

/// Sample a hand of `size` cards; every fourth draw comes from a pool rich
/// in level cards, jokers, and neighbouring ranks so wild handling gets
/// dense coverage.
fn sample_hand(rng: &mut ChaCha8Rng, deck: &[Card], level: Rank, size: usize, focused: bool) -> Vec<Card> {
    let mut pool: Vec<Card> = if focused {
        let lo = level.ch();
        let near: Vec<char> = {
            let i = nat_pos(lo);
            [i.saturating_sub(1), i, (i + 1) % 13, 12]
                .iter()
                .map(|j| NAT[*j])
                .collect()
        };
        deck.iter()
            .filter(|c| {
                c.is_joker() || c.rank().map(|r| near.contains(&r.ch())).unwrap_or(false)
            })
            .copied()
            .collect()
    } else {
        deck.to_vec()
    };
    pool.shuffle(rng);
    pool.truncate(size);
    pool
}

fn wire_roundtrip(combo: &GuanCombo, ctx: &LevelContext) {
    let value = guan_action_value(&GuanAction::Play(combo.clone()));
    let parts = value.as_array().expect("wire form is a triple");
    assert_eq!(parts.len(), 3);
    let ty = GuanType::from_str(parts[0].as_str().unwrap()).expect("known type tag");
    let rank_ch = parts[1].as_str().unwrap().chars().next().unwrap();
    let cards: Vec<Card> = parts[2]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| parse_card(v.as_str().unwrap()).unwrap())
        .collect();
    let decoded = interpret_guan_wire(ty, rank_ch, &cards, ctx);
    assert_eq!(decoded.as_ref(), Some(combo), "wire trip must preserve the combo");
}

#[test]
fn enumeration_matches_subset_oracle_on_small_hands() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6DAB);
    let deck = build_deck(Game::Guandan);
    let mut shape_total = 0usize;
    for trial in 0..2000usize {
        let level = Rank::from_index(trial % 13);
        let ctx = LevelContext::new(level);
        let size = 1 + rng.gen_range(0..12);
        let hand = sample_hand(&mut rng, &deck, level, size, trial % 4 == 0);

        let expected = oracle_moves(&hand, level);
        let moves = enumerate_guan_moves(&hand, None, &ctx);

        let mut produced: HashMap<Shape, usize> = HashMap::new();
        for combo in &moves {
            for card in &combo.cards {
                let used = combo.cards.iter().filter(|c| *c == card).count();
                let held = hand.iter().filter(|c| *c == card).count();
                assert!(used <= held, "overdraws {card:?}: {combo:?} from {hand:?}");
            }
            wire_roundtrip(combo, &ctx);
            let entry = produced.entry(shape_of(combo)).or_insert(usize::MAX);
            *entry = (*entry).min(combo.wildcards_used as usize);
        }

        let mut missing: Vec<&Shape> = expected.keys().filter(|s| !produced.contains_key(*s)).collect();
        let mut extra: Vec<&Shape> = produced.keys().filter(|s| !expected.contains_key(*s)).collect();
        missing.sort_by_key(|s| format!("{s:?}"));
        extra.sort_by_key(|s| format!("{s:?}"));
        assert!(
            missing.is_empty() && extra.is_empty(),
            "level {level:?} hand {hand:?}\nmissing {missing:?}\nextra {extra:?}"
        );
        for (shape, min_wilds) in &expected {
            assert_eq!(
                produced[shape], *min_wilds,
                "wild count not minimal for {shape:?} in {hand:?} at level {level:?}"
            );
        }
        shape_total += expected.len();
    }
    assert!(shape_total > 10_000, "sampling too thin: {shape_total} shapes");
}

#[test]
fn follow_enumeration_is_the_beats_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF011);
    let deck = build_deck(Game::Guandan);
    let mut checked = 0usize;
    for trial in 0..400usize {
        let level = Rank::from_index(trial % 13);
        let ctx = LevelContext::new(level);
        let mut shuffled = deck.clone();
        shuffled.shuffle(&mut rng);
        let leader_hand = &shuffled[..10];
        let follower_hand = &shuffled[10..22];

        let lead_options = enumerate_guan_moves(leader_hand, None, &ctx);
        if lead_options.is_empty() {
            continue;
        }
        let lead = &lead_options[rng.gen_range(0..lead_options.len())];

        let all = enumerate_guan_moves(follower_hand, None, &ctx);
        let follow = enumerate_guan_moves(follower_hand, Some(lead), &ctx);
        for combo in &all {
            let should_beat = oracle_beats(shape_of(combo), shape_of(lead), level.ch());
            assert_eq!(
                follow.contains(combo),
                should_beat,
                "level {level:?} lead {lead:?} combo {combo:?}"
            );
            assert_eq!(compare_guan(combo, lead, &ctx), should_beat);
        }
        for combo in &follow {
            assert!(all.contains(combo));
        }
        checked += all.len();
    }
    assert!(checked > 5_000, "follow sampling too thin: {checked}");
}

#[test]
fn pass_and_exchange_wire_forms_are_fixed() {
    assert_eq!(
        guan_action_value(&GuanAction::Pass).to_string(),
        r#"["PASS","PASS","PASS"]"#
    );
    let card = parse_card("HR").unwrap();
    assert_eq!(
        guan_action_value(&GuanAction::Tribute(card)).to_string(),
        r#"["tribute","R",["HR"]]"#
    );
    let card = parse_card("D4").unwrap();
    assert_eq!(
        guan_action_value(&GuanAction::Back(card)).to_string(),
        r#"["back","4",["D4"]]"#
    );
}

//! Instruction rendering against frozen golden files, render totality and
//! codec round-trips over fuzzed play, and SFT emission end to end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cardgen_core::cards::{Game, ALL_GAMES};
use cardgen_core::dou::DouView;
use cardgen_core::engine::{match_rng, GameState, Observation, View};
use cardgen_core::gin::GinView;
use cardgen_core::guandan::GuanView;
use cardgen_core::poker::holdem::{LimitView, NoLimitView};
use cardgen_core::poker::leduc::LeducView;
use cardgen_core::prompts::{
    self, decode_action, encode_action, game_template, render, template, SftRecord,
};
use cardgen_core::records::{Manifest, TrajectoryRecord, TrajectoryStep};
use cardgen_core::uno::UnoView;

fn wires(texts: &[&str]) -> Vec<String> {
    texts.iter().map(|t| t.to_string()).collect()
}

/// One hand-built mid-game observation per playable game, paired with its
/// legal-action wire list. These are the fixtures the golden files freeze.
fn fixture_observations() -> Vec<(Observation, Vec<String>)> {
    let dou = DouView {
        turn: 3,
        role: "landlord".to_string(),
        hand: vec![
            4, 4, 5, 5, 6, 7, 8, 8, 9, 10, 11, 11, 12, 13, 14, 17, 20, 30,
        ],
        others_union: vec![
            3, 3, 4, 4, 5, 5, 6, 6, 6, 7, 7, 7, 8, 8, 9, 10, 10, 10, 11, 11, 12, 12, 12, 13, 13,
            13, 14, 14, 14, 17, 17, 17,
        ],
        last_move: vec![9, 9],
        played: vec![3, 3, 9, 9],
        cards_left: vec![18, 15, 17],
        bombs_played: 0,
        history: vec![(0, vec![3, 3]), (1, vec![9, 9]), (2, vec![])],
    };
    let guan = GuanView {
        position: 2,
        hand: wires(&["S6", "H6", "C9", "D9", "HQ", "SA"]),
        others_remaining: wires(&[
            "S2", "H2", "C3", "D4", "S7", "H7", "C8", "DT", "SJ", "HJ", "CK", "DK", "SB", "HR",
            "HA",
        ]),
        last_action: r#"["Pair","8",["S8","C8"]]"#.to_string(),
        teammate_last: "[]".to_string(),
        cards_left: vec![5, 6, 4],
        played_down: wires(&["H3", "D3"]),
        played_teammate: wires(&[]),
        played_up: wires(&["S8", "C8"]),
        self_rank: "5".to_string(),
        opponent_rank: "2".to_string(),
        current_rank: "5".to_string(),
    };
    let uno = UnoView {
        step: 4,
        position: 1,
        hand: wires(&["r-3", "g-3", "b-skip", "y-7"]),
        top_card: "r-9".to_string(),
        played_cards: wires(&["r-5", "r-1", "r-9"]),
        cards_left: vec![4, 5],
        history: vec![
            (0, "r-5".to_string()),
            (1, "r-1".to_string()),
            (0, "r-9".to_string()),
        ],
    };
    let gin = GinView {
        step: 7,
        id: 0,
        hand: wires(&["2S", "3S", "4S", "5H", "6H", "7H", "9C", "9D", "TC", "KD"]),
        top_discard: "8C".to_string(),
        other_discards: wires(&["QH", "JD"]),
        opponent_known: wires(&["JS"]),
        stock_left: 31,
        history: vec![
            (1, "discard JD".to_string()),
            (0, "draw_card".to_string()),
            (0, "discard QH".to_string()),
            (1, "pick_up_discard".to_string()),
            (1, "discard 8C".to_string()),
        ],
    };
    let leduc = LeducView {
        round: 2,
        position: 0,
        hand: "K".to_string(),
        public_card: "Q".to_string(),
        my_chips: 3,
        pot: 6,
        num_raises: 1,
        history: vec![(0, "raise".to_string()), (1, "call".to_string())],
    };
    let limit = LimitView {
        round: "flop".to_string(),
        position: 1,
        hole_cards: wires(&["SA", "DK"]),
        community_cards: wires(&["H7", "C9", "DA"]),
        my_chips: 4,
        pot: 8,
        num_raises: 2,
        history: vec![
            (0, "raise".to_string()),
            (1, "raise".to_string()),
            (0, "call".to_string()),
        ],
    };
    let nolimit = NoLimitView {
        round: "turn".to_string(),
        position: 0,
        hole_cards: wires(&["S5", "H5"]),
        community_cards: wires(&["C5", "D9", "SJ", "HK"]),
        my_chips: 20,
        all_chips: vec![20, 20],
        pot: 40,
        stakes: vec![80, 80],
        history: vec![
            (0, "CHECK_CALL".to_string()),
            (1, "RAISE_HALF_POT".to_string()),
            (0, "CHECK_CALL".to_string()),
        ],
    };
    vec![
        (
            Observation {
                game: Game::Doudizhu,
                seat: 0,
                view: View::Dou(dou),
            },
            wires(&["[11,11]", "[20,30]", "[]"]),
        ),
        (
            Observation {
                game: Game::Guandan,
                seat: 2,
                view: View::Guan(guan),
            },
            wires(&[
                r#"["Pair","9",["C9","D9"]]"#,
                r#"["PASS","PASS","PASS"]"#,
            ]),
        ),
        (
            Observation {
                game: Game::Uno,
                seat: 1,
                view: View::Uno(uno),
            },
            wires(&["r-3"]),
        ),
        (
            Observation {
                game: Game::GinRummy,
                seat: 0,
                view: View::Gin(gin),
            },
            wires(&["draw_card", "pick_up_discard"]),
        ),
        (
            Observation {
                game: Game::Leduc,
                seat: 0,
                view: View::Leduc(leduc),
            },
            wires(&["raise", "check"]),
        ),
        (
            Observation {
                game: Game::LimitHoldem,
                seat: 1,
                view: View::Limit(limit),
            },
            wires(&["raise", "check"]),
        ),
        (
            Observation {
                game: Game::NoLimitHoldem,
                seat: 0,
                view: View::NoLimit(nolimit),
            },
            wires(&[
                "FOLD",
                "CHECK_CALL",
                "RAISE_HALF_POT",
                "RAISE_POT",
                "ALL_IN",
            ]),
        ),
    ]
}

fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/goldens")
        .join(format!("{name}.txt"))
}

#[test]
fn rendered_instructions_match_the_eight_golden_files() {
    for (obs, legal) in fixture_observations() {
        let rendered = render(&obs, &legal).unwrap();
        let golden = std::fs::read_to_string(golden_path(obs.game.as_str())).unwrap();
        assert_eq!(rendered, golden, "golden drift for {}", obs.game.as_str());
    }
    // Mahjong ships a template but no engine; its golden freezes the
    // unfilled template bytes.
    let golden = std::fs::read_to_string(golden_path("mahjong")).unwrap();
    assert_eq!(template("mahjong").unwrap().text(), golden);
}

#[test]
fn every_instruction_starts_with_its_games_preamble() {
    for (obs, legal) in fixture_observations() {
        let rendered = render(&obs, &legal).unwrap();
        let preamble = game_template(obs.game).preamble();
        assert!(rendered.starts_with(preamble), "{}", obs.game.as_str());
        let golden = std::fs::read_to_string(golden_path(obs.game.as_str())).unwrap();
        assert!(golden.starts_with(preamble));
    }
}

/// Random-play fuzz: every reachable observation renders, every legal
/// action round-trips through the codec, and every encoded value appears
/// verbatim inside the rendered legal-actions slot.
#[test]
fn render_is_total_and_the_codec_round_trips_over_fuzzed_play() {
    let games_per = |game: Game| match game {
        Game::Doudizhu => 120,
        Game::Guandan => 30,
        Game::Uno => 120,
        Game::GinRummy => 120,
        Game::Leduc => 800,
        Game::LimitHoldem => 350,
        Game::NoLimitHoldem => 350,
    };
    for game in ALL_GAMES {
        let mut renders = 0u64;
        let mut round_trips = 0u64;
        for match_index in 0..games_per(game) {
            let mut state = GameState::reset(game, 0xF1D0, match_index);
            let mut rng = match_rng(0xF1D0 ^ 0x00C0FFEE, match_index);
            while !state.is_terminal() {
                let seat = state.seat_to_act();
                let legal = state.legal_actions();
                let legal_wires: Vec<String> = legal.iter().map(|a| a.wire()).collect();
                let obs = state.observe(seat);
                let instruction = render(&obs, &legal_wires)
                    .unwrap_or_else(|e| panic!("{game:?} step {}: {e}", state.step_count()));
                renders += 1;
                let spectator = state.observe((seat + 1) % state.num_seats());
                render(&spectator, &legal_wires).unwrap();
                for action in &legal {
                    let encoded = encode_action(action);
                    let decoded = decode_action(&state, &encoded).unwrap_or_else(|e| {
                        panic!("{game:?}: {encoded} failed to decode: {e}")
                    });
                    assert_eq!(&decoded, action, "{game:?}: {encoded}");
                    round_trips += 1;
                    let value = encoded
                        .strip_prefix(r#"{"action":"#)
                        .and_then(|s| s.strip_suffix('}'))
                        .unwrap();
                    assert!(
                        instruction.contains(value),
                        "{game:?}: {value} missing from legal slot"
                    );
                }
                let pick = rng.gen_range(0..legal.len());
                state.apply(&legal[pick]).unwrap();
            }
        }
        assert!(renders >= 400, "{game:?}: only {renders} renders");
        assert!(
            round_trips >= 2_000,
            "{game:?}: only {round_trips} round-trips"
        );
    }
}

/// Record a few random matches, keep the winning seats' multi-choice steps,
/// and push them through SFT emission.
#[test]
fn sft_emission_pairs_every_kept_step_with_its_instruction() {
    let dir = tempfile::tempdir().unwrap();
    let sample_path = dir.path().join("samples.jsonl");
    let sft_path = dir.path().join("sft.jsonl");

    let mut kept = Vec::new();
    for game in [Game::Leduc, Game::Doudizhu, Game::Uno] {
        for match_index in 0..6u64 {
            let mut state = GameState::reset(game, 99, match_index);
            let mut rng = ChaCha8Rng::seed_from_u64(match_index ^ 0xAB);
            let mut steps: Vec<TrajectoryStep> = Vec::new();
            let mut step_no = 0u32;
            while !state.is_terminal() {
                let seat = state.seat_to_act();
                let legal = state.legal_actions();
                let action = legal[rng.gen_range(0..legal.len())].clone();
                steps.push(TrajectoryStep {
                    match_id: match_index,
                    step: step_no,
                    seat: seat as u32,
                    game: game.as_str().to_string(),
                    view: state.observe(seat).view,
                    legal: legal.iter().map(|a| a.wire()).collect(),
                    action: action.wire(),
                    is_winner: false,
                });
                state.apply(&action).unwrap();
                step_no += 1;
            }
            let winners: Vec<u32> = (0..state.num_seats())
                .filter(|s| state.is_winner(*s).unwrap())
                .map(|s| s as u32)
                .collect();
            for mut step in steps {
                step.is_winner = winners.contains(&step.seat);
                if step.is_winner && step.legal.len() > 1 {
                    kept.push(step);
                }
            }
        }
    }
    assert!(kept.len() > 20, "fixture too small: {}", kept.len());

    let manifest = Manifest::new("samples", serde_json::json!({"seed": 99}));
    let mut file = std::fs::File::create(&sample_path).unwrap();
    cardgen_core::records::write_lines(
        &mut file,
        &manifest,
        kept.iter()
            .cloned()
            .map(|s| TrajectoryRecord::Step(Box::new(s))),
    )
    .unwrap();

    let summary = prompts::emit_sft(&sample_path, &sft_path).unwrap();
    assert_eq!(summary.steps_in as usize, kept.len());
    assert_eq!(summary.records_out as usize, kept.len());

    let text = std::fs::read_to_string(&sft_path).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.contains(r#""kind":"sft""#), "{first}");
    let mut checked = 0usize;
    for (line, step) in lines.zip(&kept) {
        let record: SftRecord = serde_json::from_str(line).unwrap();
        assert_eq!(record.meta.game, step.game);
        assert_eq!(record.meta.match_id, step.match_id);
        assert_eq!(record.meta.step, step.step);
        assert_eq!(record.meta.seat, step.seat);
        let value: serde_json::Value = serde_json::from_str(&record.output).unwrap();
        assert!(value.get("action").is_some());
        let inner = serde_json::to_string(value.get("action").unwrap()).unwrap();
        assert!(
            record.instruction.contains(&inner),
            "output {inner} not inside instruction legal slot"
        );
        let preamble = game_template(Game::from_str(&record.meta.game).unwrap()).preamble();
        assert!(record.instruction.starts_with(preamble));
        checked += 1;
    }
    assert_eq!(checked, kept.len());

    // Re-running the emission reproduces the bytes exactly.
    let sft_again = dir.path().join("sft2.jsonl");
    prompts::emit_sft(&sample_path, &sft_again).unwrap();
    assert_eq!(
        std::fs::read_to_string(&sft_path).unwrap(),
        std::fs::read_to_string(&sft_again).unwrap()
    );

    // A sample file with a broken record reports its line number.
    let broken_path = dir.path().join("broken.jsonl");
    let mut broken = std::fs::File::create(&broken_path).unwrap();
    use std::io::Write;
    writeln!(broken, "{}", TrajectoryRecord::Manifest(manifest).to_line()).unwrap();
    writeln!(broken, "{{\"record\":\"step\",\"oops\":true}}").unwrap();
    drop(broken);
    let err = prompts::emit_sft(&broken_path, &sft_again).unwrap_err();
    assert!(
        matches!(
            &err,
            cardgen_core::prompts::PromptError::MalformedRecord { line: 2, .. }
        ),
        "{err:?}"
    );
}


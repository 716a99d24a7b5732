//! Instruction templates, slot-fill rendering, the per-game action JSON
//! codec, and SFT record emission.
//!
//! Each game ships a fixed instruction template embedded byte-for-byte. A
//! template is static text plus an ordered list of field slots (the numbered
//! information list); rendering appends each observation value after its
//! slot's colon and changes nothing else, so a render with all-empty values
//! reproduces the template bytes exactly.
//!
//! Slot value conventions, frozen here and exercised by the golden files:
//! - DouDizhu card groups render as compact JSON integer arrays (`[3,3,4]`);
//!   Guandan card groups as compact JSON string arrays (`["H4","C4"]`) and
//!   actions as `[Type, Rank, Cards]` triples; all other games use their
//!   plain wire notation (`r-3`, `discard 3S`, `call`, `CHECK_CALL`).
//! - Histories render as `(seat, action)` pairs joined by `", "`.
//! - Empty histories and empty notation-string card lists render as `none`;
//!   empty JSON-array values render as `[]`.
//! - The legal-actions slot is a compact JSON array of wire values, and the
//!   codec's `{"action": ...}` payload serializes identically, so a valid
//!   output string always appears verbatim inside its instruction.

use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cards::Game;
use crate::dou::{DouAction, DouView};
use crate::engine::{Action, GameState, Observation, View};
use crate::gin::GinView;
use crate::guandan::{guan_action_value, GuanView};
use crate::poker::holdem::{LimitView, NoLimitView};
use crate::poker::leduc::LeducView;
use crate::records::{Manifest, RecordError, RecordReader, TrajectoryRecord, TrajectoryStep};
use crate::uno::UnoView;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("template {template}: no value for slot {slot:?}")]
    MissingField { template: String, slot: String },
    #[error("template {template}: {extra} more values than slots")]
    ExtraFields { template: String, extra: usize },
    #[error("no template named {0:?}")]
    UnknownTemplate(String),
    #[error("action text is not valid JSON: {0}")]
    ParseError(String),
    #[error("action JSON has the wrong shape: {0}")]
    SchemaMismatch(String),
    #[error("not a recognizable action: {0}")]
    UnknownAction(String),
    #[error("line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Template names: the seven playable games plus `mahjong`, whose samples
/// arrive from external logs but whose instruction text is still needed.
pub const TEMPLATE_NAMES: [&str; 8] = [
    "doudizhu",
    "gin_rummy",
    "guandan",
    "leduc",
    "limit_holdem",
    "mahjong",
    "nolimit_holdem",
    "uno",
];

const TEMPLATE_SOURCES: [(&str, &str); 8] = [
    ("doudizhu", include_str!("templates/doudizhu.txt")),
    ("gin_rummy", include_str!("templates/gin_rummy.txt")),
    ("guandan", include_str!("templates/guandan.txt")),
    ("leduc", include_str!("templates/leduc.txt")),
    ("limit_holdem", include_str!("templates/limit_holdem.txt")),
    ("mahjong", include_str!("templates/mahjong.txt")),
    ("nolimit_holdem", include_str!("templates/nolimit_holdem.txt")),
    ("uno", include_str!("templates/uno.txt")),
];

/// The line that introduces the numbered slot list in every template.
const SLOT_LIST_MARKER: &str = "I will provide you with the following information:";
/// The line that ends the slot list and starts the output instructions.
const EPILOGUE_MARKER: &str = "Please tell me";

#[derive(Debug, Clone)]
struct Slot {
    /// Index into the template's line list.
    line: usize,
    /// Trimmed header without the trailing colon, e.g. "1. Your role".
    label: String,
}

/// A fixed instruction template: static text plus ordered field slots.
#[derive(Debug, Clone)]
pub struct PromptTemplate {
    name: &'static str,
    text: &'static str,
    lines: Vec<&'static str>,
    slots: Vec<Slot>,
}

impl PromptTemplate {
    fn parse(name: &'static str, text: &'static str) -> PromptTemplate {
        let lines: Vec<&'static str> = text.split('\n').collect();
        let mut slots = Vec::new();
        let mut in_list = false;
        for (index, line) in lines.iter().enumerate() {
            if !in_list {
                in_list = line.contains(SLOT_LIST_MARKER);
                continue;
            }
            let trimmed = line.trim();
            if trimmed.starts_with(EPILOGUE_MARKER) {
                break;
            }
            if let Some(label) = trimmed.strip_suffix(':') {
                slots.push(Slot {
                    line: index,
                    label: label.to_string(),
                });
            }
        }
        PromptTemplate {
            name,
            text,
            lines,
            slots,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// The embedded template text, byte for byte.
    pub fn text(&self) -> &'static str {
        self.text
    }

    /// Slot labels in template order.
    pub fn slot_labels(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.label.as_str()).collect()
    }

    /// Everything up to and including the slot-list introduction; rendered
    /// instructions always start with these bytes.
    pub fn preamble(&self) -> &'static str {
        match self.text.find(SLOT_LIST_MARKER) {
            Some(pos) => {
                let end = self.text[pos..]
                    .find('\n')
                    .map(|n| pos + n + 1)
                    .unwrap_or(self.text.len());
                &self.text[..end]
            }
            None => self.text,
        }
    }

    /// Fill the slots in order. A non-empty value is appended after the
    /// slot's colon (separated by one space unless the line already ends
    /// with whitespace); empty values leave the line untouched, so filling
    /// with all-empty values reproduces the template verbatim.
    pub fn fill(&self, values: &[String]) -> Result<String, PromptError> {
        if values.len() < self.slots.len() {
            return Err(PromptError::MissingField {
                template: self.name.to_string(),
                slot: self.slots[values.len()].label.clone(),
            });
        }
        if values.len() > self.slots.len() {
            return Err(PromptError::ExtraFields {
                template: self.name.to_string(),
                extra: values.len() - self.slots.len(),
            });
        }
        let extra: usize = values.iter().map(|v| v.len() + 1).sum();
        let mut out = String::with_capacity(self.text.len() + extra);
        let mut next_slot = 0;
        for (index, line) in self.lines.iter().enumerate() {
            if index > 0 {
                out.push('\n');
            }
            out.push_str(line);
            if next_slot < self.slots.len() && self.slots[next_slot].line == index {
                let value = &values[next_slot];
                if !value.is_empty() {
                    if !line.ends_with(char::is_whitespace) {
                        out.push(' ');
                    }
                    out.push_str(value);
                }
                next_slot += 1;
            }
        }
        Ok(out)
    }
}

fn registry() -> &'static Vec<PromptTemplate> {
    static REGISTRY: OnceLock<Vec<PromptTemplate>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        TEMPLATE_SOURCES
            .iter()
            .map(|(name, text)| PromptTemplate::parse(name, text))
            .collect()
    })
}

/// Look up a template by name (any of [`TEMPLATE_NAMES`]).
pub fn template(name: &str) -> Result<&'static PromptTemplate, PromptError> {
    registry()
        .iter()
        .find(|t| t.name == name)
        .ok_or_else(|| PromptError::UnknownTemplate(name.to_string()))
}

/// The template for a playable game.
pub fn game_template(game: Game) -> &'static PromptTemplate {
    registry()
        .iter()
        .find(|t| t.name == game.as_str())
        .expect("every playable game ships a template")
}

fn json_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("slot values serialize")
}

fn join_cards(cards: &[String]) -> String {
    if cards.is_empty() {
        "none".to_string()
    } else {
        cards.join(", ")
    }
}

fn fmt_history(pairs: &[(u32, String)]) -> String {
    if pairs.is_empty() {
        return "none".to_string();
    }
    let entries: Vec<String> = pairs
        .iter()
        .map(|(seat, action)| format!("({seat}, {action})"))
        .collect();
    entries.join(", ")
}

fn fmt_dou_history(pairs: &[(u32, Vec<i64>)]) -> String {
    if pairs.is_empty() {
        return "none".to_string();
    }
    let entries: Vec<String> = pairs
        .iter()
        .map(|(seat, cards)| format!("({seat}, {})", json_text(cards)))
        .collect();
    entries.join(", ")
}

/// Parse one wire action into the JSON value used in replies and legal
/// lists: integer arrays for DouDizhu, `[Type, Rank, Cards]` triples for
/// Guandan, plain strings elsewhere.
pub fn wire_value(game: Game, wire: &str) -> Result<Value, PromptError> {
    match game {
        Game::Doudizhu | Game::Guandan => serde_json::from_str(wire)
            .map_err(|e| PromptError::ParseError(format!("wire {wire:?}: {e}"))),
        _ => Ok(Value::String(wire.to_string())),
    }
}

/// The legal-actions slot: a compact JSON array of wire values.
pub fn legal_slot_text(game: Game, legal_wires: &[String]) -> Result<String, PromptError> {
    let values: Vec<Value> = legal_wires
        .iter()
        .map(|w| wire_value(game, w))
        .collect::<Result<_, _>>()?;
    Ok(json_text(&values))
}

fn dou_values(view: &DouView, legal: String) -> Vec<String> {
    vec![
        view.turn.to_string(),
        view.role.clone(),
        json_text(&view.hand),
        json_text(&view.others_union),
        json_text(&view.last_move),
        json_text(&view.played),
        json_text(&view.cards_left),
        view.bombs_played.to_string(),
        fmt_dou_history(&view.history),
        legal,
    ]
}

fn gin_values(view: &GinView, legal: String) -> Vec<String> {
    vec![
        view.step.to_string(),
        view.id.to_string(),
        join_cards(&view.hand),
        view.top_discard.clone(),
        join_cards(&view.other_discards),
        join_cards(&view.opponent_known),
        view.stock_left.to_string(),
        fmt_history(&view.history),
        legal,
    ]
}

fn guan_values(view: &GuanView, legal: String) -> Vec<String> {
    vec![
        view.position.to_string(),
        json_text(&view.hand),
        json_text(&view.others_remaining),
        view.last_action.clone(),
        view.teammate_last.clone(),
        json_text(&view.cards_left),
        json_text(&view.played_down),
        json_text(&view.played_teammate),
        json_text(&view.played_up),
        view.self_rank.clone(),
        view.opponent_rank.clone(),
        view.current_rank.clone(),
        legal,
    ]
}

fn uno_values(view: &UnoView, legal: String) -> Vec<String> {
    vec![
        view.step.to_string(),
        view.position.to_string(),
        join_cards(&view.hand),
        view.top_card.clone(),
        join_cards(&view.played_cards),
        json_text(&view.cards_left),
        fmt_history(&view.history),
        legal,
    ]
}

fn leduc_values(view: &LeducView, legal: String) -> Vec<String> {
    vec![
        view.round.to_string(),
        view.position.to_string(),
        view.hand.clone(),
        view.public_card.clone(),
        view.my_chips.to_string(),
        view.pot.to_string(),
        view.num_raises.to_string(),
        fmt_history(&view.history),
        legal,
    ]
}

fn limit_values(view: &LimitView, legal: String) -> Vec<String> {
    vec![
        view.round.clone(),
        view.position.to_string(),
        join_cards(&view.hole_cards),
        join_cards(&view.community_cards),
        view.my_chips.to_string(),
        view.pot.to_string(),
        view.num_raises.to_string(),
        fmt_history(&view.history),
        legal,
    ]
}

fn nolimit_values(view: &NoLimitView, legal: String) -> Vec<String> {
    vec![
        view.round.clone(),
        view.position.to_string(),
        join_cards(&view.hole_cards),
        join_cards(&view.community_cards),
        view.my_chips.to_string(),
        json_text(&view.all_chips),
        view.pot.to_string(),
        json_text(&view.stakes),
        fmt_history(&view.history),
        legal,
    ]
}

/// Render the full instruction text for one observation. `legal_wires` is
/// the acting seat's legal-action list in wire notation; it fills the
/// template's legal-actions slot.
pub fn render(obs: &Observation, legal_wires: &[String]) -> Result<String, PromptError> {
    let legal = legal_slot_text(obs.game, legal_wires)?;
    let values = match &obs.view {
        View::Dou(view) => dou_values(view, legal),
        View::Guan(view) => guan_values(view, legal),
        View::Uno(view) => uno_values(view, legal),
        View::Gin(view) => gin_values(view, legal),
        View::Leduc(view) => leduc_values(view, legal),
        View::Limit(view) => limit_values(view, legal),
        View::NoLimit(view) => nolimit_values(view, legal),
    };
    game_template(obs.game).fill(&values)
}

/// The reply value for an action, ready to wrap as `{"action": ...}`.
pub fn action_value(action: &Action) -> Value {
    match action {
        Action::Dou(DouAction::Pass) => json!([]),
        Action::Dou(DouAction::Play(cards)) => {
            let ints: Vec<i64> = cards.iter().map(|c| *c as i64).collect();
            json!(ints)
        }
        Action::Guan(action) => guan_action_value(action),
        Action::Uno(action) => Value::String(action.as_wire()),
        Action::Gin(action) => Value::String(action.as_wire()),
        Action::Bet(action) => Value::String(action.as_str().to_string()),
        Action::NoLimit(action) => Value::String(action.as_str().to_string()),
    }
}

/// Serialize an action as the reply object `{"action": ...}`.
pub fn encode_action(action: &Action) -> String {
    json_text(&json!({ "action": action_value(action) }))
}

fn wire_from_value(game: Game, inner: &Value) -> Result<String, PromptError> {
    match game {
        Game::Doudizhu => {
            let items = inner.as_array().ok_or_else(|| {
                PromptError::SchemaMismatch("DouDizhu action must be an integer array".to_string())
            })?;
            if !items.iter().all(Value::is_i64) {
                return Err(PromptError::SchemaMismatch(
                    "DouDizhu action array must hold integers".to_string(),
                ));
            }
            Ok(json_text(inner))
        }
        Game::Guandan => {
            let items = inner.as_array().ok_or_else(|| {
                PromptError::SchemaMismatch(
                    "Guandan action must be a [type, rank, cards] triple".to_string(),
                )
            })?;
            let triple_shaped = items.len() == 3
                && items[0].is_string()
                && items[1].is_string()
                && (items[2].is_string()
                    || items[2]
                        .as_array()
                        .is_some_and(|cards| cards.iter().all(Value::is_string)));
            if !triple_shaped {
                return Err(PromptError::SchemaMismatch(
                    "Guandan action must be a [type, rank, cards] triple".to_string(),
                ));
            }
            Ok(json_text(inner))
        }
        _ => inner
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| PromptError::SchemaMismatch("action must be a string".to_string())),
    }
}

/// Parse a `{"action": ...}` reply into an engine action for the running
/// state. Extra keys in the reply object are ignored.
pub fn decode_action(state: &GameState, text: &str) -> Result<Action, PromptError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| PromptError::ParseError(e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| PromptError::SchemaMismatch("reply must be a JSON object".to_string()))?;
    let inner = object.get("action").ok_or_else(|| {
        PromptError::SchemaMismatch("reply object is missing the \"action\" key".to_string())
    })?;
    let wire = wire_from_value(state.game(), inner)?;
    state
        .decode_action(&wire)
        .ok_or(PromptError::UnknownAction(wire))
}

/// Instruction/output pair exported for supervised fine-tuning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SftRecord {
    pub instruction: String,
    pub output: String,
    pub meta: SftMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftMeta {
    pub game: String,
    pub match_id: u64,
    pub step: u32,
    pub seat: u32,
}

/// Convert one retained step into an SFT record.
pub fn sft_record_for_step(step: &TrajectoryStep) -> Result<SftRecord, PromptError> {
    let obs = step
        .observation()
        .map_err(PromptError::UnknownTemplate)?;
    let instruction = render(&obs, &step.legal)?;
    let output = json_text(&json!({ "action": wire_value(obs.game, &step.action)? }));
    Ok(SftRecord {
        instruction,
        output,
        meta: SftMeta {
            game: step.game.clone(),
            match_id: step.match_id,
            step: step.step,
            seat: step.seat,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SftSummary {
    pub steps_in: u64,
    pub records_out: u64,
}

fn record_io_error(err: RecordError) -> PromptError {
    match err {
        RecordError::Malformed { line, reason } => PromptError::MalformedRecord { line, reason },
        RecordError::Io(e) => PromptError::Io(e.to_string()),
    }
}

/// Read a sample file (filtered trajectory steps) and write one SFT record
/// per step as line-delimited JSON, preceded by a manifest line.
pub fn emit_sft(input: &Path, output: &Path) -> Result<SftSummary, PromptError> {
    let reader = RecordReader::open(input).map_err(|e| PromptError::Io(e.to_string()))?;
    let file =
        std::fs::File::create(output).map_err(|e| PromptError::Io(e.to_string()))?;
    let mut writer = BufWriter::new(file);
    let mut source_manifest = Value::Null;
    let mut summary = SftSummary {
        steps_in: 0,
        records_out: 0,
    };
    let mut pending = Vec::new();
    for item in reader {
        let (line, record) = item.map_err(record_io_error)?;
        match record {
            TrajectoryRecord::Manifest(m) if line == 1 => {
                source_manifest = serde_json::to_value(&m).expect("manifest serializes");
            }
            TrajectoryRecord::Manifest(_) | TrajectoryRecord::Match(_) => {}
            TrajectoryRecord::Step(step) => {
                summary.steps_in += 1;
                let record =
                    sft_record_for_step(&step).map_err(|e| match e {
                        PromptError::UnknownTemplate(name) => PromptError::MalformedRecord {
                            line,
                            reason: format!("unusable game name: {name}"),
                        },
                        PromptError::ParseError(reason) => {
                            PromptError::MalformedRecord { line, reason }
                        }
                        other => other,
                    })?;
                pending.push(record);
            }
        }
    }
    let manifest = Manifest::new(
        "sft",
        json!({
            "source": input.display().to_string(),
            "source_manifest": source_manifest,
        }),
    );
    writeln!(
        writer,
        "{}",
        TrajectoryRecord::Manifest(manifest).to_line()
    )
    .map_err(|e| PromptError::Io(e.to_string()))?;
    for record in pending {
        writeln!(writer, "{}", json_text(&record)).map_err(|e| PromptError::Io(e.to_string()))?;
        summary.records_out += 1;
    }
    writer.flush().map_err(|e| PromptError::Io(e.to_string()))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::ALL_GAMES;

    #[test]
    fn all_eight_templates_parse_with_their_slot_counts() {
        let counts = [
            ("doudizhu", 10),
            ("gin_rummy", 9),
            ("guandan", 13),
            ("leduc", 9),
            ("limit_holdem", 9),
            ("mahjong", 36),
            ("nolimit_holdem", 10),
            ("uno", 8),
        ];
        for (name, expected) in counts {
            let template = template(name).unwrap();
            assert_eq!(
                template.slots.len(),
                expected,
                "{name}: {:?}",
                template.slot_labels()
            );
        }
        assert!(template("chess").is_err());
        let dou = template("doudizhu").unwrap();
        assert_eq!(dou.slot_labels()[0], "Turn number");
        assert_eq!(
            dou.slot_labels()[9],
            "9. The legal actions for the current move"
        );
    }

    #[test]
    fn blank_fill_reproduces_every_template_byte_for_byte() {
        for name in TEMPLATE_NAMES {
            let template = template(name).unwrap();
            let blanks = vec![String::new(); template.slots.len()];
            assert_eq!(template.fill(&blanks).unwrap(), template.text(), "{name}");
        }
    }

    #[test]
    fn too_few_values_name_the_first_unfilled_slot() {
        let template = template("doudizhu").unwrap();
        let err = template.fill(&vec![String::new(); 3]).unwrap_err();
        assert_eq!(
            err,
            PromptError::MissingField {
                template: "doudizhu".to_string(),
                slot: "3. The union of the hand cards of the other two players".to_string(),
            }
        );
        let err = template.fill(&vec![String::new(); 12]).unwrap_err();
        assert_eq!(
            err,
            PromptError::ExtraFields {
                template: "doudizhu".to_string(),
                extra: 2,
            }
        );
    }

    #[test]
    fn every_playable_game_has_a_template_and_a_preamble() {
        for game in ALL_GAMES {
            let template = game_template(game);
            assert_eq!(template.name(), game.as_str());
            let preamble = template.preamble();
            assert!(template.text().starts_with(preamble));
            assert!(preamble.ends_with(&format!("{SLOT_LIST_MARKER}\n")));
            assert!(preamble.starts_with("You are now a player"));
        }
    }

    #[test]
    fn values_append_after_the_colon_with_a_single_space() {
        let template = template("leduc").unwrap();
        let mut values = vec![String::new(); template.slots.len()];
        values[0] = "2".to_string();
        values[6] = "1".to_string();
        let filled = template.fill(&values).unwrap();
        assert!(filled.contains("Round number: 2\n"));
        // This slot line already ends with a space in the template text.
        assert!(filled.contains("Number of raises so far in two rounds: 1\n"));
        assert!(!filled.contains("rounds:  1"));
    }

    #[test]
    fn encode_matches_the_documented_examples() {
        let trio = Action::Dou(DouAction::Play(vec![3, 3, 3]));
        assert_eq!(encode_action(&trio), r#"{"action":[3,3,3]}"#);
        let pass = Action::Dou(DouAction::Pass);
        assert_eq!(encode_action(&pass), r#"{"action":[]}"#);
        let call = Action::Bet(crate::poker::leduc::LeducAction::Call);
        assert_eq!(encode_action(&call), r#"{"action":"call"}"#);
    }

    #[test]
    fn decode_rejects_each_malformed_shape_distinctly() {
        let leduc = GameState::reset(Game::Leduc, 1, 0);
        let dou = GameState::reset(Game::Doudizhu, 1, 0);

        assert!(matches!(
            decode_action(&leduc, "not json"),
            Err(PromptError::ParseError(_))
        ));
        assert!(matches!(
            decode_action(&leduc, "[1, 2]"),
            Err(PromptError::SchemaMismatch(_))
        ));
        assert!(matches!(
            decode_action(&leduc, r#"{"move":"call"}"#),
            Err(PromptError::SchemaMismatch(_))
        ));
        assert!(matches!(
            decode_action(&leduc, r#"{"action":7}"#),
            Err(PromptError::SchemaMismatch(_))
        ));
        assert!(matches!(
            decode_action(&leduc, r#"{"action":"flap"}"#),
            Err(PromptError::UnknownAction(_))
        ));
        assert!(matches!(
            decode_action(&dou, r#"{"action":"call"}"#),
            Err(PromptError::SchemaMismatch(_))
        ));
        assert!(matches!(
            decode_action(&dou, r#"{"action":[3,"x"]}"#),
            Err(PromptError::SchemaMismatch(_))
        ));
        // Extra keys are tolerated; only "action" matters.
        let action = decode_action(&leduc, r#"{"action":"call","note":"hi"}"#).unwrap();
        assert_eq!(action.wire(), "call");
    }

    #[test]
    fn legal_slot_serialization_contains_each_encoded_value() {
        for game in ALL_GAMES {
            let state = GameState::reset(game, 11, 2);
            let legal = state.legal_actions();
            let wires: Vec<String> = legal.iter().map(|a| a.wire()).collect();
            let slot = legal_slot_text(game, &wires).unwrap();
            for action in &legal {
                let value = json_text(&action_value(action));
                assert!(
                    slot.contains(&value),
                    "{game:?}: {value} not inside {slot}"
                );
            }
        }
    }
}

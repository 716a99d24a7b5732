//! Seeded trajectory generation, winner filtering, dataset mixing, and
//! per-matchup statistics over the line-delimited record files.
//!
//! Generation runs matches in parallel but serializes output in match-index
//! order, so the bytes of a run depend only on the spec. Filtering keeps
//! exactly the steps recorded by a winning seat with more than one legal
//! action. Mixing treats pool files as opaque record lines (skipping their
//! manifests), samples the requested counts without replacement, and
//! shuffles the combined set under one seed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::agents::dqn::DqnPolicy;
use crate::agents::{Policy, RandomPolicy, RulePolicy};
use crate::cards::Game;
use crate::engine::{match_rng, EngineError, GameState};
use crate::records::{
    Manifest, MatchHeader, RecordError, RecordReader, TrajectoryRecord, TrajectoryStep,
};

/// Mixed into the action-selection stream so policy randomness never
/// correlates with the deal shuffles.
const ACTION_SEED_SALT: u64 = 0x5EED_AC70;
const MIX_SEED_SALT: u64 = 0x5EED_A11B;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("policy {name:?} is unavailable: {reason}")]
    PolicyUnavailable { name: String, reason: String },
    #[error("invalid matchup spec: {0}")]
    SpecInvalid(String),
    #[error("match {match_id}: {source}")]
    Engine {
        match_id: u64,
        source: EngineError,
    },
    #[error("line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("pool {game:?} holds {available} records but {requested} were requested")]
    InsufficientPool {
        game: String,
        requested: u64,
        available: u64,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<RecordError> for PipelineError {
    fn from(err: RecordError) -> PipelineError {
        match err {
            RecordError::Malformed { line, reason } => {
                PipelineError::MalformedRecord { line, reason }
            }
            RecordError::Io(e) => PipelineError::Io(e),
        }
    }
}

/// Which policy sits in each seat for a generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchupSpec {
    pub game: Game,
    /// One policy name per seat: "random", "rule", or "dqn:<model path>".
    pub seats: Vec<String>,
    pub num_games: u64,
    pub base_seed: u64,
}

impl MatchupSpec {
    fn manifest_spec(&self) -> serde_json::Value {
        json!({
            "game": self.game.as_str(),
            "seats": self.seats,
            "num_games": self.num_games,
            "base_seed": self.base_seed,
        })
    }
}

/// Instantiate a policy by name, validating DQN models against the game.
pub fn resolve_policy(name: &str, game: Game) -> Result<Box<dyn Policy>, PipelineError> {
    match name {
        "random" => Ok(Box::new(RandomPolicy)),
        "rule" => Ok(Box::new(RulePolicy)),
        other => match other.strip_prefix("dqn:") {
            Some(path) => {
                let policy = DqnPolicy::load(Path::new(path)).map_err(|e| {
                    PipelineError::PolicyUnavailable {
                        name: other.to_string(),
                        reason: e.to_string(),
                    }
                })?;
                if policy.game != game {
                    return Err(PipelineError::PolicyUnavailable {
                        name: other.to_string(),
                        reason: format!(
                            "model was trained for {}, matchup is {}",
                            policy.game.as_str(),
                            game.as_str()
                        ),
                    });
                }
                Ok(Box::new(policy))
            }
            None => Err(PipelineError::PolicyUnavailable {
                name: other.to_string(),
                reason: "known policies: random, rule, dqn:<model path>".to_string(),
            }),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateSummary {
    pub games: u64,
    pub steps: u64,
}

fn run_match(
    spec: &MatchupSpec,
    policies: &[Box<dyn Policy>],
    match_id: u64,
) -> Result<(String, u64), PipelineError> {
    let mut state = GameState::reset(spec.game, spec.base_seed, match_id);
    let mut rng = match_rng(spec.base_seed ^ ACTION_SEED_SALT, match_id);
    let mut steps: Vec<TrajectoryStep> = Vec::new();
    while !state.is_terminal() {
        let seat = state.seat_to_act();
        let legal = state.legal_actions();
        let obs = state.observe(seat);
        let action = policies[seat].choose(&obs, &legal, &mut rng);
        steps.push(TrajectoryStep {
            match_id,
            step: steps.len() as u32,
            seat: seat as u32,
            game: spec.game.as_str().to_string(),
            view: obs.view,
            legal: legal.iter().map(|a| a.wire()).collect(),
            action: action.wire(),
            is_winner: false,
        });
        state
            .apply(&action)
            .map_err(|source| PipelineError::Engine { match_id, source })?;
    }
    let payoffs = state
        .payoffs()
        .map_err(|source| PipelineError::Engine { match_id, source })?;
    let winners: Vec<u32> = (0..state.num_seats())
        .filter(|s| payoffs[*s] > 0.0)
        .map(|s| s as u32)
        .collect();
    for step in &mut steps {
        step.is_winner = winners.contains(&step.seat);
    }
    let header = MatchHeader {
        match_id,
        game: spec.game.as_str().to_string(),
        base_seed: spec.base_seed,
        steps: steps.len() as u32,
        payoffs,
        winners,
        first_finisher: state.first_finisher().map(|s| s as u32),
    };
    let step_count = steps.len() as u64;
    let mut text = TrajectoryRecord::Match(header).to_line();
    text.push('\n');
    for step in steps {
        text.push_str(&TrajectoryRecord::Step(Box::new(step)).to_line());
        text.push('\n');
    }
    Ok((text, step_count))
}

/// Play out the spec and write a trajectory file: a manifest line, then one
/// match header plus its step records per match, in match-index order.
pub fn generate(spec: &MatchupSpec, output: &Path) -> Result<GenerateSummary, PipelineError> {
    let seats = spec.game.num_seats();
    if spec.seats.len() != seats {
        return Err(PipelineError::SpecInvalid(format!(
            "{} needs {} seat policies, got {}",
            spec.game.as_str(),
            seats,
            spec.seats.len()
        )));
    }
    let policies: Vec<Box<dyn Policy>> = spec
        .seats
        .iter()
        .map(|name| resolve_policy(name, spec.game))
        .collect::<Result<_, _>>()?;

    let file = File::create(output)?;
    let mut writer = BufWriter::new(file);
    let manifest = Manifest::new("trajectories", spec.manifest_spec());
    writeln!(writer, "{}", TrajectoryRecord::Manifest(manifest).to_line())?;

    let mut total_steps = 0u64;
    const CHUNK: u64 = 128;
    let mut start = 0u64;
    while start < spec.num_games {
        let end = (start + CHUNK).min(spec.num_games);
        let blocks: Vec<Result<(String, u64), PipelineError>> = (start..end)
            .into_par_iter()
            .map(|match_id| run_match(spec, &policies, match_id))
            .collect();
        for block in blocks {
            let (text, steps) = block?;
            writer.write_all(text.as_bytes())?;
            total_steps += steps;
        }
        start = end;
    }
    writer.flush()?;
    Ok(GenerateSummary {
        games: spec.num_games,
        steps: total_steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterConfig {
    /// Keep every winning seat's steps (DouDizhu always keeps both
    /// farmers). When false, Guandan keeps only the first finisher.
    pub keep_winning_teammates: bool,
}

impl Default for FilterConfig {
    fn default() -> FilterConfig {
        FilterConfig {
            keep_winning_teammates: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterSummary {
    pub steps_in: u64,
    pub steps_kept: u64,
}

/// Keep exactly the steps taken by a winning seat with more than one legal
/// action; write them as a sample file. Filtering a sample file again
/// reproduces it byte for byte.
pub fn filter(
    input: &Path,
    output: &Path,
    config: FilterConfig,
) -> Result<FilterSummary, PipelineError> {
    let reader = RecordReader::open(input)?;
    let file = File::create(output)?;
    let mut writer = BufWriter::new(file);
    let mut summary = FilterSummary {
        steps_in: 0,
        steps_kept: 0,
    };
    let mut wrote_manifest = false;
    let mut current_header: Option<MatchHeader> = None;
    for item in reader {
        let (line, record) = item?;
        match record {
            TrajectoryRecord::Manifest(m) => {
                if wrote_manifest {
                    continue;
                }
                let manifest = if m.kind == "samples" {
                    // Pass an already-filtered manifest through untouched so
                    // the filter is idempotent at the byte level.
                    m
                } else {
                    Manifest::new(
                        "samples",
                        json!({
                            "source": input.display().to_string(),
                            "keep": "winning seats with more than one legal action",
                            "keep_winning_teammates": config.keep_winning_teammates,
                            "source_manifest": m,
                        }),
                    )
                };
                writeln!(writer, "{}", TrajectoryRecord::Manifest(manifest).to_line())?;
                wrote_manifest = true;
            }
            TrajectoryRecord::Match(header) => {
                current_header = Some(header);
            }
            TrajectoryRecord::Step(step) => {
                if !wrote_manifest {
                    return Err(PipelineError::MalformedRecord {
                        line,
                        reason: "file does not start with a manifest line".to_string(),
                    });
                }
                summary.steps_in += 1;
                let mut keep = step.is_winner && step.legal.len() > 1;
                if keep && !config.keep_winning_teammates && step.game == "guandan" {
                    if let Some(first) = current_header
                        .as_ref()
                        .filter(|h| h.match_id == step.match_id)
                        .and_then(|h| h.first_finisher)
                    {
                        keep = step.seat == first;
                    }
                }
                if keep {
                    writeln!(writer, "{}", TrajectoryRecord::Step(step).to_line())?;
                    summary.steps_kept += 1;
                }
            }
        }
    }
    writer.flush()?;
    Ok(summary)
}

/// Table-style statistics over a trajectory or sample file.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchStats {
    pub games: u64,
    pub avg_steps_per_game: f64,
    pub avg_steps_per_player: f64,
    /// Steps a winner filter would keep (winning seat, more than one
    /// legal action).
    pub retained_steps: u64,
    pub avg_legal_actions: f64,
}

pub fn stats(input: &Path) -> Result<MatchStats, PipelineError> {
    let reader = RecordReader::open(input)?;
    let mut header_games = 0u64;
    let mut step_match_ids: BTreeSet<u64> = BTreeSet::new();
    let mut steps = 0u64;
    let mut legal_total = 0u64;
    let mut retained = 0u64;
    let mut players: Option<usize> = None;
    for item in reader {
        let (_, record) = item?;
        match record {
            TrajectoryRecord::Manifest(_) => {}
            TrajectoryRecord::Match(header) => {
                header_games += 1;
                players = players.or_else(|| Game::from_str(&header.game).ok().map(|g| g.num_seats()));
            }
            TrajectoryRecord::Step(step) => {
                steps += 1;
                legal_total += step.legal.len() as u64;
                if step.is_winner && step.legal.len() > 1 {
                    retained += 1;
                }
                step_match_ids.insert(step.match_id);
                players =
                    players.or_else(|| Game::from_str(&step.game).ok().map(|g| g.num_seats()));
            }
        }
    }
    let games = if header_games > 0 {
        header_games
    } else {
        step_match_ids.len() as u64
    };
    let avg_steps = if games > 0 {
        steps as f64 / games as f64
    } else {
        0.0
    };
    let avg_legal = if steps > 0 {
        legal_total as f64 / steps as f64
    } else {
        0.0
    };
    Ok(MatchStats {
        games,
        avg_steps_per_game: avg_steps,
        avg_steps_per_player: avg_steps / players.unwrap_or(1) as f64,
        retained_steps: retained,
        avg_legal_actions: avg_legal,
    })
}

/// One pool to draw from when mixing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixRequest {
    /// Label used in the manifest and histogram (normally the game name).
    pub game: String,
    pub path: PathBuf,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixSummary {
    pub total: u64,
    pub histogram: BTreeMap<String, u64>,
}

fn read_pool_lines(path: &Path) -> Result<Vec<String>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if index == 0 {
            if let Ok(TrajectoryRecord::Manifest(_)) = TrajectoryRecord::from_line(line, 1) {
                continue;
            }
        }
        lines.push(line.to_string());
    }
    Ok(lines)
}

/// Draw the requested number of records from each pool without
/// replacement, shuffle the union, and write a mixed file. Pool lines are
/// opaque: records pass through byte-for-byte.
pub fn mix(requests: &[MixRequest], seed: u64, output: &Path) -> Result<MixSummary, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ MIX_SEED_SALT);
    let mut picked: Vec<(usize, String)> = Vec::new();
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    for (slot, request) in requests.iter().enumerate() {
        let lines = read_pool_lines(&request.path)?;
        if (lines.len() as u64) < request.count {
            return Err(PipelineError::InsufficientPool {
                game: request.game.clone(),
                requested: request.count,
                available: lines.len() as u64,
            });
        }
        let mut indices: Vec<usize> = (0..lines.len()).collect();
        let (chosen, _) = indices.partial_shuffle(&mut rng, request.count as usize);
        for index in chosen.iter() {
            picked.push((slot, lines[*index].clone()));
        }
        *histogram.entry(request.game.clone()).or_insert(0) += request.count;
    }
    picked.shuffle(&mut rng);

    let manifest = Manifest::new(
        "mixed",
        json!({
            "seed": seed,
            "requests": requests
                .iter()
                .map(|r| json!({
                    "game": r.game,
                    "path": r.path.display().to_string(),
                    "count": r.count,
                }))
                .collect::<Vec<_>>(),
        }),
    );
    let file = File::create(output)?;
    let mut writer = BufWriter::new(file);
    writeln!(writer, "{}", TrajectoryRecord::Manifest(manifest).to_line())?;
    for (_, line) in &picked {
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;
    Ok(MixSummary {
        total: picked.len() as u64,
        histogram,
    })
}

/// Parse a mixing spec: one `game = count` per line, `#` comments and
/// blank lines ignored.
pub fn parse_mix_spec(text: &str) -> Result<Vec<(String, u64)>, PipelineError> {
    let mut out = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (game, count) = line.split_once('=').ok_or(PipelineError::MalformedRecord {
            line: index + 1,
            reason: "expected \"game = count\"".to_string(),
        })?;
        let count: u64 =
            count
                .trim()
                .parse()
                .map_err(|e| PipelineError::MalformedRecord {
                    line: index + 1,
                    reason: format!("bad count: {e}"),
                })?;
        out.push((game.trim().to_string(), count));
    }
    Ok(out)
}

//! Evaluation: schedules matches between a subject policy and an opponent,
//! where either side may live in this process, behind a child process
//! speaking line-delimited JSON over stdio, or behind an HTTP endpoint.
//!
//! The wire protocol is one JSON object per decision,
//! `{"game", "seat", "match_id", "step", "prompt", "observation",
//! "legal_actions"}`, answered by `{"action": ...}`. Undecodable or illegal
//! replies are retried up to the endpoint's limit and then replaced by a
//! uniformly random legal action, which is counted in the report. Transport
//! failures (broken pipe, HTTP error, timeout) abort the evaluation.
//!
//! Matches run in parallel on the rayon pool; stdio endpoints serialize
//! their exchanges behind a mutex so request/reply pairs never interleave.
//! Metric aggregation sums per-match outcomes keyed by match index, so the
//! schedule never affects the report.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::agents::Policy;
use crate::cards::Game;
use crate::engine::{match_rng, Action, EngineError, GameState, Observation};
use crate::prompts;

/// Mixed into the fallback-action stream so it never correlates with the
/// deal shuffles.
const EVAL_SEED_SALT: u64 = 0x5EED_E7A1;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_RETRY_LIMIT: u32 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("endpoint {endpoint}: no reply within {timeout:?}")]
    Timeout { endpoint: String, timeout: Duration },
    #[error("endpoint {endpoint}: transport failure: {reason}")]
    Transport { endpoint: String, reason: String },
    #[error("cannot start endpoint {endpoint}: {reason}")]
    Spawn { endpoint: String, reason: String },
    #[error("no results to aggregate")]
    EmptyResults,
    #[error("invalid evaluation spec: {0}")]
    SpecInvalid(String),
    #[error("match {match_id}: {source}")]
    Engine { match_id: u64, source: EngineError },
    #[error("aborted after {completed} of {requested} games: {source}")]
    Aborted {
        completed: u64,
        requested: u64,
        source: Box<HarnessError>,
    },
}

struct StdioChild {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<std::io::Result<String>>,
}

impl Drop for StdioChild {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

enum Transport {
    InProcess(Box<dyn Policy>),
    Stdio(Mutex<StdioChild>),
    Http {
        client: reqwest::blocking::Client,
        url: String,
    },
}

/// A seat filler: an in-process policy or a remote decision service.
pub struct PolicyEndpoint {
    label: String,
    transport: Transport,
    pub timeout: Duration,
    pub retry_limit: u32,
}

impl PolicyEndpoint {
    pub fn in_process(policy: Box<dyn Policy>) -> PolicyEndpoint {
        let label = policy.name().to_string();
        PolicyEndpoint {
            label,
            transport: Transport::InProcess(policy),
            timeout: DEFAULT_TIMEOUT,
            retry_limit: DEFAULT_RETRY_LIMIT,
        }
    }

    /// Spawn `command` (split on whitespace; no shell quoting) and talk to
    /// it over stdin/stdout, one JSON request and one JSON reply per line.
    pub fn stdio(
        command: &str,
        timeout: Duration,
        retry_limit: u32,
    ) -> Result<PolicyEndpoint, HarnessError> {
        let parts: Vec<&str> = command.split_whitespace().collect();
        let (program, args) = parts.split_first().ok_or_else(|| HarnessError::Spawn {
            endpoint: command.to_string(),
            reason: "empty command line".to_string(),
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| HarnessError::Spawn {
                endpoint: command.to_string(),
                reason: e.to_string(),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(PolicyEndpoint {
            label: command.to_string(),
            transport: Transport::Stdio(Mutex::new(StdioChild {
                child,
                stdin,
                replies: rx,
            })),
            timeout,
            retry_limit,
        })
    }

    /// POST each request object to `url` and read the reply object from the
    /// response body.
    pub fn http(
        url: &str,
        timeout: Duration,
        retry_limit: u32,
    ) -> Result<PolicyEndpoint, HarnessError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| HarnessError::Spawn {
                endpoint: url.to_string(),
                reason: e.to_string(),
            })?;
        Ok(PolicyEndpoint {
            label: url.to_string(),
            transport: Transport::Http {
                client,
                url: url.to_string(),
            },
            timeout,
            retry_limit,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_in_process(&self) -> bool {
        matches!(self.transport, Transport::InProcess(_))
    }

    fn exchange(&self, body: &str) -> Result<String, HarnessError> {
        match &self.transport {
            Transport::InProcess(_) => unreachable!("in-process policies are called directly"),
            Transport::Stdio(child) => {
                let mut child = child.lock().expect("endpoint lock");
                writeln!(child.stdin, "{body}").and_then(|()| child.stdin.flush()).map_err(
                    |e| HarnessError::Transport {
                        endpoint: self.label.clone(),
                        reason: format!("write failed: {e}"),
                    },
                )?;
                match child.replies.recv_timeout(self.timeout) {
                    Ok(Ok(line)) => Ok(line),
                    Ok(Err(e)) => Err(HarnessError::Transport {
                        endpoint: self.label.clone(),
                        reason: format!("read failed: {e}"),
                    }),
                    Err(RecvTimeoutError::Timeout) => Err(HarnessError::Timeout {
                        endpoint: self.label.clone(),
                        timeout: self.timeout,
                    }),
                    Err(RecvTimeoutError::Disconnected) => Err(HarnessError::Transport {
                        endpoint: self.label.clone(),
                        reason: "stdout closed".to_string(),
                    }),
                }
            }
            Transport::Http { client, url } => {
                let response = client
                    .post(url)
                    .header("content-type", "application/json")
                    .body(body.to_string())
                    .send()
                    .map_err(|e| {
                        if e.is_timeout() {
                            HarnessError::Timeout {
                                endpoint: self.label.clone(),
                                timeout: self.timeout,
                            }
                        } else {
                            HarnessError::Transport {
                                endpoint: self.label.clone(),
                                reason: e.to_string(),
                            }
                        }
                    })?;
                let status = response.status();
                if !status.is_success() {
                    return Err(HarnessError::Transport {
                        endpoint: self.label.clone(),
                        reason: format!("http status {status}"),
                    });
                }
                response.text().map_err(|e| HarnessError::Transport {
                    endpoint: self.label.clone(),
                    reason: e.to_string(),
                })
            }
        }
    }
}

/// The outcome of one remote (or local) decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ActOutcome {
    pub action: Action,
    /// The reply never decoded to a legal action and a random one was
    /// substituted.
    pub fallback: bool,
    /// How many extra round trips were needed.
    pub retries: u32,
}

fn request_body(
    state: &GameState,
    obs: &Observation,
    legal_wires: &[String],
    match_id: u64,
) -> Result<String, HarnessError> {
    let game = state.game();
    let prompt = prompts::render(obs, legal_wires).map_err(|e| HarnessError::SpecInvalid(
        format!("cannot render {} prompt: {e}", game.as_str()),
    ))?;
    let legal_values: Vec<serde_json::Value> = legal_wires
        .iter()
        .map(|w| prompts::wire_value(game, w).expect("legal wires are well formed"))
        .collect();
    Ok(json!({
        "game": game.as_str(),
        "seat": obs.seat,
        "match_id": match_id,
        "step": state.step_count(),
        "prompt": prompt,
        "observation": serde_json::to_value(&obs.view).expect("views serialize"),
        "legal_actions": legal_values,
    })
    .to_string())
}

/// Ask an endpoint for its move. Remote replies that fail to decode to a
/// member of `legal` are retried up to the endpoint's limit, then replaced
/// by a random legal action (`fallback: true`). Transport failures and
/// timeouts are hard errors.
pub fn act_remote(
    endpoint: &PolicyEndpoint,
    state: &GameState,
    obs: &Observation,
    legal: &[Action],
    match_id: u64,
    rng: &mut ChaCha8Rng,
) -> Result<ActOutcome, HarnessError> {
    if let Transport::InProcess(policy) = &endpoint.transport {
        return Ok(ActOutcome {
            action: policy.choose(obs, legal, rng),
            fallback: false,
            retries: 0,
        });
    }
    let legal_wires: Vec<String> = legal.iter().map(Action::wire).collect();
    let body = request_body(state, obs, &legal_wires, match_id)?;
    let mut retries = 0;
    loop {
        let reply = endpoint.exchange(&body)?;
        if let Ok(action) = prompts::decode_action(state, reply.trim()) {
            if legal.contains(&action) {
                return Ok(ActOutcome {
                    action,
                    fallback: false,
                    retries,
                });
            }
        }
        if retries >= endpoint.retry_limit {
            let action = legal[rng.gen_range(0..legal.len())].clone();
            return Ok(ActOutcome {
                action,
                fallback: true,
                retries,
            });
        }
        retries += 1;
    }
}

/// How the subject policy occupies seats across the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeatPlan {
    /// Subject sits in this seat every game. Fairness in two-player games
    /// comes from the engine, which alternates the dealer by match index.
    Fixed(usize),
    /// First half of the games as the landlord (seat 0), second half as a
    /// farmer (seat 1). DouDizhu only.
    DouRoles,
    /// Subject plays seats 0 and 2 (one team) in full matches. Guandan
    /// only.
    GuandanTeam,
}

/// Subject's role in one game, for role-split win rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    Landlord,
    Farmer,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalSpec {
    pub game: Game,
    pub n_games: u64,
    pub seed: u64,
    /// Defaults per game when `None`: DouDizhu splits landlord/farmer,
    /// Guandan fields a team, two-player games fix the subject at seat 0.
    pub plan: Option<SeatPlan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    WinRate,
    RoundWinRate,
    MeanReward,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::WinRate => "win_rate",
            MetricKind::RoundWinRate => "round_win_rate",
            MetricKind::MeanReward => "mean_reward",
        }
    }
}

/// Win rates per DouDizhu role, with the game counts that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoleRates {
    pub landlord: f64,
    pub landlord_games: u64,
    pub farmer: f64,
    pub farmer_games: u64,
}

/// Guandan deals won by the subject's team out of all deals played.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundTally {
    pub won: u64,
    pub played: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub game: Game,
    pub games: u64,
    /// The headline metric for this game: DouDizhu reports a role-averaged
    /// win rate, Guandan a per-deal round win rate, the rest mean reward.
    pub metric: MetricKind,
    pub value: f64,
    /// Fraction of games the subject won; draws count as losses.
    pub win_rate: f64,
    pub mean_reward: f64,
    /// Standard error of the mean reward (sample std / sqrt(games)).
    pub mean_reward_se: f64,
    pub per_role: Option<RoleRates>,
    pub rounds: Option<RoundTally>,
    /// Random-legal substitutions after exhausted retries, both seats.
    pub fallbacks: u64,
    /// Extra round trips spent on undecodable or illegal replies.
    pub retries: u64,
}

impl MetricReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "game": self.game.as_str(),
            "games": self.games,
            "metric": self.metric.as_str(),
            "value": self.value,
            "win_rate": self.win_rate,
            "mean_reward": self.mean_reward,
            "mean_reward_se": self.mean_reward_se,
            "per_role": self.per_role.map(|r| json!({
                "landlord": r.landlord,
                "landlord_games": r.landlord_games,
                "farmer": r.farmer,
                "farmer_games": r.farmer_games,
            })),
            "rounds": self.rounds.map(|r| json!({
                "won": r.won,
                "played": r.played,
            })),
            "fallbacks": self.fallbacks,
            "retries": self.retries,
        })
    }
}

struct MatchOutcome {
    role: Role,
    reward: f64,
    won: bool,
    deals_won: u64,
    deals_played: u64,
    fallbacks: u64,
    retries: u64,
}

fn subject_seats(plan: SeatPlan, match_id: u64, n_games: u64) -> (Vec<usize>, Role) {
    match plan {
        SeatPlan::Fixed(seat) => (vec![seat], Role::Neutral),
        SeatPlan::DouRoles => {
            let landlord_games = n_games - n_games / 2;
            if match_id < landlord_games {
                (vec![0], Role::Landlord)
            } else {
                (vec![1], Role::Farmer)
            }
        }
        SeatPlan::GuandanTeam => (vec![0, 2], Role::Neutral),
    }
}

fn play_match(
    spec: &EvalSpec,
    subject: &PolicyEndpoint,
    opponent: &PolicyEndpoint,
    plan: SeatPlan,
    match_id: u64,
) -> Result<MatchOutcome, HarnessError> {
    let (seats, role) = subject_seats(plan, match_id, spec.n_games);
    let mut state = GameState::reset_for_eval(spec.game, spec.seed, match_id);
    let mut rng = match_rng(spec.seed ^ EVAL_SEED_SALT, match_id);
    let mut fallbacks = 0u64;
    let mut retries = 0u64;
    while !state.is_terminal() {
        let seat = state.seat_to_act();
        let endpoint = if seats.contains(&seat) { subject } else { opponent };
        let legal = state.legal_actions();
        let obs = state.observe(seat);
        let outcome = act_remote(endpoint, &state, &obs, &legal, match_id, &mut rng)?;
        fallbacks += u64::from(outcome.fallback);
        retries += u64::from(outcome.retries);
        state
            .apply(&outcome.action)
            .map_err(|source| HarnessError::Engine { match_id, source })?;
    }
    let payoffs = state
        .payoffs()
        .map_err(|source| HarnessError::Engine { match_id, source })?;
    let reward = payoffs[seats[0]];
    let deal_teams = state.deal_winning_teams();
    Ok(MatchOutcome {
        role,
        reward,
        won: reward > 0.0,
        deals_won: deal_teams.iter().filter(|t| **t == 0).count() as u64,
        deals_played: deal_teams.len() as u64,
        fallbacks,
        retries,
    })
}

/// Role-aware win rate: the mean of the per-role rates over whichever
/// roles appear, which for DouDizhu's landlord/farmer split is the
/// arithmetic mean of the two role rates.
pub fn compute_win_rate(results: &[(Role, bool)]) -> Result<f64, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut rates = Vec::new();
    for role in [Role::Landlord, Role::Farmer, Role::Neutral] {
        let games = results.iter().filter(|(r, _)| *r == role).count();
        if games == 0 {
            continue;
        }
        let wins = results.iter().filter(|(r, won)| *r == role && *won).count();
        rates.push(wins as f64 / games as f64);
    }
    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
}

fn default_plan(game: Game) -> SeatPlan {
    match game {
        Game::Doudizhu => SeatPlan::DouRoles,
        Game::Guandan => SeatPlan::GuandanTeam,
        _ => SeatPlan::Fixed(0),
    }
}

/// Play `n_games` between the subject and the opponent (the opponent fills
/// every non-subject seat) and aggregate the game's headline metric.
pub fn evaluate(
    spec: &EvalSpec,
    subject: &PolicyEndpoint,
    opponent: &PolicyEndpoint,
) -> Result<MetricReport, HarnessError> {
    if spec.n_games == 0 {
        return Err(HarnessError::SpecInvalid("n_games must be positive".to_string()));
    }
    let plan = spec.plan.unwrap_or_else(|| default_plan(spec.game));
    let seats = spec.game.num_seats();
    match plan {
        SeatPlan::Fixed(seat) if seat >= seats => {
            return Err(HarnessError::SpecInvalid(format!(
                "seat {seat} out of range for {}",
                spec.game.as_str()
            )));
        }
        SeatPlan::DouRoles if spec.game != Game::Doudizhu => {
            return Err(HarnessError::SpecInvalid(
                "landlord/farmer roles apply only to doudizhu".to_string(),
            ));
        }
        SeatPlan::GuandanTeam if spec.game != Game::Guandan => {
            return Err(HarnessError::SpecInvalid(
                "team seating applies only to guandan".to_string(),
            ));
        }
        _ => {}
    }

    let results: Vec<Result<MatchOutcome, HarnessError>> = (0..spec.n_games)
        .into_par_iter()
        .map(|match_id| play_match(spec, subject, opponent, plan, match_id))
        .collect();
    let completed = results.iter().filter(|r| r.is_ok()).count() as u64;
    let mut outcomes = Vec::with_capacity(results.len());
    for result in results {
        match result {
            Ok(outcome) => outcomes.push(outcome),
            Err(source) => {
                return Err(HarnessError::Aborted {
                    completed,
                    requested: spec.n_games,
                    source: Box::new(source),
                });
            }
        }
    }

    let games = outcomes.len() as u64;
    let mean_reward = outcomes.iter().map(|o| o.reward).sum::<f64>() / games as f64;
    let variance = if games > 1 {
        outcomes
            .iter()
            .map(|o| (o.reward - mean_reward).powi(2))
            .sum::<f64>()
            / (games - 1) as f64
    } else {
        0.0
    };
    let mean_reward_se = (variance / games as f64).sqrt();
    let tagged: Vec<(Role, bool)> = outcomes.iter().map(|o| (o.role, o.won)).collect();
    let win_rate = compute_win_rate(&tagged)?;
    let per_role = if plan == SeatPlan::DouRoles {
        let rate_of = |role: Role| {
            let games = tagged.iter().filter(|(r, _)| *r == role).count();
            let wins = tagged.iter().filter(|(r, won)| *r == role && *won).count();
            (wins as f64 / games.max(1) as f64, games as u64)
        };
        let (landlord, landlord_games) = rate_of(Role::Landlord);
        let (farmer, farmer_games) = rate_of(Role::Farmer);
        Some(RoleRates {
            landlord,
            landlord_games,
            farmer,
            farmer_games,
        })
    } else {
        None
    };
    let rounds = if spec.game == Game::Guandan {
        Some(RoundTally {
            won: outcomes.iter().map(|o| o.deals_won).sum(),
            played: outcomes.iter().map(|o| o.deals_played).sum(),
        })
    } else {
        None
    };
    let (metric, value) = match spec.game {
        Game::Doudizhu => (MetricKind::WinRate, win_rate),
        Game::Guandan => {
            let tally = rounds.expect("guandan tallies rounds");
            (MetricKind::RoundWinRate, tally.won as f64 / tally.played.max(1) as f64)
        }
        _ => (MetricKind::MeanReward, mean_reward),
    };
    debug_assert!((0.0..=1.0).contains(&win_rate));
    Ok(MetricReport {
        game: spec.game,
        games,
        metric,
        value,
        win_rate,
        mean_reward,
        mean_reward_se,
        per_role,
        rounds,
        fallbacks: outcomes.iter().map(|o| o.fallbacks).sum(),
        retries: outcomes.iter().map(|o| o.retries).sum(),
    })
}

//! Line-delimited JSON record types shared by the trajectory, sample, SFT,
//! and mixed dataset files. Every file starts with a one-line manifest; the
//! remaining lines are match headers, step records, or exported samples.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::Game;
use crate::engine::{Observation, View};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

/// First line of every dataset file: what it is and how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// File flavor: "trajectories", "samples", "sft", or "mixed".
    pub kind: String,
    pub tool_version: String,
    /// Free-form provenance: the generating spec, seed, and input files.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub spec: serde_json::Value,
}

impl Manifest {
    pub fn new(kind: &str, spec: serde_json::Value) -> Manifest {
        Manifest {
            kind: kind.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            spec,
        }
    }
}

/// Per-match summary written before the match's step records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchHeader {
    pub match_id: u64,
    pub game: String,
    pub base_seed: u64,
    pub steps: u32,
    pub payoffs: Vec<f64>,
    /// Seats on the winning side (empty on a draw).
    pub winners: Vec<u32>,
    /// Guandan: the seat that went out first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_finisher: Option<u32>,
}

/// One decision point: what the seat saw, what it could do, what it did.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub match_id: u64,
    pub step: u32,
    pub seat: u32,
    pub game: String,
    pub view: View,
    /// Legal actions in wire notation, in engine order.
    pub legal: Vec<String>,
    /// The chosen action in wire notation.
    pub action: String,
    /// Whether this seat ended the match on the winning side.
    pub is_winner: bool,
}

impl TrajectoryStep {
    /// Rebuild the engine-side observation this step was recorded from.
    pub fn observation(&self) -> Result<Observation, String> {
        let game = Game::from_str(&self.game)?;
        Ok(Observation {
            game,
            seat: self.seat as usize,
            view: self.view.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TrajectoryRecord {
    Manifest(Manifest),
    Match(MatchHeader),
    Step(Box<TrajectoryStep>),
}

impl TrajectoryRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_line(line: &str, line_no: usize) -> Result<TrajectoryRecord, RecordError> {
        serde_json::from_str(line).map_err(|e| RecordError::Malformed {
            line: line_no,
            reason: e.to_string(),
        })
    }
}

impl fmt::Display for TrajectoryRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Iterate the records of a line-delimited file, tagging each with its
/// 1-based line number.
pub struct RecordReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
}

impl RecordReader<io::BufReader<std::fs::File>> {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(RecordReader::new(io::BufReader::new(file)))
    }
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        RecordReader {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<(usize, TrajectoryRecord), RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(RecordError::Io(e))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(
                TrajectoryRecord::from_line(&line, self.line_no).map(|r| (self.line_no, r)),
            );
        }
    }
}

/// Write a manifest plus records as line-delimited JSON.
pub fn write_lines<W: Write, I: IntoIterator<Item = TrajectoryRecord>>(
    writer: &mut W,
    manifest: &Manifest,
    records: I,
) -> io::Result<()> {
    writeln!(
        writer,
        "{}",
        TrajectoryRecord::Manifest(manifest.clone()).to_line()
    )?;
    for record in records {
        writeln!(writer, "{}", record.to_line())?;
    }
    Ok(())
}

//! Card-game engines, self-play data generation, prompt rendering, and an
//! evaluation harness for seven games: DouDizhu, GuanDan, Uno, Gin Rummy,
//! Leduc Hold'em, Limit Texas Hold'em, and No-limit Texas Hold'em.

pub mod agents;
pub mod cards;
pub mod dou;
pub mod engine;
pub mod gin;
pub mod guandan;
pub mod harness;
pub mod pipeline;
pub mod poker;
pub mod prompts;
pub mod records;
pub mod uno;

pub use cards::{Card, Game, Rank, Suit};

//! Poker family: the 5/7-card hand evaluator and the Leduc, Limit, and
//! No-limit Hold'em betting engines.

pub mod eval;
pub mod holdem;
pub mod leduc;

pub use eval::{evaluate_hand, HandCategory, HandRank, PokerEvalError};

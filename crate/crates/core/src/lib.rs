//! Maxmin reachability for half-blind stochastic games, where the maximizer
//! observes nothing and the minimizer sees everything.
//!
//! The decision procedure closes the extended belief monoid of a game
//! ([`belief::decide`]); the [`oracle`] module evaluates the game exactly on
//! concrete words for cross-checking.

pub mod belief;
pub mod cli;
pub mod expr;
pub mod game;
pub mod markov;
pub mod matrix;
pub mod oracle;
pub mod rational;

pub use belief::{decide, Answer, ClosureConfig, Verdict};
pub use game::{parse_game, Game, MinimizerTable, TimedStrategy, Word};
pub use matrix::BitMatrix;

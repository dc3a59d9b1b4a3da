//! Pure game, agent and statistics logic for the affective word lab.
//!
//! Everything here is `no_std` + `alloc`: word feedback and pools, candidate
//! tracking over the two canonical pools, the empathic agent rule engine and
//! the clustered least-squares machinery used by the analysis pipeline.
//! File IO, the experiment service and the CLI live in the `wordlab` crate.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod agent;
pub mod canonical;
pub mod entropy;
pub mod stats;
pub mod word;

pub use word::{feedback, validate_guess, FeedbackPattern, InvalidGuess, Lexicon, PoolKind, Trit, Word, WordPool};

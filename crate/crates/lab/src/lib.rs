//! Experiment service, export, analysis and bot simulation for the word lab.
//!
//! The game, agent and statistics logic lives in `wordlab_core`; this crate
//! adds files, the HTTP service, the CLI and everything that touches the OS.

pub mod analysis;
pub mod config;
pub mod export;
pub mod io;
pub mod service;
pub mod sim;

//! The virtual agent: a status-only control personality and a rule-based
//! empathic personality that maps game contexts to expressions and messages.

mod catalog;
mod engine;
mod reveal;

use core::fmt;
use core::str::FromStr;

use alloc::string::String;
use serde::{Deserialize, Serialize};

pub use catalog::{Catalog, CatalogError, MessageId, ReactionRule};
pub use engine::{control_status, detect_contexts, select_reaction, AgentState, Rotation};
pub use reveal::RevealTracker;

/// Number of guesses allowed per round.
pub const MAX_GUESSES: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expression {
    Idle,
    Success,
    Sadness,
    SlightlyHappy,
    Wave,
    WaveShort,
    /// Rendered with the success art; kept distinct in telemetry.
    Win,
}

impl Expression {
    pub const ALL: [Expression; 7] = [
        Expression::Idle,
        Expression::Success,
        Expression::Sadness,
        Expression::SlightlyHappy,
        Expression::Wave,
        Expression::WaveShort,
        Expression::Win,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Expression::Idle => "idle",
            Expression::Success => "success",
            Expression::Sadness => "sadness",
            Expression::SlightlyHappy => "slightly-happy",
            Expression::Wave => "wave",
            Expression::WaveShort => "wave-short",
            Expression::Win => "win",
        }
    }

    /// The art a renderer should show for this expression.
    pub fn display_art(self) -> Expression {
        match self {
            Expression::Win => Expression::Success,
            other => other,
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Expression {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::ALL
            .into_iter()
            .find(|e| e.token() == s)
            .ok_or_else(|| alloc::format!("unknown expression token {s:?}"))
    }
}

/// Game situations the empathic agent reacts to, in priority order: an
/// earlier variant trumps every later one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameContext {
    FewerThan6Remaining,
    FastGuess,
    SlowGuess,
    FirstGuess,
    FifthGuess,
    SixthGuess,
    FewerThan101Remaining,
    AdditionalLettersRevealed,
    NoAdditionalLettersRevealed,
    Invalid,
    Win,
    Loss,
    Idle90s,
}

impl GameContext {
    pub const ALL: [GameContext; 13] = [
        GameContext::FewerThan6Remaining,
        GameContext::FastGuess,
        GameContext::SlowGuess,
        GameContext::FirstGuess,
        GameContext::FifthGuess,
        GameContext::SixthGuess,
        GameContext::FewerThan101Remaining,
        GameContext::AdditionalLettersRevealed,
        GameContext::NoAdditionalLettersRevealed,
        GameContext::Invalid,
        GameContext::Win,
        GameContext::Loss,
        GameContext::Idle90s,
    ];

    /// 0 is the highest priority.
    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn token(self) -> &'static str {
        match self {
            GameContext::FewerThan6Remaining => "fewer-than-6-remaining",
            GameContext::FastGuess => "fast-guess",
            GameContext::SlowGuess => "slow-guess",
            GameContext::FirstGuess => "first-guess",
            GameContext::FifthGuess => "fifth-guess",
            GameContext::SixthGuess => "sixth-guess",
            GameContext::FewerThan101Remaining => "fewer-than-101-remaining",
            GameContext::AdditionalLettersRevealed => "additional-letters-revealed",
            GameContext::NoAdditionalLettersRevealed => "no-additional-letters-revealed",
            GameContext::Invalid => "invalid",
            GameContext::Win => "win",
            GameContext::Loss => "loss",
            GameContext::Idle90s => "idle-90s",
        }
    }

    /// How many messages the catalog must hold for this context.
    pub fn message_count(self) -> usize {
        match self {
            GameContext::FewerThan6Remaining
            | GameContext::FastGuess
            | GameContext::SlowGuess
            | GameContext::Invalid
            | GameContext::Loss => 1,
            GameContext::Win => 6,
            _ => 4,
        }
    }
}

impl fmt::Display for GameContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for GameContext {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GameContext::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| alloc::format!("unknown context token {s:?}"))
    }
}

/// A set of contexts, one bit per variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ContextSet(u16);

impl ContextSet {
    pub fn new() -> Self {
        ContextSet(0)
    }

    pub fn insert(&mut self, ctx: GameContext) {
        self.0 |= 1 << ctx.rank();
    }

    pub fn contains(&self, ctx: GameContext) -> bool {
        self.0 & (1 << ctx.rank()) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// The context that wins under the priority order.
    pub fn highest_priority(&self) -> Option<GameContext> {
        (self.0 != 0).then(|| GameContext::ALL[self.0.trailing_zeros() as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = GameContext> + '_ {
        GameContext::ALL.into_iter().filter(|c| self.contains(*c))
    }
}

impl FromIterator<GameContext> for ContextSet {
    fn from_iter<I: IntoIterator<Item = GameContext>>(iter: I) -> Self {
        let mut set = ContextSet::new();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Personality {
    Control,
    Empathic,
}

/// Millisecond timestamps supplied by the caller.
pub type Millis = u64;

/// Inputs routed to the agent by the session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentEvent {
    RoundStarted {
        round_index: u32,
        at: Millis,
    },
    GuessRejectedInvalid {
        /// Index of the guess still pending (invalid input does not use one).
        pending_guess: u8,
        at: Millis,
    },
    GuessEvaluated {
        /// 1-based index of the guess just evaluated.
        guess_index: u8,
        response_time_s: f64,
        /// Solutions still consistent after this guess.
        remaining_solutions: u32,
        revealed_new_letters: bool,
        at: Millis,
    },
    RoundEnded {
        won: bool,
        guesses_used: u8,
        at: Millis,
    },
    IdleTick {
        at: Millis,
    },
}

impl AgentEvent {
    pub fn at(&self) -> Millis {
        match *self {
            AgentEvent::RoundStarted { at, .. }
            | AgentEvent::GuessRejectedInvalid { at, .. }
            | AgentEvent::GuessEvaluated { at, .. }
            | AgentEvent::RoundEnded { at, .. }
            | AgentEvent::IdleTick { at } => at,
        }
    }
}

/// Context thresholds. Remaining-word thresholds are strict upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub fast_guess_s: f64,
    pub slow_guess_s: f64,
    pub idle_s: f64,
    pub close_remaining: u32,
    pub narrowed_remaining: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            fast_guess_s: 4.0,
            slow_guess_s: 60.0,
            idle_s: 90.0,
            close_remaining: 6,
            narrowed_remaining: 101,
        }
    }
}

/// What the agent shows: an expression and a speech-bubble message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentReaction {
    pub expression: Expression,
    pub message: String,
    /// `None` for control-personality status messages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<GameContext>,
}

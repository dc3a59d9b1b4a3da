use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::catalog::{Catalog, MessageId};
use super::{
    AgentEvent, AgentReaction, ContextSet, Expression, GameContext, Millis, Personality, Thresholds, MAX_GUESSES,
};

/// Per-context message order, fixed for a whole session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rotation {
    orders: Vec<Vec<MessageId>>,
}

impl Rotation {
    /// Catalog order for every context.
    pub fn identity(catalog: &Catalog) -> Self {
        Rotation {
            orders: GameContext::ALL.iter().map(|&c| catalog.ids_for(c).collect()).collect(),
        }
    }

    /// Independent random permutation per context. Win keeps catalog order
    /// since its message is chosen by guess count.
    pub fn shuffled<R: Rng + ?Sized>(catalog: &Catalog, rng: &mut R) -> Self {
        let mut rotation = Self::identity(catalog);
        for (ctx, order) in GameContext::ALL.iter().zip(rotation.orders.iter_mut()) {
            if *ctx != GameContext::Win {
                order.shuffle(rng);
            }
        }
        rotation
    }

    pub fn order(&self, ctx: GameContext) -> &[MessageId] {
        &self.orders[ctx.rank()]
    }

    /// True when every context order is a permutation of that context's ids.
    pub fn is_valid_for(&self, catalog: &Catalog) -> bool {
        self.orders.len() == GameContext::ALL.len()
            && GameContext::ALL.iter().all(|&ctx| {
                let mut mine = self.orders[ctx.rank()].clone();
                mine.sort_unstable();
                mine == catalog.ids_for(ctx).collect::<Vec<_>>()
            })
    }
}

/// Agent memory for one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub personality: Personality,
    round_index: u32,
    used_this_round: u64,
    rotation: Rotation,
    last_activity: Millis,
    guesses_used: u8,
}

impl AgentState {
    pub fn new(personality: Personality, rotation: Rotation, now: Millis) -> Self {
        AgentState {
            personality,
            round_index: 0,
            used_this_round: 0,
            rotation,
            last_activity: now,
            guesses_used: 0,
        }
    }

    pub fn round_index(&self) -> u32 {
        self.round_index
    }

    pub fn last_activity(&self) -> Millis {
        self.last_activity
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn is_used(&self, id: MessageId) -> bool {
        self.used_this_round & (1u64 << id) != 0
    }

    pub fn used_count(&self) -> usize {
        self.used_this_round.count_ones() as usize
    }

    /// Applies the bookkeeping side of an event (round resets, guess counts,
    /// activity clock). Idle ticks are not activity.
    pub fn observe(&mut self, event: &AgentEvent) {
        match *event {
            AgentEvent::RoundStarted { round_index, at } => {
                self.round_index = round_index;
                self.used_this_round = 0;
                self.guesses_used = 0;
                self.last_activity = at;
            }
            AgentEvent::GuessEvaluated { guess_index, at, .. } => {
                self.guesses_used = guess_index;
                self.last_activity = at;
            }
            AgentEvent::RoundEnded { guesses_used, at, .. } => {
                self.guesses_used = guesses_used;
                self.last_activity = at;
            }
            AgentEvent::GuessRejectedInvalid { at, .. } => self.last_activity = at,
            AgentEvent::IdleTick { .. } => {}
        }
    }

    /// Routes one event through the personality and returns what to show.
    pub fn react(&mut self, catalog: &Catalog, thresholds: &Thresholds, event: &AgentEvent) -> Option<AgentReaction> {
        match self.personality {
            Personality::Control => {
                self.observe(event);
                control_status(event).map(|message| AgentReaction {
                    expression: Expression::Idle,
                    message,
                    context: None,
                })
            }
            Personality::Empathic => {
                let contexts = detect_contexts(event, self, thresholds);
                self.observe(event);
                let reaction = select_reaction(&contexts, self, catalog);
                if reaction.is_some() {
                    // Re-arm the idle timer.
                    self.last_activity = self.last_activity.max(event.at());
                }
                reaction
            }
        }
    }
}

/// All contexts an event triggers. Terminal contexts come only from
/// `RoundEnded`; in-round contexts only from guess events.
pub fn detect_contexts(event: &AgentEvent, state: &AgentState, thresholds: &Thresholds) -> ContextSet {
    let mut set = ContextSet::new();
    match *event {
        AgentEvent::RoundStarted { .. } => set.insert(GameContext::FirstGuess),
        AgentEvent::GuessRejectedInvalid { .. } => set.insert(GameContext::Invalid),
        AgentEvent::RoundEnded { won, .. } => set.insert(if won { GameContext::Win } else { GameContext::Loss }),
        AgentEvent::IdleTick { at } => {
            let idle_ms = at.saturating_sub(state.last_activity) as f64;
            if idle_ms >= thresholds.idle_s * 1000.0 {
                set.insert(GameContext::Idle90s);
            }
        }
        AgentEvent::GuessEvaluated {
            guess_index,
            response_time_s,
            remaining_solutions,
            revealed_new_letters,
            ..
        } => {
            if remaining_solutions < thresholds.close_remaining {
                set.insert(GameContext::FewerThan6Remaining);
            }
            if response_time_s < thresholds.fast_guess_s {
                set.insert(GameContext::FastGuess);
            }
            if response_time_s > thresholds.slow_guess_s {
                set.insert(GameContext::SlowGuess);
            }
            match guess_index + 1 {
                5 => set.insert(GameContext::FifthGuess),
                6 => set.insert(GameContext::SixthGuess),
                _ => {}
            }
            if remaining_solutions < thresholds.narrowed_remaining {
                set.insert(GameContext::FewerThan101Remaining);
            }
            set.insert(if revealed_new_letters {
                GameContext::AdditionalLettersRevealed
            } else {
                GameContext::NoAdditionalLettersRevealed
            });
        }
    }
    set
}

/// Picks the reaction for the highest-priority context, or `None` when that
/// context has no message left this round. Marks the chosen message used.
pub fn select_reaction(contexts: &ContextSet, state: &mut AgentState, catalog: &Catalog) -> Option<AgentReaction> {
    let top = contexts.highest_priority()?;
    let id = if top == GameContext::Win {
        catalog.win_rule(state.guesses_used).map(|r| r.id).filter(|&id| !state.is_used(id))?
    } else {
        let order = state.rotation.order(top);
        if order.is_empty() {
            return None;
        }
        let start = state.round_index as usize % order.len();
        (0..order.len())
            .map(|k| order[(start + k) % order.len()])
            .find(|&id| !state.is_used(id))?
    };
    state.used_this_round |= 1u64 << id;
    let rule = catalog.rule(id);
    Some(AgentReaction {
        expression: rule.expression,
        message: rule.message.clone(),
        context: Some(rule.context),
    })
}

/// Status line of the control personality.
pub fn control_status(event: &AgentEvent) -> Option<String> {
    match *event {
        AgentEvent::RoundStarted { .. } => Some(format!("Guess 1 of {MAX_GUESSES}")),
        AgentEvent::GuessRejectedInvalid { pending_guess, .. } => Some(format!("Guess {pending_guess} of {MAX_GUESSES}")),
        AgentEvent::GuessEvaluated { guess_index, .. } if guess_index < MAX_GUESSES => {
            Some(format!("Guess {} of {MAX_GUESSES}", guess_index + 1))
        }
        AgentEvent::GuessEvaluated { .. } => None,
        AgentEvent::RoundEnded { won: true, guesses_used, .. } => Some(format!("You won after {guesses_used} guesses")),
        AgentEvent::RoundEnded { won: false, .. } => Some(format!("You lost after {MAX_GUESSES} guesses")),
        AgentEvent::IdleTick { .. } => None,
    }
}

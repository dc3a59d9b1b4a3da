//! One participant's session: the ordered intake, elicitation, rounds,
//! questionnaire and bonus flow, with the agent and candidate tracking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wordlab_core::agent::{AgentEvent, AgentReaction, AgentState, Millis, Personality, RevealTracker, Rotation, MAX_GUESSES};
use wordlab_core::entropy::CandidateSet;
use wordlab_core::{feedback, validate_guess, FeedbackPattern, InvalidGuess, PoolKind, Word};

use super::{Resources, ServiceError};
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub anger: bool,
    pub empathy: bool,
}

impl Assignment {
    pub fn personality(self) -> Personality {
        if self.empathy {
            Personality::Empathic
        } else {
            Personality::Control
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sex {
    Female,
    Male,
    Other,
    Undisclosed,
}

/// Answer to "How many times have you played Wordle".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WordleExperience {
    #[serde(rename = "never")]
    Never,
    #[serde(rename = "1-10")]
    UpToTen,
    #[serde(rename = "11-50")]
    UpToFifty,
    #[serde(rename = "51-100")]
    UpToHundred,
    #[serde(rename = "over-100")]
    OverHundred,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intake {
    pub age: u32,
    pub sex: Sex,
    pub native_english: bool,
    pub wordle_experience: WordleExperience,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub arousal: f64,
    pub valence: f64,
    pub crt_answers: Vec<String>,
    pub crt_score: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundOutcome {
    InProgress,
    Won,
    Lost,
}

/// One submitted guess, valid or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessEvent {
    /// 1-based submission number within the session.
    pub seq: u64,
    /// Valid guesses: this guess's attempt number. Invalid ones: the attempt still pending.
    pub guess_index: u8,
    pub raw_input: String,
    pub valid: bool,
    pub invalid_reason: Option<InvalidGuess>,
    pub word: Option<Word>,
    pub pattern: Option<FeedbackPattern>,
    pub submitted_at: Millis,
    pub response_time_s: f64,
    pub agent_reaction: Option<AgentReaction>,
    pub remaining_solutions_after: u32,
    pub remaining_words_after: u32,
    /// Mean surviving solution count of this guess under a uniform prior
    /// over the candidates before it.
    pub expected_solutions_after: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionTrigger {
    RoundStart,
    Idle,
}

/// A reaction not tied to a guess submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedReaction {
    pub at: Millis,
    pub trigger: ReactionTrigger,
    pub reaction: AgentReaction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based over main and bonus rounds.
    pub round_index: u32,
    pub is_bonus: bool,
    pub solution: Word,
    pub started_at: Millis,
    pub guesses: Vec<GuessEvent>,
    pub reactions: Vec<TimedReaction>,
    pub outcome: RoundOutcome,
}

impl RoundRecord {
    pub fn valid_guesses(&self) -> usize {
        self.guesses.iter().filter(|g| g.valid).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Elicitation,
    Rounds,
    Questionnaire,
    Bonus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOpening {
    pub round_index: u32,
    pub is_bonus: bool,
    pub agent_reaction: Option<AgentReaction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationOutcome {
    pub accepted: bool,
    pub characters: usize,
    pub required: usize,
    /// Set when this submission unlocked the first round.
    pub round: Option<RoundOpening>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStatus {
    pub round_index: u32,
    pub is_bonus: bool,
    pub guesses_used: u8,
    pub status: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessOutcome {
    pub seq: u64,
    pub valid: bool,
    pub invalid_reason: Option<InvalidGuess>,
    pub pattern: Option<FeedbackPattern>,
    pub agent_reaction: Option<AgentReaction>,
    pub round: RoundStatus,
    /// Opening of the round that started because this guess ended one.
    pub next_round: Option<RoundOpening>,
}

/// What a participant's client may see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub phase: Phase,
    pub assignment: Assignment,
    pub elicitation_prompts: [String; 2],
    pub elicitation_accepted: [bool; 2],
    pub rounds: Vec<RoundView>,
    pub questionnaire_submitted: bool,
    pub crt_score: Option<u8>,
    pub bonus_rounds_started: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundView {
    pub round_index: u32,
    pub is_bonus: bool,
    pub status: RoundOutcome,
    pub board: Vec<(Word, FeedbackPattern)>,
    /// Revealed once the round is over.
    pub solution: Option<Word>,
}

/// Candidate tracking for the round in play.
#[derive(Debug, Clone)]
struct LiveRound {
    solutions: CandidateSet,
    words: CandidateSet,
    reveal: RevealTracker,
    last_submission_at: Millis,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub serial: u64,
    pub seed: u64,
    pub created_at: Millis,
    pub assignment: Assignment,
    pub intake: Intake,
    pub main_solutions: Vec<Word>,
    pub elicitation: [Option<String>; 2],
    pub rounds: Vec<RoundRecord>,
    pub questionnaire: Option<Questionnaire>,
    pub bonus_rounds_started: u32,
    prompts: [String; 2],
    agent: AgentState,
    live: Option<LiveRound>,
    outcomes: Vec<GuessOutcome>,
    last_at: Millis,
}

/// Draws an independent stream for session `serial` of an experiment seeded with `seed`.
pub fn session_rng(seed: u64, serial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(serial);
    rng
}

/// Assignment and per-session seed for session `serial`: two fair,
/// independent coins, then a seed for the agent rotation and bonus draws.
pub fn draw_assignment(seed: u64, serial: u64) -> (Assignment, u64) {
    let mut rng = session_rng(seed, serial);
    let anger = rng.random_bool(0.5);
    let empathy = rng.random_bool(0.5);
    (Assignment { anger, empathy }, rng.random())
}

impl Session {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: String,
        serial: u64,
        seed: u64,
        assignment: Assignment,
        intake: Intake,
        main_solutions: Vec<Word>,
        config: &ExperimentConfig,
        res: &Resources,
        at: Millis,
    ) -> Self {
        let rotation = Rotation::shuffled(&res.catalog, &mut ChaCha8Rng::seed_from_u64(seed));
        Session {
            id,
            serial,
            seed,
            created_at: at,
            assignment,
            intake,
            main_solutions,
            elicitation: [None, None],
            rounds: Vec::new(),
            questionnaire: None,
            bonus_rounds_started: 0,
            prompts: config.prompts_for(assignment.anger).clone(),
            agent: AgentState::new(assignment.personality(), rotation, at),
            live: None,
            outcomes: Vec::new(),
            last_at: at,
        }
    }

    pub fn prompts(&self) -> &[String; 2] {
        &self.prompts
    }

    pub fn phase(&self) -> Phase {
        let main_done = self.rounds.iter().filter(|r| !r.is_bonus && r.outcome != RoundOutcome::InProgress).count();
        if self.rounds.is_empty() {
            Phase::Elicitation
        } else if main_done < self.main_solutions.len() {
            Phase::Rounds
        } else if self.questionnaire.is_none() {
            Phase::Questionnaire
        } else {
            Phase::Bonus
        }
    }

    /// Timestamps never run backwards within a session.
    fn tick(&mut self, at: Millis) -> Millis {
        self.last_at = self.last_at.max(at);
        self.last_at
    }

    fn active_round(&self) -> Option<&RoundRecord> {
        self.rounds.last().filter(|r| r.outcome == RoundOutcome::InProgress)
    }

    pub fn submissions(&self) -> u64 {
        self.outcomes.len() as u64
    }

    pub fn submit_elicitation(
        &mut self,
        index: usize,
        text: &str,
        min_chars: usize,
        res: &Resources,
        at: Millis,
    ) -> Result<ElicitationOutcome, ServiceError> {
        if !self.rounds.is_empty() {
            return Err(ServiceError::RoundsAlreadyStarted);
        }
        if index > 1 {
            return Err(ServiceError::OutOfRange(format!("response_index {index} (expected 0 or 1)")));
        }
        let at = self.tick(at);
        let characters = text.chars().count();
        let accepted = characters >= min_chars;
        if accepted {
            self.elicitation[index] = Some(text.to_owned());
        }
        let round = if self.elicitation.iter().all(Option::is_some) {
            let solution = self.main_solutions[0];
            Some(self.start_round(solution, false, res, at))
        } else {
            None
        };
        Ok(ElicitationOutcome {
            accepted,
            characters,
            required: min_chars,
            round,
        })
    }

    fn start_round(&mut self, solution: Word, is_bonus: bool, res: &Resources, at: Millis) -> RoundOpening {
        let round_index = self.rounds.len() as u32 + 1;
        let reaction = self.agent.react(&res.catalog, &res.thresholds, &AgentEvent::RoundStarted { round_index, at });
        let mut record = RoundRecord {
            round_index,
            is_bonus,
            solution,
            started_at: at,
            guesses: Vec::new(),
            reactions: Vec::new(),
            outcome: RoundOutcome::InProgress,
        };
        if let Some(r) = &reaction {
            record.reactions.push(TimedReaction {
                at,
                trigger: ReactionTrigger::RoundStart,
                reaction: r.clone(),
            });
        }
        self.rounds.push(record);
        self.live = Some(LiveRound {
            solutions: res.engine.full(PoolKind::Solutions),
            words: res.engine.full(PoolKind::Guesses),
            reveal: RevealTracker::new(),
            last_submission_at: at,
        });
        RoundOpening {
            round_index,
            is_bonus,
            agent_reaction: reaction,
        }
    }

    fn no_round_error(&self) -> ServiceError {
        if self.rounds.is_empty() {
            ServiceError::NoActiveRound
        } else {
            ServiceError::RoundAlreadyOver
        }
    }

    /// Evaluates one submission. A `seq` at or below the number already
    /// processed returns the stored outcome unchanged.
    pub fn submit_guess(
        &mut self,
        raw: &str,
        seq: Option<u64>,
        res: &Resources,
        at: Millis,
    ) -> Result<GuessOutcome, ServiceError> {
        let done = self.submissions();
        match seq {
            Some(0) => return Err(ServiceError::OutOfRange("seq starts at 1".into())),
            Some(s) if s <= done => return Ok(self.outcomes[s as usize - 1].clone()),
            Some(s) if s > done + 1 => return Err(ServiceError::SequenceGap { expected: done + 1, got: s }),
            _ => {}
        }
        if self.active_round().is_none() {
            return Err(self.no_round_error());
        }
        let at = self.tick(at);
        let seq = done + 1;
        let catalog = &res.catalog;
        let thresholds = &res.thresholds;
        let round = self.rounds.last_mut().expect("active round");
        let live = self.live.as_mut().expect("live round state");
        let used = round.valid_guesses() as u8;
        let response_time_s = at.saturating_sub(live.last_submission_at) as f64 / 1000.0;
        live.last_submission_at = at;

        let mut event = GuessEvent {
            seq,
            guess_index: used + 1,
            raw_input: raw.to_owned(),
            valid: false,
            invalid_reason: None,
            word: None,
            pattern: None,
            submitted_at: at,
            response_time_s,
            agent_reaction: None,
            remaining_solutions_after: live.solutions.count() as u32,
            remaining_words_after: live.words.count() as u32,
            expected_solutions_after: None,
        };
        let mut ended = None;
        match validate_guess(raw, res.engine.lexicon().guesses()) {
            Err(reason) => {
                event.invalid_reason = Some(reason);
                event.agent_reaction = self.agent.react(
                    catalog,
                    thresholds,
                    &AgentEvent::GuessRejectedInvalid { pending_guess: used + 1, at },
                );
            }
            Ok(word) => {
                let pattern = feedback(&word, &round.solution);
                event.expected_solutions_after = res.engine.expected_remaining(&live.solutions, &word).ok();
                live.solutions = res.engine.filter(&live.solutions, &word, pattern);
                live.words = res.engine.filter(&live.words, &word, pattern);
                let revealed = live.reveal.observe(&word, pattern);
                let guesses_used = used + 1;
                event.valid = true;
                event.word = Some(word);
                event.pattern = Some(pattern);
                event.remaining_solutions_after = live.solutions.count() as u32;
                event.remaining_words_after = live.words.count() as u32;
                let agent_event = if pattern.is_win() || guesses_used == MAX_GUESSES {
                    let won = pattern.is_win();
                    ended = Some(if won { RoundOutcome::Won } else { RoundOutcome::Lost });
                    AgentEvent::RoundEnded { won, guesses_used, at }
                } else {
                    AgentEvent::GuessEvaluated {
                        guess_index: guesses_used,
                        response_time_s,
                        remaining_solutions: event.remaining_solutions_after,
                        revealed_new_letters: revealed,
                        at,
                    }
                };
                event.agent_reaction = self.agent.react(catalog, thresholds, &agent_event);
            }
        }
        let mut outcome = GuessOutcome {
            seq,
            valid: event.valid,
            invalid_reason: event.invalid_reason,
            pattern: event.pattern,
            agent_reaction: event.agent_reaction.clone(),
            round: RoundStatus {
                round_index: round.round_index,
                is_bonus: round.is_bonus,
                guesses_used: used + event.valid as u8,
                status: ended.unwrap_or(RoundOutcome::InProgress),
            },
            next_round: None,
        };
        round.guesses.push(event);
        if let Some(result) = ended {
            round.outcome = result;
            self.live = None;
            let main_played = self.rounds.iter().filter(|r| !r.is_bonus).count();
            let finished_main = !self.rounds.last().expect("round").is_bonus;
            if finished_main && main_played < self.main_solutions.len() {
                let next = self.main_solutions[main_played];
                outcome.next_round = Some(self.start_round(next, false, res, at));
            }
        }
        self.outcomes.push(outcome.clone());
        Ok(outcome)
    }

    /// Idle check for the round in play; `None` when nothing is shown.
    pub fn idle(&mut self, res: &Resources, at: Millis) -> Option<AgentReaction> {
        self.active_round()?;
        let at = self.last_at.max(at);
        let reaction = self.agent.react(&res.catalog, &res.thresholds, &AgentEvent::IdleTick { at })?;
        self.tick(at);
        self.rounds.last_mut().expect("active round").reactions.push(TimedReaction {
            at,
            trigger: ReactionTrigger::Idle,
            reaction: reaction.clone(),
        });
        Some(reaction)
    }

    pub fn submit_questionnaire(
        &mut self,
        arousal: f64,
        valence: f64,
        crt_answers: Vec<String>,
        config: &ExperimentConfig,
        at: Millis,
    ) -> Result<u8, ServiceError> {
        match self.phase() {
            Phase::Elicitation | Phase::Rounds => return Err(ServiceError::RoundsIncomplete),
            Phase::Bonus => return Err(ServiceError::QuestionnaireAlreadySubmitted),
            Phase::Questionnaire => {}
        }
        for (name, v) in [("arousal", arousal), ("valence", valence)] {
            if !(0.0..=100.0).contains(&v) {
                return Err(ServiceError::OutOfRange(format!("{name} {v} outside [0, 100]")));
            }
        }
        if crt_answers.len() != config.crt.len() {
            return Err(ServiceError::OutOfRange(format!(
                "{} CRT answers for {} items",
                crt_answers.len(),
                config.crt.len()
            )));
        }
        self.tick(at);
        let crt_score = config.score_crt(&crt_answers);
        self.questionnaire = Some(Questionnaire {
            arousal,
            valence,
            crt_answers,
            crt_score,
        });
        Ok(crt_score)
    }

    /// Solution of the `n`th (1-based) bonus round: uniform over the
    /// solution pool minus the main-round words.
    pub fn bonus_solution(&self, n: u32, res: &Resources) -> Word {
        let pool = res.engine.lexicon().solutions().words();
        let eligible: Vec<&Word> = pool.iter().filter(|w| !self.main_solutions.contains(w)).collect();
        let mut rng = session_rng(self.seed, 1 + n as u64);
        *eligible[rng.random_range(0..eligible.len())]
    }

    pub fn start_bonus(&mut self, solution: Word, res: &Resources, at: Millis) -> Result<RoundOpening, ServiceError> {
        match self.phase() {
            Phase::Bonus => {}
            _ => return Err(ServiceError::QuestionnaireMissing),
        }
        if self.active_round().is_some() {
            return Err(ServiceError::RoundInProgress);
        }
        let at = self.tick(at);
        self.bonus_rounds_started += 1;
        Ok(self.start_round(solution, true, res, at))
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            phase: self.phase(),
            assignment: self.assignment,
            elicitation_prompts: self.prompts.clone(),
            elicitation_accepted: [self.elicitation[0].is_some(), self.elicitation[1].is_some()],
            rounds: self
                .rounds
                .iter()
                .map(|r| RoundView {
                    round_index: r.round_index,
                    is_bonus: r.is_bonus,
                    status: r.outcome,
                    board: r.guesses.iter().filter_map(|g| Some((g.word?, g.pattern?))).collect(),
                    solution: (r.outcome != RoundOutcome::InProgress).then_some(r.solution),
                })
                .collect(),
            questionnaire_submitted: self.questionnaire.is_some(),
            crt_score: self.questionnaire.as_ref().map(|q| q.crt_score),
            bonus_rounds_started: self.bonus_rounds_started,
        }
    }
}

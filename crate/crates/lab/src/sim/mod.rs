//! Simulated participants driving the service end to end.

pub mod client;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use wordlab_core::agent::Millis;
use wordlab_core::entropy::{CandidateSet, EntropyEngine};
use wordlab_core::{feedback, FeedbackPattern, PoolKind, Word};

use crate::service::session::{RoundOutcome, Sex, WordleExperience};
use crate::service::{Assignment, Intake};
pub use client::{HttpClient, InProcess, LabClient};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("service unreachable: {0}")]
    ServiceUnreachable(String),
    #[error("service rejected the request: {kind}: {message}")]
    Api { kind: String, message: String },
    #[error("invalid effect injection: {0}")]
    InvalidInjection(String),
    #[error("unexpected service behaviour: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    RandomValid,
    GreedyEntropy,
    NoisyHeuristic,
}

impl FromStr for PolicyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(PolicyKind::RandomValid),
            "greedy" => Ok(PolicyKind::GreedyEntropy),
            "noisy" => Ok(PolicyKind::NoisyHeuristic),
            _ => Err(format!("unknown policy {s:?} (random, greedy or noisy)")),
        }
    }
}

/// Skill offsets per treatment cell, indexed `[anger][empathy]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EffectInjection {
    pub offsets: [[f64; 2]; 2],
}

impl EffectInjection {
    pub const NONE: EffectInjection = EffectInjection { offsets: [[0.0; 2]; 2] };

    /// Offsets from factor effects: anger alone, empathy alone, and the
    /// extra shift when both are on.
    pub fn from_factors(anger: f64, empathy: f64, interaction: f64) -> Self {
        EffectInjection {
            offsets: [[0.0, empathy], [anger, anger + empathy + interaction]],
        }
    }

    pub fn offset(&self, a: Assignment) -> f64 {
        self.offsets[a.anger as usize][a.empathy as usize]
    }

    /// Skill of a cell; errors if any cell leaves [0, 1].
    pub fn validate(&self, base: f64) -> Result<(), SimError> {
        for a in [false, true] {
            for e in [false, true] {
                let s = base + self.offsets[a as usize][e as usize];
                if !(0.0..=1.0).contains(&s) {
                    return Err(SimError::InvalidInjection(format!(
                        "skill {s} for anger={a}, empathy={e} is outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn skill(&self, base: f64, a: Assignment) -> f64 {
        base + self.offset(a)
    }
}

impl FromStr for EffectInjection {
    type Err = SimError;

    /// `anger=-0.1,empathy=0.05,interaction=0.1`; missing keys are 0.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let (mut a, mut e, mut i) = (0.0, 0.0, 0.0);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| SimError::InvalidInjection(format!("expected key=value, got {part:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| SimError::InvalidInjection(format!("bad number in {part:?}")))?;
            match k.trim() {
                "anger" => a = v,
                "empathy" => e = v,
                "interaction" | "anger*empathy" => i = v,
                other => return Err(SimError::InvalidInjection(format!("unknown key {other:?}"))),
            }
        }
        Ok(EffectInjection::from_factors(a, e, i))
    }
}

impl fmt::Display for EffectInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.offsets;
        write!(
            f,
            "anger={},empathy={},interaction={}",
            o[1][0],
            o[0][1],
            o[1][1] - o[1][0] - o[0][1]
        )
    }
}

/// Guess choice shared by all bots of a run; greedy moves are memoized by
/// candidate set.
pub struct Strategist<'a> {
    engine: &'a EntropyEngine,
    memo: HashMap<Vec<u64>, Word>,
}

impl<'a> Strategist<'a> {
    pub fn new(engine: &'a EntropyEngine) -> Self {
        Strategist {
            engine,
            memo: HashMap::new(),
        }
    }

    pub fn engine(&self) -> &'a EntropyEngine {
        self.engine
    }

    /// Expected-remaining minimizer over the guess pool, earliest on ties;
    /// with two or fewer candidates, the first candidate.
    pub fn greedy(&mut self, candidates: &CandidateSet) -> Word {
        let lex = self.engine.lexicon();
        let pool = lex.pool(candidates.pool_kind());
        if candidates.count() <= 2 {
            let first = candidates.iter().next().expect("candidates are never empty");
            return pool.words()[first];
        }
        if let Some(w) = self.memo.get(candidates.blocks()) {
            return *w;
        }
        let (g, _) = self.engine.min_expected_remaining(candidates).expect("non-empty");
        let word = lex.guesses().words()[g];
        self.memo.insert(candidates.blocks().to_vec(), word);
        word
    }

    pub fn random(&self, rng: &mut impl Rng) -> Word {
        *self.engine.lexicon().guesses().words().choose(rng).expect("guess pool is non-empty")
    }

    pub fn choose(&mut self, policy: PolicyKind, skill: f64, candidates: &CandidateSet, rng: &mut impl Rng) -> Word {
        match policy {
            PolicyKind::RandomValid => self.random(rng),
            PolicyKind::GreedyEntropy => self.greedy(candidates),
            PolicyKind::NoisyHeuristic => {
                if rng.random_bool(skill.clamp(0.0, 1.0)) {
                    self.greedy(candidates)
                } else {
                    self.random(rng)
                }
            }
        }
    }

    /// Plays one round offline against a known solution; returns the
    /// number of guesses on a win.
    pub fn play_offline(&mut self, policy: PolicyKind, skill: f64, solution: &Word, rng: &mut impl Rng) -> Option<u8> {
        let mut set = self.engine.full(PoolKind::Solutions);
        for g in 1..=6u8 {
            let guess = self.choose(policy, skill, &set, rng);
            let p = feedback(&guess, solution);
            if p.is_win() {
                return Some(g);
            }
            set = self.engine.filter(&set, &guess, p);
        }
        None
    }
}

/// Win probability per main round under `policy` at `skill`, estimated
/// offline over `rounds` plays of each solution.
pub fn offline_win_rate(
    strategist: &mut Strategist,
    policy: PolicyKind,
    skill: f64,
    solutions: &[Word],
    rounds: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0usize;
    for _ in 0..rounds {
        for s in solutions {
            wins += strategist.play_offline(policy, skill, s, &mut rng).is_some() as usize;
        }
    }
    wins as f64 / (rounds * solutions.len()) as f64
}

#[derive(Debug, Clone)]
pub struct CohortSpec {
    pub n: usize,
    pub policy: PolicyKind,
    /// Base skill, before the injection offsets.
    pub skill: f64,
    pub injection: EffectInjection,
    pub seed: u64,
    /// Chance a bot plays one bonus round after the questionnaire.
    pub bonus_rate: f64,
    /// Chance of an invalid submission before each guess.
    pub invalid_rate: f64,
}

impl CohortSpec {
    pub fn new(n: usize, policy: PolicyKind, skill: f64, seed: u64) -> Self {
        CohortSpec {
            n,
            policy,
            skill,
            injection: EffectInjection::NONE,
            seed,
            bonus_rate: 0.2,
            invalid_rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CohortSummary {
    pub sessions: usize,
    pub rounds_won: usize,
    pub rounds_played: usize,
    pub invalid_submissions: usize,
    pub idle_reactions: usize,
}

const FILLER_WORDS: &[&str] = &[
    "today", "walked", "around", "the", "park", "and", "then", "cooked", "dinner", "with", "friends", "before",
    "reading", "a", "long", "book", "about", "rivers", "while", "music", "played", "softly", "in", "kitchen",
    "after", "work", "we", "talked", "for", "hours", "quiet", "evening", "street", "train", "coffee", "morning",
];

/// Seeded filler of at least `min_chars` characters.
pub fn filler_text(rng: &mut impl Rng, min_chars: usize) -> String {
    let mut out = String::new();
    while out.chars().count() < min_chars + rng.random_range(0..40) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(FILLER_WORDS.choose(rng).expect("non-empty"));
    }
    out.push('.');
    out
}

fn random_intake(rng: &mut impl Rng) -> Intake {
    Intake {
        age: rng.random_range(18..=70),
        sex: *[Sex::Female, Sex::Male, Sex::Other, Sex::Undisclosed]
            .choose_weighted(rng, |s| match s {
                Sex::Female | Sex::Male => 10,
                _ => 1,
            })
            .expect("weights are positive"),
        native_english: rng.random_bool(0.8),
        wordle_experience: *[
            WordleExperience::Never,
            WordleExperience::UpToTen,
            WordleExperience::UpToFifty,
            WordleExperience::UpToHundred,
            WordleExperience::OverHundred,
        ]
        .choose(rng)
        .expect("non-empty"),
    }
}

/// Seconds before a submission: a mix of fast, ordinary and slow moves.
fn response_time(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..10) {
        0..=1 => rng.random_range(1.0..4.0),
        2..=7 => rng.random_range(4.0..60.0),
        _ => rng.random_range(60.0..150.0),
    }
}

fn invalid_input(rng: &mut impl Rng) -> String {
    match rng.random_range(0..3) {
        0 => "qqqqq".into(),
        1 => (0..rng.random_range(2..5)).map(|_| rng.random_range(b'a'..=b'z') as char).collect(),
        _ => "ab1de".into(),
    }
}

struct Bot<'s, 'e> {
    rng: ChaCha8Rng,
    clock: Millis,
    seq: u64,
    strategist: &'s mut Strategist<'e>,
}

impl Bot<'_, '_> {
    fn wait(&mut self, seconds: f64) -> Millis {
        self.clock += (seconds * 1000.0).round() as Millis;
        self.clock
    }

    /// Plays the round in progress; returns whether the next main round opened.
    fn play_round<C: LabClient>(
        &mut self,
        client: &mut C,
        id: &str,
        policy: PolicyKind,
        skill: f64,
        spec: &CohortSpec,
        summary: &mut CohortSummary,
    ) -> Result<bool, SimError> {
        let engine = self.strategist.engine();
        let mut set = engine.full(PoolKind::Solutions);
        loop {
            if self.rng.random_bool(spec.invalid_rate) {
                let raw = invalid_input(&mut self.rng);
                let delay = self.rng.random_range(1.0..10.0);
                let at = self.wait(delay);
                self.seq += 1;
                let out = client.submit_guess(id, &raw, Some(self.seq), at)?;
                if out.valid {
                    return Err(SimError::Protocol(format!("{raw:?} was accepted")));
                }
                summary.invalid_submissions += 1;
            }
            let think = response_time(&mut self.rng);
            if think > 91.0 {
                let at = self.clock + 91_000;
                summary.idle_reactions += client.idle(id, at)?.is_some() as usize;
            }
            let guess = self.strategist.choose(policy, skill, &set, &mut self.rng);
            let at = self.wait(think);
            self.seq += 1;
            let out = client.submit_guess(id, guess.as_str(), Some(self.seq), at)?;
            let pattern: FeedbackPattern = out
                .pattern
                .ok_or_else(|| SimError::Protocol(format!("valid guess {guess} returned no pattern")))?;
            set = engine.filter(&set, &guess, pattern);
            match out.round.status {
                RoundOutcome::InProgress => {
                    if set.is_empty() {
                        return Err(SimError::Protocol("feedback inconsistent with every solution".into()));
                    }
                }
                done => {
                    summary.rounds_played += 1;
                    summary.rounds_won += (done == RoundOutcome::Won) as usize;
                    return Ok(out.next_round.is_some());
                }
            }
        }
    }
}

/// Seed of bot `k` in a cohort.
fn bot_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b075);
    rng.set_stream(k as u64);
    rng
}

/// Runs `spec.n` complete sessions through `client`, one after another.
pub fn run_cohort<C: LabClient>(
    client: &mut C,
    strategist: &mut Strategist,
    spec: &CohortSpec,
) -> Result<CohortSummary, SimError> {
    spec.injection.validate(spec.skill)?;
    let mut summary = CohortSummary::default();
    for k in 0..spec.n {
        let mut bot = Bot {
            rng: bot_rng(spec.seed, k),
            clock: 0,
            seq: 0,
            strategist: &mut *strategist,
        };
        let intake = random_intake(&mut bot.rng);
        let created = client.create_session(&intake, 0)?;
        let id = created.session_id;
        let skill = spec.injection.skill(spec.skill, created.assignment);

        let min = client.min_elicitation_chars();
        if bot.rng.random_bool(0.1) {
            let at = bot.wait(20.0);
            let short = client.submit_elicitation(&id, 0, "too short", at)?;
            if short.accepted {
                return Err(SimError::Protocol("short elicitation accepted".into()));
            }
        }
        let mut opened = false;
        for index in 0..2 {
            let text = filler_text(&mut bot.rng, min);
            let delay = bot.rng.random_range(60.0..240.0);
            let at = bot.wait(delay);
            let out = client.submit_elicitation(&id, index, &text, at)?;
            if !out.accepted {
                return Err(SimError::Protocol(format!("filler of {} chars rejected", out.characters)));
            }
            opened = out.round.is_some();
        }
        if !opened {
            return Err(SimError::Protocol("round 1 did not open".into()));
        }
        while bot.play_round(client, &id, spec.policy, skill, spec, &mut summary)? {}

        let arousal = bot.rng.random_range(0.0..=100.0f64).round();
        let valence = bot.rng.random_range(0.0..=100.0f64).round();
        let crt = [("5 cents", "10 cents"), ("5 minutes", "100 minutes"), ("47 days", "24 days")]
            .map(|(right, wrong)| if bot.rng.random_bool(0.5) { right } else { wrong }.to_owned())
            .to_vec();
        let at = bot.wait(45.0);
        client.submit_questionnaire(&id, arousal, valence, crt, at)?;

        if bot.rng.random_bool(spec.bonus_rate) {
            let at = bot.wait(5.0);
            client.start_bonus(&id, at)?;
            bot.play_round(client, &id, spec.policy, skill, spec, &mut summary)?;
        }
        summary.sessions += 1;
    }
    Ok(summary)
}

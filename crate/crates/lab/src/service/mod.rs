//! The experiment service: a store of sessions backed by an append-only log.

pub mod http;
pub mod log;
pub mod session;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wordlab_core::agent::{AgentReaction, Catalog, Millis, Thresholds};
use wordlab_core::entropy::{EntropyEngine, FeedbackTable};
use wordlab_core::{canonical, Lexicon, PoolKind, Word};

use crate::config::ExperimentConfig;
use crate::io::{self, LoadError};
use log::{EventLog, LogError, LogOp, LogRecord};
pub use session::{
    Assignment, ElicitationOutcome, GuessOutcome, Intake, RoundOpening, Session, SessionView, Sex, WordleExperience,
};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("session {0} not found")]
    SessionNotFound(String),
    #[error("elicitation is closed once rounds have started")]
    RoundsAlreadyStarted,
    #[error("no round is active")]
    NoActiveRound,
    #[error("the round is already over")]
    RoundAlreadyOver,
    #[error("a round is still in progress")]
    RoundInProgress,
    #[error("the main rounds are not complete")]
    RoundsIncomplete,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("the questionnaire has not been submitted")]
    QuestionnaireMissing,
    #[error("the questionnaire was already submitted")]
    QuestionnaireAlreadySubmitted,
    #[error("guess sequence gap: expected {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Log(#[from] LogError),
}

/// Word lists, feedback table and agent catalog shared by all sessions.
#[derive(Clone)]
pub struct Resources {
    pub engine: Arc<EntropyEngine>,
    pub catalog: Arc<Catalog>,
    pub thresholds: Thresholds,
}

impl Resources {
    /// Built-in pools and catalog; the feedback table is built once per process.
    pub fn canonical(thresholds: Thresholds) -> Self {
        static SHARED: OnceLock<(Arc<EntropyEngine>, Arc<Catalog>)> = OnceLock::new();
        let (engine, catalog) = SHARED.get_or_init(|| {
            let lex = canonical::lexicon();
            let table = FeedbackTable::build(&lex);
            (Arc::new(EntropyEngine::with_table(lex, table)), Arc::new(canonical::catalog()))
        });
        Resources {
            engine: engine.clone(),
            catalog: catalog.clone(),
            thresholds,
        }
    }

    pub fn from_config(config: &ExperimentConfig) -> Result<Self, ServiceError> {
        let paths = &config.resources;
        if paths.guesses.is_none() && paths.solutions.is_none() && paths.catalog.is_none() && paths.table_cache.is_none() {
            return Ok(Self::canonical(config.thresholds));
        }
        let lex = match (&paths.guesses, &paths.solutions) {
            (None, None) => canonical::lexicon(),
            (g, s) => {
                let guesses = match g {
                    Some(p) => io::load_pool(p, PoolKind::Guesses)?,
                    None => canonical::guesses(),
                };
                let solutions = match s {
                    Some(p) => io::load_pool(p, PoolKind::Solutions)?,
                    None => canonical::solutions(),
                };
                Lexicon::new(guesses, solutions).map_err(LoadError::Lexicon)?
            }
        };
        let table = match &paths.table_cache {
            Some(p) => io::load_or_build_table(p, &lex),
            None => FeedbackTable::build(&lex),
        };
        let catalog = match &paths.catalog {
            Some(p) => io::load_catalog(p)?,
            None => canonical::catalog(),
        };
        Ok(Resources {
            engine: Arc::new(EntropyEngine::with_table(lex, table)),
            catalog: Arc::new(catalog),
            thresholds: config.thresholds,
        })
    }
}

/// Reply to `create_session`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub assignment: Assignment,
    pub elicitation_prompts: [String; 2],
}

type Clock = Box<dyn Fn() -> Millis + Send + Sync>;

fn wall_clock() -> Millis {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as Millis)
}

/// Concurrent session store. Mutations of one session are serialized by its
/// mutex; each accepted mutation is appended to the log before returning.
pub struct Lab {
    config: ExperimentConfig,
    resources: Resources,
    main_solutions: Vec<Word>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_serial: Mutex<u64>,
    log: Option<Mutex<EventLog>>,
    clock: Clock,
}

impl Lab {
    /// In-memory store without a log.
    pub fn new(config: ExperimentConfig, resources: Resources) -> Result<Self, ServiceError> {
        config.validate().map_err(|e| ServiceError::Config(e.to_string()))?;
        let solutions = resources.engine.lexicon().solutions();
        let main_solutions = config
            .main_solutions
            .iter()
            .map(|s| {
                Word::new(s)
                    .ok()
                    .filter(|w| solutions.contains(w))
                    .ok_or_else(|| ServiceError::Config(format!("main solution {s:?} is not in the solution pool")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if main_solutions.len() >= solutions.len() {
            return Err(ServiceError::Config("no solutions left for bonus rounds".into()));
        }
        Ok(Lab {
            config,
            resources,
            main_solutions,
            sessions: RwLock::new(BTreeMap::new()),
            next_serial: Mutex::new(0),
            log: None,
            clock: Box::new(wall_clock),
        })
    }

    /// Store persisted to `path`. Existing records are replayed first.
    pub fn open(config: ExperimentConfig, resources: Resources, path: &Path) -> Result<Self, ServiceError> {
        let (log, records) = EventLog::open(path)?;
        let mut lab = Lab::replay(config, resources, records)?;
        lab.log = Some(Mutex::new(log));
        Ok(lab)
    }

    /// In-memory store rebuilt from log records.
    pub fn replay(
        config: ExperimentConfig,
        resources: Resources,
        records: impl IntoIterator<Item = LogRecord>,
    ) -> Result<Self, ServiceError> {
        let mut lab = Lab::new(config, resources)?;
        for record in records {
            lab.apply(record)?;
        }
        Ok(lab)
    }

    /// Replaces the wall clock, for tests and simulations.
    pub fn with_clock(mut self, clock: impl Fn() -> Millis + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    /// Time of a request: the client's when the clock is simulated.
    fn now(&self, requested: Option<Millis>) -> Millis {
        match requested {
            Some(at) if self.config.simulated_clock => at,
            _ => (self.clock)(),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::SessionNotFound(id.to_owned()))
    }

    fn append(&self, session: &str, at: Millis, op: LogOp) -> Result<(), ServiceError> {
        if let Some(log) = &self.log {
            log.lock().expect("log poisoned").append(&LogRecord {
                session: session.to_owned(),
                at,
                op,
            })?;
        }
        Ok(())
    }

    fn session_id(&self, session_seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(session_seed);
        rng.set_stream(u64::MAX);
        let map = self.sessions.read().expect("session map poisoned");
        loop {
            let id = format!("{:016x}", rng.random::<u64>());
            if !map.contains_key(&id) {
                return id;
            }
        }
    }

    fn insert(&self, session: Session) {
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
    }

    pub fn create_session(&self, intake: Intake, at_ms: Option<Millis>) -> Result<Created, ServiceError> {
        if intake.age > 130 {
            return Err(ServiceError::OutOfRange(format!("age {}", intake.age)));
        }
        let mut serial = self.next_serial.lock().expect("serial poisoned");
        let at = self.now(at_ms);
        let (assignment, seed) = session::draw_assignment(self.config.seed, *serial);
        let id = self.session_id(seed);
        let session = Session::new(
            id.clone(),
            *serial,
            seed,
            assignment,
            intake.clone(),
            self.main_solutions.clone(),
            &self.config,
            &self.resources,
            at,
        );
        self.append(
            &id,
            at,
            LogOp::Created {
                serial: *serial,
                intake,
                assignment,
                seed,
                main_solutions: self.main_solutions.clone(),
            },
        )?;
        let created = Created {
            session_id: id,
            assignment,
            elicitation_prompts: session.prompts().clone(),
        };
        self.insert(session);
        *serial += 1;
        Ok(created)
    }

    pub fn submit_elicitation(
        &self,
        id: &str,
        index: usize,
        text: &str,
        at_ms: Option<Millis>,
    ) -> Result<ElicitationOutcome, ServiceError> {
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session poisoned");
        let at = self.now(at_ms);
        let out = s.submit_elicitation(index, text, self.config.min_elicitation_chars, &self.resources, at)?;
        if out.accepted {
            self.append(
                id,
                at,
                LogOp::Elicitation {
                    index,
                    text: text.to_owned(),
                },
            )?;
        }
        Ok(out)
    }

    pub fn submit_guess(
        &self,
        id: &str,
        raw: &str,
        seq: Option<u64>,
        at_ms: Option<Millis>,
    ) -> Result<GuessOutcome, ServiceError> {
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session poisoned");
        let before = s.submissions();
        let at = self.now(at_ms);
        let out = s.submit_guess(raw, seq, &self.resources, at)?;
        if s.submissions() > before {
            self.append(
                id,
                at,
                LogOp::Guess {
                    raw: raw.to_owned(),
                    seq: out.seq,
                },
            )?;
        }
        Ok(out)
    }

    pub fn idle_ping(&self, id: &str, at_ms: Option<Millis>) -> Result<Option<AgentReaction>, ServiceError> {
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session poisoned");
        let at = self.now(at_ms);
        let reaction = s.idle(&self.resources, at);
        if reaction.is_some() {
            self.append(id, at, LogOp::Idle)?;
        }
        Ok(reaction)
    }

    pub fn submit_questionnaire(
        &self,
        id: &str,
        arousal: f64,
        valence: f64,
        crt_answers: Vec<String>,
        at_ms: Option<Millis>,
    ) -> Result<u8, ServiceError> {
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session poisoned");
        let at = self.now(at_ms);
        let score = s.submit_questionnaire(arousal, valence, crt_answers.clone(), &self.config, at)?;
        self.append(
            id,
            at,
            LogOp::Questionnaire {
                arousal,
                valence,
                crt_answers,
            },
        )?;
        Ok(score)
    }

    pub fn start_bonus_round(&self, id: &str, at_ms: Option<Millis>) -> Result<RoundOpening, ServiceError> {
        let handle = self.session(id)?;
        let mut s = handle.lock().expect("session poisoned");
        let at = self.now(at_ms);
        let solution = s.bonus_solution(s.bonus_rounds_started + 1, &self.resources);
        let opening = s.start_bonus(solution, &self.resources, at)?;
        self.append(id, at, LogOp::BonusStarted { solution })?;
        Ok(opening)
    }

    pub fn state(&self, id: &str) -> Result<SessionView, ServiceError> {
        Ok(self.session(id)?.lock().expect("session poisoned").view())
    }

    /// Copies of all sessions in creation order.
    pub fn snapshot(&self) -> Vec<Session> {
        let handles: Vec<_> = self.sessions.read().expect("session map poisoned").values().cloned().collect();
        let mut out: Vec<Session> = handles.iter().map(|h| h.lock().expect("session poisoned").clone()).collect();
        out.sort_by_key(|s| s.serial);
        out
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Re-executes one logged transition.
    fn apply(&mut self, record: LogRecord) -> Result<(), ServiceError> {
        let LogRecord { session: id, at, op } = record;
        if let LogOp::Created {
            serial,
            intake,
            assignment,
            seed,
            main_solutions,
        } = op
        {
            let session = Session::new(
                id,
                serial,
                seed,
                assignment,
                intake,
                main_solutions,
                &self.config,
                &self.resources,
                at,
            );
            self.insert(session);
            let next = self.next_serial.get_mut().expect("serial poisoned");
            *next = (*next).max(serial + 1);
            return Ok(());
        }
        let handle = self.session(&id)?;
        let mut s = handle.lock().expect("session poisoned");
        let res = &self.resources;
        match op {
            LogOp::Created { .. } => unreachable!(),
            LogOp::Elicitation { index, text } => {
                s.submit_elicitation(index, &text, 0, res, at)?;
            }
            LogOp::Guess { raw, seq } => {
                s.submit_guess(&raw, Some(seq), res, at)?;
            }
            LogOp::Idle => {
                s.idle(res, at);
            }
            LogOp::Questionnaire {
                arousal,
                valence,
                crt_answers,
            } => {
                s.submit_questionnaire(arousal, valence, crt_answers, &self.config, at)?;
            }
            LogOp::BonusStarted { solution } => {
                s.start_bonus(solution, res, at)?;
            }
        }
        Ok(())
    }
}

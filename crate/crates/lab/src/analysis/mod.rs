//! Regression tables from exported telemetry.

pub mod table;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wordlab_core::stats::{build_design, CovarianceKind, DesignError, DesignRow, Heterogeneity, ModelSpec, RegressionResult};
use wordlab_core::PoolKind;

use crate::export::{ExportError, Fields, RawTable, EVENT_COLUMNS};
pub use table::{Column, RegressionTable};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("{label}: {source}")]
    Fit { label: String, source: DesignError },
    #[error("{0}")]
    Usage(String),
}

/// One participant row of the export.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantRecord {
    pub id: String,
    pub anger: bool,
    pub empathy: bool,
    pub sex: Option<String>,
    pub wordle_experience: Option<String>,
    pub arousal: Option<f64>,
    pub valence: Option<f64>,
    pub crt_score: Option<u8>,
    pub started_bonus: bool,
}

/// One guess-event row of the export.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub session_id: String,
    pub round_index: u32,
    pub is_bonus: bool,
    pub guess_index: u8,
    pub raw_input: String,
    pub valid: bool,
    pub pattern_code: Option<u8>,
    pub response_time_s: f64,
    pub remaining_solutions_after: u32,
    pub remaining_words_after: u32,
}

const PARTICIPANT_REQUIRED: [&str; 9] = [
    "session_id",
    "anger",
    "empathy",
    "sex",
    "wordle_experience",
    "arousal",
    "valence",
    "crt_score",
    "started_bonus",
];

const WIN_CODE: u8 = 242;

/// Exported events and participants, with participants indexed by position.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub participants: Vec<ParticipantRecord>,
    pub events: Vec<EventRecord>,
}

impl Dataset {
    pub fn from_tables(events: &RawTable, participants: &RawTable) -> Result<Self, AnalysisError> {
        let pc = participants.require(&PARTICIPANT_REQUIRED)?;
        let mut ps = Vec::with_capacity(participants.rows.len());
        for (i, row) in participants.rows.iter().enumerate() {
            let f = Fields::new(i, row);
            ps.push(ParticipantRecord {
                id: f.get(pc[0], "session_id")?,
                anger: f.get(pc[1], "anger")?,
                empathy: f.get(pc[2], "empathy")?,
                sex: f.opt(pc[3], "sex")?,
                wordle_experience: f.opt(pc[4], "wordle_experience")?,
                arousal: f.opt(pc[5], "arousal")?,
                valence: f.opt(pc[6], "valence")?,
                crt_score: f.opt(pc[7], "crt_score")?,
                started_bonus: f.get(pc[8], "started_bonus")?,
            });
        }
        let ec = events.require(&EVENT_COLUMNS[..10])?;
        let mut es = Vec::with_capacity(events.rows.len());
        for (i, row) in events.rows.iter().enumerate() {
            let f = Fields::new(i, row);
            let e = EventRecord {
                session_id: f.get(ec[0], "session_id")?,
                round_index: f.get(ec[1], "round_index")?,
                is_bonus: f.get(ec[2], "is_bonus")?,
                guess_index: f.get(ec[3], "guess_index")?,
                raw_input: f.text(ec[4]).to_owned(),
                valid: f.get(ec[5], "valid")?,
                pattern_code: f.opt(ec[6], "pattern_code")?,
                response_time_s: f.get(ec[7], "response_time_s")?,
                remaining_solutions_after: f.get(ec[8], "remaining_solutions_after")?,
                remaining_words_after: f.get(ec[9], "remaining_words_after")?,
            };
            if e.valid != e.pattern_code.is_some() || e.pattern_code.is_some_and(|c| c > WIN_CODE) {
                return Err(AnalysisError::SchemaMismatch(format!(
                    "event row {}: valid={} with pattern_code {:?}",
                    i + 1,
                    e.valid,
                    e.pattern_code
                )));
            }
            es.push(e);
        }
        Ok(Dataset {
            participants: ps,
            events: es,
        })
    }

    pub fn load(events: &Path, participants: &Path) -> Result<Self, AnalysisError> {
        let ev = RawTable::read(events, &EVENT_COLUMNS[..10])?;
        let pa = RawTable::read(participants, &PARTICIPANT_REQUIRED)?;
        Self::from_tables(&ev, &pa)
    }

    fn participant_index(&self) -> HashMap<&str, usize> {
        self.participants.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect()
    }

    /// Non-bonus events with their participant index, in file order.
    fn main_events(&self) -> Result<Vec<(usize, &EventRecord)>, AnalysisError> {
        let index = self.participant_index();
        self.events
            .iter()
            .filter(|e| !e.is_bonus)
            .map(|e| {
                index
                    .get(e.session_id.as_str())
                    .map(|&p| (p, e))
                    .ok_or_else(|| AnalysisError::SchemaMismatch(format!("event for unknown participant {}", e.session_id)))
            })
            .collect()
    }
}

/// Round-level outcomes of one participant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundObservation {
    pub participant: usize,
    pub round: u32,
    pub did_win: bool,
    pub guesses: u8,
    pub guesses_adjusted: u8,
    pub anger: bool,
    pub empathy: bool,
}

/// Bits remaining after one valid guess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessObservation {
    pub participant: usize,
    pub round: u32,
    pub guess: u8,
    pub bits_solutions: f64,
    pub bits_words: f64,
    pub anger: bool,
    pub empathy: bool,
}

impl GuessObservation {
    pub fn bits(&self, pool: PoolKind) -> f64 {
        match pool {
            PoolKind::Solutions => self.bits_solutions,
            PoolKind::Guesses => self.bits_words,
        }
    }
}

/// One row per completed main round: won on its last valid guess, or lost
/// after six. Rounds still in progress are dropped.
pub fn round_observations(data: &Dataset) -> Result<Vec<RoundObservation>, AnalysisError> {
    let mut rounds: BTreeMap<(usize, u32), Vec<&EventRecord>> = BTreeMap::new();
    for (p, e) in data.main_events()? {
        if e.valid {
            rounds.entry((p, e.round_index)).or_default().push(e);
        }
    }
    let mut out = Vec::with_capacity(rounds.len());
    for ((p, round), guesses) in rounds {
        let n = guesses.len();
        let win_at = guesses.iter().position(|e| e.pattern_code == Some(WIN_CODE));
        if n > 6 || win_at.is_some_and(|w| w + 1 != n) {
            return Err(AnalysisError::SchemaMismatch(format!(
                "participant {} round {round}: {n} valid guesses, win at {win_at:?}",
                data.participants[p].id
            )));
        }
        let did_win = win_at.is_some();
        if !did_win && n < 6 {
            continue;
        }
        let part = &data.participants[p];
        out.push(RoundObservation {
            participant: p,
            round,
            did_win,
            guesses: n as u8,
            guesses_adjusted: if did_win { n as u8 } else { 7 },
            anger: part.anger,
            empathy: part.empathy,
        });
    }
    Ok(out)
}

/// One row per valid main-round guess, including rounds left unfinished.
pub fn guess_observations(data: &Dataset) -> Result<Vec<GuessObservation>, AnalysisError> {
    let mut out = Vec::new();
    for (p, e) in data.main_events()? {
        if !e.valid {
            continue;
        }
        if e.remaining_solutions_after == 0 || e.remaining_words_after == 0 || !(1..=6).contains(&e.guess_index) {
            return Err(AnalysisError::SchemaMismatch(format!(
                "participant {} round {} guess {}: impossible candidate counts",
                e.session_id, e.round_index, e.guess_index
            )));
        }
        let part = &data.participants[p];
        out.push(GuessObservation {
            participant: p,
            round: e.round_index,
            guess: e.guess_index,
            bits_solutions: (e.remaining_solutions_after as f64).log2(),
            bits_words: (e.remaining_words_after as f64).log2(),
            anger: part.anger,
            empathy: part.empathy,
        });
    }
    Ok(out)
}

/// Participant-level moderator for the heterogeneity model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feature {
    Crt,
    NeverPlayed,
    Female,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::Crt, Feature::NeverPlayed, Feature::Female];

    pub fn label(self) -> &'static str {
        match self {
            Feature::Crt => "CRT",
            Feature::NeverPlayed => "Never Played Wordle",
            Feature::Female => "Female",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Feature::Crt => "crt",
            Feature::NeverPlayed => "never-played",
            Feature::Female => "female",
        }
    }

    pub fn value(self, p: &ParticipantRecord) -> Option<f64> {
        match self {
            Feature::Crt => p.crt_score.map(f64::from),
            Feature::NeverPlayed => p.wordle_experience.as_deref().map(|w| (w == "never") as u8 as f64),
            Feature::Female => p.sex.as_deref().map(|s| (s == "female") as u8 as f64),
        }
    }
}

impl FromStr for Feature {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.slug() == s)
            .ok_or_else(|| format!("unknown feature {s:?} (crt, never-played or female)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spec {
    Eq1,
    Eq2(Feature),
}

impl Spec {
    fn model(self) -> ModelSpec {
        match self {
            Spec::Eq1 => ModelSpec::Main,
            Spec::Eq2(f) => ModelSpec::Heterogeneous(Heterogeneity {
                label: f.label().to_owned(),
            }),
        }
    }

    fn feature(self) -> Option<Feature> {
        match self {
            Spec::Eq1 => None,
            Spec::Eq2(f) => Some(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundDv {
    DidWin,
    Guesses,
    GuessesAdjusted,
}

impl RoundDv {
    pub const ALL: [RoundDv; 3] = [RoundDv::DidWin, RoundDv::Guesses, RoundDv::GuessesAdjusted];

    pub fn label(self) -> &'static str {
        match self {
            RoundDv::DidWin => "Did Win",
            RoundDv::Guesses => "Guesses",
            RoundDv::GuessesAdjusted => "Guesses (Adjusted)",
        }
    }

    pub fn value(self, o: &RoundObservation) -> f64 {
        match self {
            RoundDv::DidWin => o.did_win as u8 as f64,
            RoundDv::Guesses => o.guesses as f64,
            RoundDv::GuessesAdjusted => o.guesses_adjusted as f64,
        }
    }
}

/// Dependent variable named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dv {
    Round(RoundDv),
    Bits,
}

impl FromStr for Dv {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "didwin" => Ok(Dv::Round(RoundDv::DidWin)),
            "guesses" => Ok(Dv::Round(RoundDv::Guesses)),
            "guesses-adj" => Ok(Dv::Round(RoundDv::GuessesAdjusted)),
            "bits" => Ok(Dv::Bits),
            _ => Err(format!("unknown dependent variable {s:?} (didwin, guesses, guesses-adj or bits)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitOptions {
    pub covariance: CovarianceKind,
    pub round_fixed_effects: bool,
}

/// Fits `y` on the treatment design, clustering on participant. Rows whose
/// participant lacks the heterogeneity feature are dropped first.
#[allow(clippy::too_many_arguments)]
fn fit_rows<T>(
    label: &str,
    data: &Dataset,
    rows: &[T],
    spec: Spec,
    opts: FitOptions,
    part: impl Fn(&T) -> usize,
    round: impl Fn(&T) -> Option<u32>,
    y: impl Fn(&T) -> f64,
) -> Result<RegressionResult, AnalysisError> {
    let design_rows: Vec<DesignRow> = rows
        .iter()
        .filter_map(|r| {
            let p = &data.participants[part(r)];
            let feature = match spec.feature() {
                Some(f) => Some(f.value(p)?),
                None => None,
            };
            Some(DesignRow {
                y: y(r),
                anger: p.anger,
                empathy: p.empathy,
                feature,
                round: round(r),
                cluster: part(r) as u64,
            })
        })
        .collect();
    let fit = |source| AnalysisError::Fit {
        label: label.to_owned(),
        source,
    };
    build_design(&spec.model(), &design_rows, opts.round_fixed_effects)
        .map_err(fit)?
        .fit(opts.covariance)
        .map_err(fit)
}

pub fn fit_round_dv(
    data: &Dataset,
    obs: &[RoundObservation],
    spec: Spec,
    dv: RoundDv,
    opts: FitOptions,
) -> Result<RegressionResult, AnalysisError> {
    fit_rows(dv.label(), data, obs, spec, opts, |o| o.participant, |o| Some(o.round), |o| dv.value(o))
}

pub fn ordinal(g: u8) -> String {
    let suffix = match g {
        1 => "st",
        2 => "nd",
        3 => "rd",
        _ => "th",
    };
    format!("{g}{suffix} Guess")
}

/// One regression per guess index on the bits remaining in `pool`.
pub fn fit_bits(
    data: &Dataset,
    obs: &[GuessObservation],
    pool: PoolKind,
    spec: Spec,
    opts: FitOptions,
) -> Result<Vec<Column>, AnalysisError> {
    let mut cols = Vec::new();
    for g in 1..=6u8 {
        let rows: Vec<&GuessObservation> = obs.iter().filter(|o| o.guess == g).collect();
        let label = ordinal(g);
        match fit_rows(&label, data, &rows, spec, opts, |o| o.participant, |o| Some(o.round), |o| o.bits(pool)) {
            Ok(result) => cols.push(Column { label, result }),
            Err(e) if rows.len() < 8 => ::log::warn!("skipping {label}: {e}"),
            Err(e) => return Err(e),
        }
    }
    Ok(cols)
}

pub const PARTICIPANT_DVS: [&str; 3] = ["Arousal", "Valence", "Started Bonus Rounds"];

/// Arousal, valence and bonus uptake on the main design, one row per
/// participant. Participants who skipped the questionnaire drop out of the
/// first two.
pub fn fit_participant_level(data: &Dataset, covariance: CovarianceKind) -> Result<Vec<Column>, AnalysisError> {
    let opts = FitOptions {
        covariance,
        round_fixed_effects: false,
    };
    let mut cols = Vec::new();
    for (k, label) in PARTICIPANT_DVS.into_iter().enumerate() {
        let rows: Vec<(usize, f64)> = data
            .participants
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let y = match k {
                    0 => p.arousal?,
                    1 => p.valence?,
                    _ => p.started_bonus as u8 as f64,
                };
                Some((i, y))
            })
            .collect();
        let result = fit_rows(label, data, &rows, Spec::Eq1, opts, |r| r.0, |_| None, |r| r.1)?;
        cols.push(Column {
            label: label.to_owned(),
            result,
        });
    }
    Ok(cols)
}

/// Word frequency lookup; words absent from the table score 0.
#[derive(Debug, Clone, Default)]
pub struct FrequencyTable(HashMap<String, f64>);

/// Sentiment label per word.
#[derive(Debug, Clone, Default)]
pub struct SentimentTable(HashMap<String, Sentiment>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sentiment {
    Positive,
    Neutral,
    Negative,
}

/// `word<sep>value` lines with `,`, tab or space separators; a first line
/// that does not parse is taken as a header.
fn keyed_lines<T>(text: &str, parse: impl Fn(&str) -> Option<T>) -> Result<HashMap<String, T>, String> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, [',', '\t', ' ']);
        let (key, value) = (parts.next().unwrap_or(""), parts.next().unwrap_or("").trim());
        match parse(value) {
            Some(v) => {
                out.insert(key.trim().to_ascii_lowercase(), v);
            }
            None if i == 0 => {}
            None => return Err(format!("line {}: cannot read {value:?}", i + 1)),
        }
    }
    Ok(out)
}

impl FrequencyTable {
    pub fn parse(text: &str) -> Result<Self, String> {
        keyed_lines(text, |v| v.parse::<f64>().ok().filter(|x| x.is_finite())).map(FrequencyTable)
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.0.get(word).copied()
    }
}

impl SentimentTable {
    pub fn parse(text: &str) -> Result<Self, String> {
        keyed_lines(text, |v| match v.to_ascii_lowercase().as_str() {
            "positive" | "pos" => Some(Sentiment::Positive),
            "neutral" | "neu" => Some(Sentiment::Neutral),
            "negative" | "neg" => Some(Sentiment::Negative),
            _ => None,
        })
        .map(SentimentTable)
    }

    pub fn get(&self, word: &str) -> Option<Sentiment> {
        self.0.get(word).copied()
    }
}

/// Reads an optional lookup file. A missing or unreadable file is a
/// warning, and the columns that need it are skipped.
pub fn load_lookup<T>(
    path: Option<&Path>,
    parse: impl Fn(&str) -> Result<T, String>,
    warnings: &mut Vec<String>,
) -> Option<T> {
    let path = path?;
    let parsed = fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse(&t));
    match parsed {
        Ok(t) => Some(t),
        Err(e) => {
            warnings.push(format!("MissingLexicon: {}: {e}; column skipped", path.display()));
            None
        }
    }
}

/// Per-submission outcomes: frequency and sentiment of valid guesses,
/// response time in minutes and validity of every submission.
pub fn fit_auxiliary(
    data: &Dataset,
    frequency: Option<&FrequencyTable>,
    sentiment: Option<&SentimentTable>,
    covariance: CovarianceKind,
    warnings: &mut Vec<String>,
) -> Result<Vec<Column>, AnalysisError> {
    let opts = FitOptions {
        covariance,
        round_fixed_effects: false,
    };
    let events = data.main_events()?;
    let word = |e: &EventRecord| e.raw_input.trim().to_ascii_lowercase();
    let mut cols = Vec::new();
    let mut fit = |label: &str, rows: Vec<(usize, f64)>| -> Result<(), AnalysisError> {
        let result = fit_rows(label, data, &rows, Spec::Eq1, opts, |r| r.0, |_| None, |r| r.1)?;
        cols.push(Column {
            label: label.to_owned(),
            result,
        });
        Ok(())
    };
    if let Some(freq) = frequency {
        let mut missing = 0usize;
        let rows = events
            .iter()
            .filter(|(_, e)| e.valid)
            .map(|(p, e)| {
                let f = freq.get(&word(e));
                missing += f.is_none() as usize;
                (*p, f.unwrap_or(0.0))
            })
            .collect();
        if missing > 0 {
            warnings.push(format!("{missing} valid guesses missing from the frequency table scored 0"));
        }
        fit("Frequency", rows)?;
    }
    fit(
        "Response Time",
        events.iter().map(|(p, e)| (*p, e.response_time_s / 60.0)).collect(),
    )?;
    if let Some(sent) = sentiment {
        let labelled: Vec<(usize, Sentiment)> = events
            .iter()
            .filter(|(_, e)| e.valid)
            .filter_map(|(p, e)| Some((*p, sent.get(&word(e))?)))
            .collect();
        let valid = events.iter().filter(|(_, e)| e.valid).count();
        if labelled.len() < valid {
            warnings.push(format!(
                "{} valid guesses without a sentiment label dropped",
                valid - labelled.len()
            ));
        }
        for (label, s) in [
            ("Positive", Sentiment::Positive),
            ("Neutral", Sentiment::Neutral),
            ("Negative", Sentiment::Negative),
        ] {
            fit(label, labelled.iter().map(|&(p, x)| (p, (x == s) as u8 as f64)).collect())?;
        }
    }
    fit("Valid", events.iter().map(|(p, e)| (*p, e.valid as u8 as f64)).collect())?;
    Ok(cols)
}

/// Which tables to produce.
#[derive(Debug, Clone, Default)]
pub struct AnalysisRequest {
    /// `None` runs every specification.
    pub spec: Option<Spec>,
    /// `None` runs every dependent variable.
    pub dv: Option<Dv>,
    /// Pool of the bits DV; `None` means both.
    pub pool: Option<PoolKind>,
    pub options: FitOptions,
    pub frequency: Option<FrequencyTable>,
    pub sentiment: Option<SentimentTable>,
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisReport {
    pub tables: Vec<RegressionTable>,
    pub warnings: Vec<String>,
}

fn round_table(
    data: &Dataset,
    obs: &[RoundObservation],
    spec: Spec,
    dvs: &[RoundDv],
    opts: FitOptions,
) -> Result<RegressionTable, AnalysisError> {
    let (name, title) = match spec {
        Spec::Eq1 => ("main".to_owned(), "Treatment effects on round outcomes".to_owned()),
        Spec::Eq2(f) => (
            format!("heterogeneity_{}", f.slug().replace('-', "_")),
            format!("Heterogeneous treatment effects by {}", f.label()),
        ),
    };
    let mut cols = Vec::new();
    for &dv in dvs {
        cols.push(Column {
            label: dv.label().to_owned(),
            result: fit_round_dv(data, obs, spec, dv, opts)?,
        });
    }
    Ok(RegressionTable::new(name, title, 2, cols))
}

fn bits_table(
    data: &Dataset,
    obs: &[GuessObservation],
    pool: PoolKind,
    spec: Spec,
    opts: FitOptions,
) -> Result<RegressionTable, AnalysisError> {
    let universe = match pool {
        PoolKind::Solutions => "2,315 possible solutions",
        PoolKind::Guesses => "12,972 possible words",
    };
    let suffix = match spec {
        Spec::Eq1 => String::new(),
        Spec::Eq2(f) => format!("_{}", f.slug().replace('-', "_")),
    };
    Ok(RegressionTable::new(
        format!("bits_{}{suffix}", pool.name()),
        format!("Mean bits remaining from {universe}"),
        4,
        fit_bits(data, obs, pool, spec, opts)?,
    ))
}

/// Runs the requested specifications.
pub fn analyze(data: &Dataset, req: &AnalysisRequest) -> Result<AnalysisReport, AnalysisError> {
    let mut report = AnalysisReport::default();
    let opts = req.options;
    let specs: Vec<Spec> = match req.spec {
        Some(s) => vec![s],
        None => std::iter::once(Spec::Eq1).chain(Feature::ALL.map(Spec::Eq2)).collect(),
    };
    let pools = match req.pool {
        Some(p) => vec![p],
        None => vec![PoolKind::Solutions, PoolKind::Guesses],
    };
    let want_round = !matches!(req.dv, Some(Dv::Bits));
    let want_bits = matches!(req.dv, None | Some(Dv::Bits));
    if want_round {
        let obs = round_observations(data)?;
        let dvs: Vec<RoundDv> = match req.dv {
            Some(Dv::Round(d)) => vec![d],
            _ => RoundDv::ALL.to_vec(),
        };
        for &spec in &specs {
            report.tables.push(round_table(data, &obs, spec, &dvs, opts)?);
        }
    }
    if want_bits {
        let obs = guess_observations(data)?;
        let bit_specs: Vec<Spec> = if req.spec.is_some() { specs.clone() } else { vec![Spec::Eq1] };
        for &pool in &pools {
            for &spec in &bit_specs {
                report.tables.push(bits_table(data, &obs, pool, spec, opts)?);
            }
        }
    }
    if req.spec.is_none() && req.dv.is_none() {
        report.tables.push(RegressionTable::new(
            "participant".into(),
            "Self-reported affect and bonus rounds".into(),
            2,
            fit_participant_level(data, opts.covariance)?,
        ));
        let cols = fit_auxiliary(
            data,
            req.frequency.as_ref(),
            req.sentiment.as_ref(),
            opts.covariance,
            &mut report.warnings,
        )?;
        report.tables.push(RegressionTable::new(
            "auxiliary".into(),
            "Additional outcomes".into(),
            4,
            cols,
        ));
    }
    Ok(report)
}

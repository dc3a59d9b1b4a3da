//! Anonymized export of a session store as CSV or JSONL, and readers for it.
//!
//! Sessions are ordered by creation and re-keyed `P0001`, `P0002`, ...; no
//! free text other than raw guesses and no absolute timestamps leave the
//! store, so the same store always exports to the same bytes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

use crate::service::session::{ReactionTrigger, RoundOutcome, Session};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }

    /// Format implied by a file name.
    pub fn of_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "jsonl" | "json" => Some(Format::Jsonl),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            _ => Err(format!("unknown format {s:?} (csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Events,
    Participants,
    Reactions,
}

impl TableKind {
    pub const ALL: [TableKind; 3] = [TableKind::Events, TableKind::Participants, TableKind::Reactions];

    pub fn name(self) -> &'static str {
        match self {
            TableKind::Events => "events",
            TableKind::Participants => "participants",
            TableKind::Reactions => "reactions",
        }
    }
}

impl FromStr for TableKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TableKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown table {s:?} (events, participants or reactions)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Null => Ok(()),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl Cell {
    /// JSON text; numbers are written exactly as in CSV.
    fn to_json(&self) -> String {
        match self {
            Cell::Null => "null".into(),
            Cell::Float(x) if !x.is_finite() => "null".into(),
            Cell::Text(s) => Value::String(s.clone()).to_string(),
            other => other.to_string(),
        }
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i64)
            }
        }
    )*};
}
int_cell!(u8, u32, u64, usize);

/// A rectangular table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// One JSON object per row, keys in column order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push('{');
            for (i, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(name.clone()).to_string());
                out.push(':');
                out.push_str(&cell.to_json());
            }
            out.push_str("}\n");
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Jsonl => self.to_jsonl(),
        }
    }
}

/// A table read back from disk with every cell as optional text.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

impl RawTable {
    pub fn parse_csv(text: &str) -> Result<Self, ExportError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            rows.push(rec.iter().map(|s| (!s.is_empty()).then(|| s.to_owned())).collect());
        }
        Ok(RawTable { columns, rows })
    }

    /// JSONL rows, each of which must carry every `expected` key.
    pub fn parse_jsonl(text: &str, expected: &[&str]) -> Result<Self, ExportError> {
        let columns: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let obj: serde_json::Map<String, Value> = serde_json::from_str(line).map_err(|e| ExportError::Json {
                line: i + 1,
                message: e.to_string(),
            })?;
            let row = columns
                .iter()
                .map(|c| match obj.get(c) {
                    None => Err(ExportError::SchemaMismatch(format!("line {}: missing key {c:?}", i + 1))),
                    Some(Value::Null) => Ok(None),
                    Some(Value::String(s)) => Ok(Some(s.clone())),
                    Some(Value::Number(n)) => Ok(Some(match (n.as_i64(), n.as_f64()) {
                        (Some(i), _) => i.to_string(),
                        (None, Some(x)) => x.to_string(),
                        _ => n.to_string(),
                    })),
                    Some(v) => Ok(Some(v.to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(RawTable { columns, rows })
    }

    pub fn read(path: &Path, expected: &[&str]) -> Result<Self, ExportError> {
        let text = fs::read_to_string(path).map_err(|source| ExportError::Io {
            path: path.to_owned(),
            source,
        })?;
        match Format::of_path(path) {
            Some(Format::Jsonl) => Self::parse_jsonl(&text, expected),
            _ => Self::parse_csv(&text),
        }
    }

    /// Index of each expected column, or a schema error naming the first missing one.
    pub fn require(&self, names: &[&str]) -> Result<Vec<usize>, ExportError> {
        names
            .iter()
            .map(|n| {
                self.columns
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| ExportError::SchemaMismatch(format!("missing column {n:?}")))
            })
            .collect()
    }
}

/// Typed cell access with row-numbered schema errors.
pub struct Fields<'a> {
    pub row: usize,
    cells: &'a [Option<String>],
}

impl<'a> Fields<'a> {
    pub fn new(row: usize, cells: &'a [Option<String>]) -> Self {
        Fields { row, cells }
    }

    pub fn opt<T: FromStr>(&self, col: usize, name: &str) -> Result<Option<T>, ExportError> {
        match &self.cells[col] {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| {
                ExportError::SchemaMismatch(format!("row {}: bad {name} value {s:?}", self.row + 1))
            }),
        }
    }

    pub fn get<T: FromStr>(&self, col: usize, name: &str) -> Result<T, ExportError> {
        self.opt(col, name)?
            .ok_or_else(|| ExportError::SchemaMismatch(format!("row {}: {name} is empty", self.row + 1)))
    }

    pub fn text(&self, col: usize) -> &'a str {
        self.cells[col].as_deref().unwrap_or("")
    }
}

pub const EVENT_COLUMNS: [&str; 13] = [
    "session_id",
    "round_index",
    "is_bonus",
    "guess_index",
    "raw_input",
    "valid",
    "pattern_code",
    "response_time_s",
    "remaining_solutions_after",
    "remaining_words_after",
    "agent_expression",
    "agent_message",
    "expected_solutions_after",
];

pub const REACTION_COLUMNS: [&str; 6] = [
    "session_id",
    "round_index",
    "is_bonus",
    "trigger",
    "agent_expression",
    "agent_message",
];

const PARTICIPANT_FIXED: [&str; 12] = [
    "session_id",
    "anger",
    "empathy",
    "age",
    "sex",
    "native_english",
    "wordle_experience",
    "arousal",
    "valence",
    "crt_score",
    "bonus_rounds_started",
    "started_bonus",
];

/// Participant columns for `rounds` main rounds.
pub fn participant_columns(rounds: usize) -> Vec<String> {
    let mut cols: Vec<String> = PARTICIPANT_FIXED.iter().map(|s| s.to_string()).collect();
    for t in 1..=rounds {
        cols.push(format!("round{t}_won"));
        cols.push(format!("round{t}_guesses"));
    }
    cols
}

pub fn anonymous_id(position: usize) -> String {
    format!("P{:04}", position + 1)
}

fn serde_name<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

pub fn events_table(sessions: &[Session]) -> Table {
    let mut t = Table::new(&EVENT_COLUMNS);
    for (p, s) in sessions.iter().enumerate() {
        for r in &s.rounds {
            for g in &r.guesses {
                let reaction = g.agent_reaction.as_ref();
                t.push(vec![
                    anonymous_id(p).into(),
                    r.round_index.into(),
                    r.is_bonus.into(),
                    g.guess_index.into(),
                    g.raw_input.as_str().into(),
                    g.valid.into(),
                    g.pattern.map(|p| p.code()).into(),
                    g.response_time_s.into(),
                    g.remaining_solutions_after.into(),
                    g.remaining_words_after.into(),
                    reaction.map(|a| a.expression.token()).into(),
                    reaction.map(|a| a.message.as_str()).into(),
                    g.expected_solutions_after.into(),
                ]);
            }
        }
    }
    t
}

pub fn reactions_table(sessions: &[Session]) -> Table {
    let mut t = Table::new(&REACTION_COLUMNS);
    for (p, s) in sessions.iter().enumerate() {
        for r in &s.rounds {
            for x in &r.reactions {
                let trigger = match x.trigger {
                    ReactionTrigger::RoundStart => "round_start",
                    ReactionTrigger::Idle => "idle",
                };
                t.push(vec![
                    anonymous_id(p).into(),
                    r.round_index.into(),
                    r.is_bonus.into(),
                    trigger.into(),
                    x.reaction.expression.token().into(),
                    x.reaction.message.as_str().into(),
                ]);
            }
        }
    }
    t
}

/// Main-round count used for the participant columns: the most any session has.
fn main_round_count(sessions: &[Session]) -> usize {
    sessions.iter().map(|s| s.main_solutions.len()).max().unwrap_or(4)
}

pub fn participants_table(sessions: &[Session]) -> Table {
    let rounds = main_round_count(sessions);
    let cols = participant_columns(rounds);
    let mut t = Table {
        columns: cols,
        rows: Vec::new(),
    };
    for (p, s) in sessions.iter().enumerate() {
        let q = s.questionnaire.as_ref();
        let mut row: Vec<Cell> = vec![
            anonymous_id(p).into(),
            s.assignment.anger.into(),
            s.assignment.empathy.into(),
            s.intake.age.into(),
            serde_name(&s.intake.sex).into(),
            s.intake.native_english.into(),
            serde_name(&s.intake.wordle_experience).into(),
            q.map(|q| q.arousal).into(),
            q.map(|q| q.valence).into(),
            q.map(|q| q.crt_score).into(),
            s.bonus_rounds_started.into(),
            (s.bonus_rounds_started > 0).into(),
        ];
        let mains: Vec<_> = s.rounds.iter().filter(|r| !r.is_bonus).collect();
        for t in 0..rounds {
            match mains.get(t).filter(|r| r.outcome != RoundOutcome::InProgress) {
                Some(r) => {
                    row.push((r.outcome == RoundOutcome::Won).into());
                    row.push(r.valid_guesses().into());
                }
                None => row.extend([Cell::Null, Cell::Null]),
            }
        }
        t.push(row);
    }
    t
}

pub fn table(sessions: &[Session], kind: TableKind) -> Table {
    match kind {
        TableKind::Events => events_table(sessions),
        TableKind::Participants => participants_table(sessions),
        TableKind::Reactions => reactions_table(sessions),
    }
}

/// Writes `events`, `participants` and `reactions` files into `dir`.
pub fn write_all(sessions: &[Session], dir: &Path, format: Format) -> Result<Vec<PathBuf>, ExportError> {
    fs::create_dir_all(dir).map_err(|source| ExportError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut written = Vec::new();
    for kind in TableKind::ALL {
        let path = dir.join(format!("{}.{}", kind.name(), format.extension()));
        fs::write(&path, table(sessions, kind).render(format)).map_err(|source| ExportError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

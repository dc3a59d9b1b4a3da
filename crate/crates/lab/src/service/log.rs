//! Append-only JSONL log of accepted session transitions.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wordlab_core::agent::Millis;
use wordlab_core::Word;

use super::session::{Assignment, Intake};

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event log {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("event log {path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LogOp {
    Created {
        serial: u64,
        intake: Intake,
        assignment: Assignment,
        seed: u64,
        main_solutions: Vec<Word>,
    },
    Elicitation {
        index: usize,
        text: String,
    },
    Guess {
        raw: String,
        seq: u64,
    },
    Idle,
    Questionnaire {
        arousal: f64,
        valence: f64,
        crt_answers: Vec<String>,
    },
    BonusStarted {
        solution: Word,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub session: String,
    pub at: Millis,
    #[serde(flatten)]
    pub op: LogOp,
}

pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    /// Opens (creating if needed) the log and returns its records. A torn
    /// final line from an interrupted write is dropped and truncated away.
    pub fn open(path: &Path) -> Result<(Self, Vec<LogRecord>), LogError> {
        let io_err = |source| LogError::Io {
            path: path.to_owned(),
            source,
        };
        let mut records = Vec::new();
        let mut valid_len = 0u64;
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io_err)?);
            let mut lines = reader.split(b'\n').enumerate().peekable();
            while let Some((i, line)) = lines.next() {
                let line = line.map_err(io_err)?;
                let last = lines.peek().is_none();
                if line.iter().all(u8::is_ascii_whitespace) {
                    valid_len += line.len() as u64 + 1;
                    continue;
                }
                match serde_json::from_slice::<LogRecord>(&line) {
                    Ok(r) => {
                        records.push(r);
                        valid_len += line.len() as u64 + 1;
                    }
                    Err(e) if last => {
                        ::log::warn!("dropping torn final record at {}:{}: {e}", path.display(), i + 1);
                    }
                    Err(e) => {
                        return Err(LogError::Corrupt {
                            path: path.to_owned(),
                            line: i + 1,
                            message: e.to_string(),
                        })
                    }
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err)?;
        let len = file.metadata().map_err(io_err)?.len();
        if len > valid_len {
            file.set_len(valid_len).map_err(io_err)?;
        } else if len + 1 == valid_len {
            file.write_all(b"\n").and_then(|_| file.sync_data()).map_err(io_err)?;
        }
        Ok((
            EventLog {
                path: path.to_owned(),
                file,
            },
            records,
        ))
    }

    /// Appends one record and syncs it to disk.
    pub fn append(&mut self, record: &LogRecord) -> Result<(), LogError> {
        let mut line = serde_json::to_vec(record).expect("log records serialize");
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|_| self.file.sync_data())
            .map_err(|source| LogError::Io {
                path: self.path.clone(),
                source,
            })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Reads every record of a log without opening it for writing.
pub fn read_log(path: &Path) -> Result<Vec<LogRecord>, LogError> {
    let text = std::fs::read_to_string(path).map_err(|source| LogError::Io {
        path: path.to_owned(),
        source,
    })?;
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => break,
            Err(e) => {
                return Err(LogError::Corrupt {
                    path: path.to_owned(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(raw: &str, seq: u64) -> LogRecord {
        LogRecord {
            session: "s".into(),
            at: seq * 10,
            op: LogOp::Guess { raw: raw.into(), seq },
        }
    }

    #[test]
    fn append_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("events.log");
        let (mut log, old) = EventLog::open(&p).unwrap();
        assert!(old.is_empty());
        log.append(&rec("plant", 1)).unwrap();
        log.append(&rec("qqqqq", 2)).unwrap();
        drop(log);
        let (_, back) = EventLog::open(&p).unwrap();
        assert_eq!(back, vec![rec("plant", 1), rec("qqqqq", 2)]);
        assert_eq!(read_log(&p).unwrap(), back);
    }

    #[test]
    fn torn_tail_is_dropped_and_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("events.log");
        let mut text = serde_json::to_string(&rec("plant", 1)).unwrap();
        text.push_str("\n{\"session\":\"s\",\"at\":2");
        std::fs::write(&p, &text).unwrap();
        let (mut log, back) = EventLog::open(&p).unwrap();
        assert_eq!(back, vec![rec("plant", 1)]);
        log.append(&rec("crane", 2)).unwrap();
        drop(log);
        let (_, back) = EventLog::open(&p).unwrap();
        assert_eq!(back, vec![rec("plant", 1), rec("crane", 2)]);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("events.log");
        let good = serde_json::to_string(&rec("plant", 1)).unwrap();
        std::fs::write(&p, format!("{good}\nnot json\n{good}\n")).unwrap();
        assert!(matches!(EventLog::open(&p), Err(LogError::Corrupt { line: 2, .. })));
    }
}

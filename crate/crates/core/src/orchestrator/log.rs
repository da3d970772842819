//! Session logs: a JSON-lines file with a versioned header carrying the session config, one
//! record per consumed input tagged with its tick, and an end record with the tick count.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Input, Session, SessionConfig, SessionError, Snapshot};
use crate::gesture::Mlp;

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt session log: {0}")]
    CorruptLog(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub tick: u64,
    pub input: Input,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub version: u32,
    pub config: SessionConfig,
    pub entries: Vec<LogEntry>,
    /// Ticks run by the recorded session.
    pub ticks: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Header { version: u32, config: Box<SessionConfig> },
    Input(LogEntry),
    End { ticks: u64 },
}

pub fn write_log<W: Write>(mut w: W, log: &SessionLog) -> Result<(), LogError> {
    let mut put = |r: &Record| -> Result<(), LogError> {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        Ok(())
    };
    put(&Record::Header { version: log.version, config: Box::new(log.config.clone()) })?;
    for e in &log.entries {
        put(&Record::Input(e.clone()))?;
    }
    put(&Record::End { ticks: log.ticks })
}

pub fn read_log<R: BufRead>(r: R) -> Result<SessionLog, LogError> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let corrupt = |line: usize, m: &str| LogError::CorruptLog(format!("line {}: {m}", line + 1));
    let parse = |i: usize, line: &str| -> Result<Record, LogError> {
        serde_json::from_str(line).map_err(|e| corrupt(i, &e.to_string()))
    };

    let (i, first) = lines.next().ok_or_else(|| LogError::CorruptLog("empty log".into()))?;
    // check the version before the config so newer formats report a mismatch, not a parse error
    let first = first?;
    let raw: serde_json::Value = serde_json::from_str(&first).map_err(|e| corrupt(i, &e.to_string()))?;
    if raw.get("record").and_then(|r| r.as_str()) != Some("header") {
        return Err(corrupt(i, "missing header"));
    }
    let found = raw.get("version").and_then(|v| v.as_u64()).ok_or_else(|| corrupt(i, "missing version"))? as u32;
    if found != LOG_VERSION {
        return Err(LogError::VersionMismatch { found, expected: LOG_VERSION });
    }
    let Record::Header { version, config } = parse(i, &first)? else {
        return Err(corrupt(i, "missing header"));
    };

    let mut entries: Vec<LogEntry> = Vec::new();
    for (i, line) in lines {
        match parse(i, &line?)? {
            Record::Input(e) => {
                if entries.last().is_some_and(|prev| prev.tick > e.tick) {
                    return Err(corrupt(i, "ticks out of order"));
                }
                entries.push(e);
            }
            Record::End { ticks } => {
                if entries.last().is_some_and(|e| e.tick >= ticks) {
                    return Err(corrupt(i, "input recorded after the last tick"));
                }
                return Ok(SessionLog { version, config: *config, entries, ticks });
            }
            Record::Header { .. } => return Err(corrupt(i, "second header")),
        }
    }
    Err(LogError::CorruptLog("truncated: no end record".into()))
}

/// Re-runs a recorded session, feeding every input at the tick that consumed it.
pub fn replay(log: &SessionLog, classifier: Option<Mlp<f64>>) -> Result<Vec<Snapshot>, LogError> {
    if log.version != LOG_VERSION {
        return Err(LogError::VersionMismatch { found: log.version, expected: LOG_VERSION });
    }
    let mut session = Session::new(log.config.clone())?;
    if let Some(m) = classifier {
        session = session.with_classifier(m);
    }
    let mut out = Vec::with_capacity(log.ticks as usize);
    let mut next = 0;
    for tick in 0..log.ticks {
        while next < log.entries.len() && log.entries[next].tick == tick {
            session.inject(log.entries[next].input.clone());
            next += 1;
        }
        out.push(session.tick()?);
    }
    Ok(out)
}

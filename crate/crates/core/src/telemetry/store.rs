//! Session persistence.
//!
//! [`MemoryStore`] holds everything in memory. [`FileStore`] wraps it and
//! mirrors every change to disk: one append-only `sessions/<id>.ndjson` log
//! per session plus an `index.json` describing each session's lifecycle.
//! Withheld sessions are deleted outright.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::canonical::tracking_code;
use super::event::GameEvent;
use super::session::{Consent, Difficulty, SessionLog};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown session `{0}`")]
    NotFound(String),
    #[error("sequence error: expected seq {expected}, got {got}")]
    Sequence { expected: u64, got: u64 },
    #[error("seq {seq} was already recorded with different content")]
    Conflict { seq: u64 },
    #[error("lifecycle error: {0}")]
    Lifecycle(String),
    #[error("invalid event: {0}")]
    Invalid(String),
    #[error("storage I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt store: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recorded {
    Appended,
    /// Exact replay of an already stored event; nothing changed.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Finalized {
    Sent { tracking_code: String },
    Withheld,
}

pub trait Store: Send {
    fn create_session(&mut self, difficulty: Difficulty, created_at: u64) -> Result<String, StoreError>;
    fn record_event(&mut self, event: GameEvent) -> Result<Recorded, StoreError>;
    fn finalize(&mut self, session_id: &str, consent: Consent) -> Result<Finalized, StoreError>;
    fn session(&self, session_id: &str) -> Result<&SessionLog, StoreError>;
    /// Ids of all stored sessions in ascending order.
    fn session_ids(&self) -> Vec<String>;
    /// Inserts an already finalized session, e.g. from an export.
    fn import(&mut self, log: SessionLog) -> Result<(), StoreError>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    sessions: BTreeMap<String, SessionLog>,
    next_id: u64,
    codes: BTreeMap<String, String>,
}

impl MemoryStore {
    pub fn new() -> Self {
        MemoryStore::default()
    }

    fn open_session(&mut self, session_id: &str) -> Result<&mut SessionLog, StoreError> {
        let log = self.sessions.get_mut(session_id).ok_or_else(|| StoreError::NotFound(session_id.to_owned()))?;
        if log.finalized {
            return Err(StoreError::Lifecycle(format!("session `{session_id}` is finalized")));
        }
        Ok(log)
    }

    fn note_code(&mut self, code: &str, session_id: &str) {
        if let Some(other) = self.codes.get(code) {
            log::warn!("tracking code {code} of session {session_id} collides with session {other}");
        } else {
            self.codes.insert(code.to_owned(), session_id.to_owned());
        }
    }
}

/// Checks `event` against `log` and returns the event as it would be stored
/// (timestamp clamped), or `None` for an exact duplicate.
fn admit(log: &SessionLog, mut event: GameEvent) -> Result<Option<GameEvent>, StoreError> {
    if event.session_id != log.session_id {
        return Err(StoreError::Invalid(format!("event belongs to session `{}`", event.session_id)));
    }
    if !event.event_type.valid_for(event.game_id) {
        return Err(StoreError::Invalid(format!("{} is not a {} event", event.event_type, event.game_id)));
    }
    let expected = log.next_seq();
    if event.seq > expected {
        return Err(StoreError::Sequence { expected, got: event.seq });
    }
    // Clamp against the predecessor so a replay compares equal to what the
    // original delivery stored.
    let idx = event.seq as usize;
    if let Some(prev) = idx.checked_sub(1).map(|i| &log.events[i]) {
        event.timestamp_ms = event.timestamp_ms.max(prev.timestamp_ms);
    }
    if event.seq < expected {
        return if log.events[idx] == event { Ok(None) } else { Err(StoreError::Conflict { seq: event.seq }) };
    }
    Ok(Some(event))
}

impl Store for MemoryStore {
    fn create_session(&mut self, difficulty: Difficulty, created_at: u64) -> Result<String, StoreError> {
        let id = format!("s{:08}", self.next_id);
        self.next_id += 1;
        self.sessions.insert(id.clone(), SessionLog::new(id.clone(), difficulty, created_at));
        Ok(id)
    }

    fn record_event(&mut self, event: GameEvent) -> Result<Recorded, StoreError> {
        let log = self.open_session(&event.session_id.clone())?;
        match admit(log, event)? {
            None => Ok(Recorded::Duplicate),
            Some(e) => {
                log.events.push(e);
                Ok(Recorded::Appended)
            }
        }
    }

    fn finalize(&mut self, session_id: &str, consent: Consent) -> Result<Finalized, StoreError> {
        let log = self.open_session(session_id)?;
        match consent {
            Consent::Withhold => {
                self.sessions.remove(session_id);
                Ok(Finalized::Withheld)
            }
            Consent::Send => {
                if log.events.is_empty() {
                    return Err(StoreError::Lifecycle(format!("session `{session_id}` has no events")));
                }
                let code = tracking_code(&log.events);
                log.consent = Some(Consent::Send);
                log.finalized = true;
                log.tracking_code = Some(code.clone());
                self.note_code(&code, session_id);
                Ok(Finalized::Sent { tracking_code: code })
            }
        }
    }

    fn session(&self, session_id: &str) -> Result<&SessionLog, StoreError> {
        self.sessions.get(session_id).ok_or_else(|| StoreError::NotFound(session_id.to_owned()))
    }

    fn session_ids(&self) -> Vec<String> {
        self.sessions.keys().cloned().collect()
    }

    fn import(&mut self, log: SessionLog) -> Result<(), StoreError> {
        if !log.finalized || !log.is_well_formed() {
            return Err(StoreError::Invalid(format!("session `{}` is not a finalized, well-formed log", log.session_id)));
        }
        if self.sessions.contains_key(&log.session_id) {
            return Err(StoreError::Lifecycle(format!("session `{}` already exists", log.session_id)));
        }
        if let Some(code) = &log.tracking_code {
            self.note_code(code, &log.session_id);
        }
        self.sessions.insert(log.session_id.clone(), log);
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    created_at: u64,
    difficulty: Difficulty,
    finalized: bool,
    consent: Option<Consent>,
    tracking_code: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Index {
    next_id: u64,
    sessions: BTreeMap<String, IndexEntry>,
}

/// Directory-backed store.
#[derive(Debug)]
pub struct FileStore {
    dir: PathBuf,
    mem: MemoryStore,
}

impl FileStore {
    /// Opens (or creates) a store rooted at `dir`, replaying existing logs.
    pub fn open(dir: impl AsRef<Path>) -> Result<FileStore, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(dir.join("sessions"))?;
        let index_path = dir.join("index.json");
        let index: Index = if index_path.exists() {
            serde_json::from_str(&fs::read_to_string(&index_path)?)
                .map_err(|e| StoreError::Corrupt(format!("index.json: {e}")))?
        } else {
            Index::default()
        };
        let mut mem = MemoryStore { next_id: index.next_id, ..MemoryStore::default() };
        for (id, entry) in index.sessions {
            let mut log = SessionLog::new(id.clone(), entry.difficulty, entry.created_at);
            log.finalized = entry.finalized;
            log.consent = entry.consent;
            log.tracking_code = entry.tracking_code;
            let path = dir.join("sessions").join(format!("{id}.ndjson"));
            if path.exists() {
                for (n, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
                    let line = line?;
                    let e: GameEvent = serde_json::from_str(&line)
                        .map_err(|err| StoreError::Corrupt(format!("{}:{}: {err}", path.display(), n + 1)))?;
                    log.events.push(e);
                }
            }
            if let Some(code) = &log.tracking_code {
                mem.note_code(code, &id);
            }
            mem.sessions.insert(id, log);
        }
        Ok(FileStore { dir, mem })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.dir.join("sessions").join(format!("{id}.ndjson"))
    }

    fn write_index(&self) -> Result<(), StoreError> {
        let index = Index {
            next_id: self.mem.next_id,
            sessions: self
                .mem
                .sessions
                .iter()
                .map(|(id, s)| {
                    let entry = IndexEntry {
                        created_at: s.created_at,
                        difficulty: s.difficulty,
                        finalized: s.finalized,
                        consent: s.consent,
                        tracking_code: s.tracking_code.clone(),
                    };
                    (id.clone(), entry)
                })
                .collect(),
        };
        let tmp = self.dir.join("index.json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&index).expect("index serializes"))?;
        fs::rename(tmp, self.dir.join("index.json"))?;
        Ok(())
    }

    fn append_line(&self, id: &str, event: &GameEvent) -> Result<(), StoreError> {
        let mut f = OpenOptions::new().create(true).append(true).open(self.log_path(id))?;
        let mut line = serde_json::to_string(event).expect("event serializes");
        line.push('\n');
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }
}

impl Store for FileStore {
    fn create_session(&mut self, difficulty: Difficulty, created_at: u64) -> Result<String, StoreError> {
        let id = self.mem.create_session(difficulty, created_at)?;
        self.write_index()?;
        Ok(id)
    }

    fn record_event(&mut self, event: GameEvent) -> Result<Recorded, StoreError> {
        let id = event.session_id.clone();
        let r = self.mem.record_event(event)?;
        if r == Recorded::Appended {
            let stored = self.mem.sessions[&id].events.last().expect("just appended").clone();
            self.append_line(&id, &stored)?;
        }
        Ok(r)
    }

    fn finalize(&mut self, session_id: &str, consent: Consent) -> Result<Finalized, StoreError> {
        let r = self.mem.finalize(session_id, consent)?;
        if r == Finalized::Withheld {
            let path = self.log_path(session_id);
            if path.exists() {
                fs::remove_file(path)?;
            }
        }
        self.write_index()?;
        Ok(r)
    }

    fn session(&self, session_id: &str) -> Result<&SessionLog, StoreError> {
        self.mem.session(session_id)
    }

    fn session_ids(&self) -> Vec<String> {
        self.mem.session_ids()
    }

    fn import(&mut self, log: SessionLog) -> Result<(), StoreError> {
        let id = log.session_id.clone();
        self.mem.import(log)?;
        let events = self.mem.sessions[&id].events.clone();
        for e in &events {
            self.append_line(&id, e)?;
        }
        self.write_index()
    }
}

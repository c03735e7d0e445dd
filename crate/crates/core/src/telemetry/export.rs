//! Session export format, `assess.events/v1`.
//!
//! One file per finalized session, named `<session_id>.ndjson`. The first
//! line is a header object; every following line is one event in seq order.
//! Objects are written compactly with fields in this fixed order:
//!
//! ```text
//! {"schema":"assess.events/v1","session_id":..,"created_at":..,"difficulty":..,"consent":..,"tracking_code":..,"event_count":..}
//! {"session_id":..,"seq":..,"timestamp_ms":..,"game_id":..,"stage_id":..,"event_type":..,"payload":{..}}
//! ```
//!
//! Payload keys appear in ascending order and each value is tagged, e.g.
//! `{"lane":{"int":3}}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::event::GameEvent;
use super::session::{Consent, Difficulty, SessionLog};
use super::store::{Store, StoreError};

pub const EXPORT_SCHEMA: &str = "assess.events/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    schema: String,
    session_id: String,
    created_at: u64,
    difficulty: Difficulty,
    consent: Option<Consent>,
    tracking_code: Option<String>,
    event_count: usize,
}

/// Serializes one session to its export text.
pub fn session_to_ndjson(log: &SessionLog) -> String {
    let header = Header {
        schema: EXPORT_SCHEMA.to_owned(),
        session_id: log.session_id.clone(),
        created_at: log.created_at,
        difficulty: log.difficulty,
        consent: log.consent,
        tracking_code: log.tracking_code.clone(),
        event_count: log.events.len(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for e in &log.events {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

pub fn session_from_ndjson(text: &str) -> Result<SessionLog, StoreError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| StoreError::Corrupt("empty export".into()))?;
    let header: Header =
        serde_json::from_str(first).map_err(|e| StoreError::Corrupt(format!("line 1: {e}")))?;
    if header.schema != EXPORT_SCHEMA {
        return Err(StoreError::Corrupt(format!("unsupported schema `{}`", header.schema)));
    }
    let mut events = Vec::with_capacity(header.event_count);
    for (n, line) in lines {
        let e: GameEvent =
            serde_json::from_str(line).map_err(|err| StoreError::Corrupt(format!("line {}: {err}", n + 1)))?;
        events.push(e);
    }
    if events.len() != header.event_count {
        return Err(StoreError::Corrupt(format!(
            "header announces {} events, found {}",
            header.event_count,
            events.len()
        )));
    }
    let log = SessionLog {
        session_id: header.session_id,
        created_at: header.created_at,
        difficulty: header.difficulty,
        finalized: header.consent == Some(Consent::Send),
        consent: header.consent,
        events,
        tracking_code: header.tracking_code,
    };
    if !log.is_well_formed() {
        return Err(StoreError::Corrupt(format!("session `{}` has gaps or foreign events", log.session_id)));
    }
    Ok(log)
}

/// Writes every finalized session accepted by `filter` into `dir`. Returns
/// the written paths in session order.
pub fn export_sessions(
    store: &dyn Store,
    dir: &Path,
    filter: impl Fn(&SessionLog) -> bool,
) -> Result<Vec<PathBuf>, StoreError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for id in store.session_ids() {
        let log = store.session(&id)?;
        if !log.finalized || !filter(log) {
            continue;
        }
        let path = dir.join(format!("{id}.ndjson"));
        fs::write(&path, session_to_ndjson(log))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes sessions held in memory (e.g. simulated cohorts) to `dir`.
pub fn write_sessions(logs: &[SessionLog], dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    fs::create_dir_all(dir)?;
    logs.iter()
        .map(|log| {
            let path = dir.join(format!("{}.ndjson", log.session_id));
            fs::write(&path, session_to_ndjson(log))?;
            Ok(path)
        })
        .collect()
}

/// Reads every `*.ndjson` export in `dir`, ordered by file name.
pub fn import_sessions(dir: &Path) -> Result<Vec<SessionLog>, StoreError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ndjson"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            session_from_ndjson(&text).map_err(|e| StoreError::Corrupt(format!("{}: {e}", p.display())))
        })
        .collect()
}

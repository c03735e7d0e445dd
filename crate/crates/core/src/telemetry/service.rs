//! Ingestion service: the request/response contract behind the HTTP API.

use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use super::event::{GameEvent, GameId};
use super::session::{Consent, Difficulty};
use super::store::{Finalized, Recorded, Store, StoreError};
use crate::levels::LevelPack;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub difficulty: Difficulty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// Position in the posted batch.
    pub index: usize,
    pub seq: Option<u64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventsAck {
    /// Highest seq stored for the session after this batch.
    pub last_accepted_seq: Option<u64>,
    pub appended: usize,
    pub duplicates: usize,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalizeRequest {
    pub consent: Consent,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session `{0}`")]
    NotFound(String),
    #[error("{0}")]
    Lifecycle(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) => ServiceError::NotFound(id),
            StoreError::Lifecycle(_) => ServiceError::Lifecycle(e.to_string()),
            StoreError::Sequence { .. } | StoreError::Conflict { .. } | StoreError::Invalid(_) => {
                ServiceError::BadRequest(e.to_string())
            }
            StoreError::Io(_) | StoreError::Corrupt(_) => ServiceError::Internal(e.to_string()),
        }
    }
}

/// Shared service state. Store access is serialized, which also makes
/// event application single-writer per session.
pub struct Service {
    store: Mutex<Box<dyn Store>>,
    levels: LevelPack,
    clock: Box<dyn Fn() -> u64 + Send + Sync>,
}

impl Service {
    pub fn new(store: Box<dyn Store>, levels: LevelPack) -> Self {
        Service::with_clock(store, levels, Box::new(unix_ms))
    }

    /// Uses `clock` for session creation times (tests pin it).
    pub fn with_clock(store: Box<dyn Store>, levels: LevelPack, clock: Box<dyn Fn() -> u64 + Send + Sync>) -> Self {
        Service { store: Mutex::new(store), levels, clock }
    }

    pub fn shared(self) -> Arc<Service> {
        Arc::new(self)
    }

    pub fn store(&self) -> MutexGuard<'_, Box<dyn Store>> {
        self.store.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn create_session(&self, req: CreateSession) -> Result<SessionCreated, ServiceError> {
        let now = (self.clock)();
        let session_id = self.store().create_session(req.difficulty, now)?;
        Ok(SessionCreated { session_id })
    }

    /// Applies a batch in order. Items that fail to parse or are rejected by
    /// the store are reported individually and the batch continues.
    pub fn post_events(&self, session_id: &str, batch: Vec<serde_json::Value>) -> Result<EventsAck, ServiceError> {
        let mut store = self.store();
        let log = store.session(session_id)?;
        if log.finalized {
            return Err(ServiceError::Lifecycle(format!("session `{session_id}` is finalized")));
        }
        let mut ack = EventsAck { last_accepted_seq: None, appended: 0, duplicates: 0, rejections: Vec::new() };
        for (index, raw) in batch.into_iter().enumerate() {
            let seq = raw.get("seq").and_then(serde_json::Value::as_u64);
            let event: GameEvent = match serde_json::from_value(raw) {
                Ok(e) => e,
                Err(e) => {
                    ack.rejections.push(Rejection { index, seq, error: format!("malformed event: {e}") });
                    continue;
                }
            };
            if event.session_id != session_id {
                ack.rejections.push(Rejection {
                    index,
                    seq,
                    error: format!("event belongs to session `{}`", event.session_id),
                });
                continue;
            }
            match store.record_event(event) {
                Ok(Recorded::Appended) => ack.appended += 1,
                Ok(Recorded::Duplicate) => ack.duplicates += 1,
                Err(StoreError::Io(e)) => return Err(ServiceError::Internal(e.to_string())),
                Err(e) => ack.rejections.push(Rejection { index, seq, error: e.to_string() }),
            }
        }
        ack.last_accepted_seq = store.session(session_id)?.next_seq().checked_sub(1);
        Ok(ack)
    }

    pub fn finalize(&self, session_id: &str, req: FinalizeRequest) -> Result<Finalized, ServiceError> {
        Ok(self.store().finalize(session_id, req.consent)?)
    }

    pub fn levels(&self, game: GameId) -> serde_json::Value {
        self.levels.slice_json(game)
    }
}

fn unix_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

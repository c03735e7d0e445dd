//! Event schema, tracking codes, session storage and the ingestion service.

pub mod canonical;
pub mod event;
pub mod export;
pub mod http;
pub mod service;
pub mod session;
pub mod store;

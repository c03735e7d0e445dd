//! HTTP binding of [`Service`].
//!
//! | method | path                          | body                    | response                 |
//! |--------|-------------------------------|-------------------------|--------------------------|
//! | POST   | `/v1/sessions`                | `{"difficulty":..}`     | `{"session_id":..}`      |
//! | POST   | `/v1/sessions/{id}/events`    | `{"events":[GameEvent]}`| [`EventsAck`]            |
//! | POST   | `/v1/sessions/{id}/finalize`  | `{"consent":..}`        | `{"status":"sent","tracking_code":..}` or `{"status":"withheld"}` |
//! | GET    | `/v1/levels/{game_id}`        |                         | level pack slice         |
//!
//! Errors are `{"error": message}` with 404 for unknown sessions, 409 for
//! lifecycle violations and 400 for malformed requests.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use super::event::GameId;
use super::service::{CreateSession, FinalizeRequest, Service, ServiceError};

#[derive(Debug, Deserialize)]
struct EventBatch {
    events: Vec<serde_json::Value>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Lifecycle(_) => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

async fn create_session(
    State(svc): State<Arc<Service>>,
    Json(req): Json<CreateSession>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok((StatusCode::CREATED, Json(svc.create_session(req)?)))
}

async fn post_events(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Json(batch): Json<EventBatch>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(svc.post_events(&id, batch.events)?))
}

async fn finalize(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Json(req): Json<FinalizeRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(svc.finalize(&id, req)?))
}

async fn levels(State(svc): State<Arc<Service>>, Path(game): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    let game: GameId = game.parse().map_err(ServiceError::NotFound)?;
    Ok(Json(svc.levels(game)))
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/:id/events", post(post_events))
        .route("/v1/sessions/:id/finalize", post(finalize))
        .route("/v1/levels/:game", get(levels))
        .with_state(svc)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, svc: Arc<Service>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(svc)).await
}

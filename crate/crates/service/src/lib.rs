//! HTTP service for stepwise elicitation: load a model, add and retract
//! statements, and watch the intervals of missing probabilities tighten.
//!
//! Routes:
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create from `{"model": …, "watch"?: […]}` |
//! | GET | `/sessions/{id}/structure` | structure, statements, consistency |
//! | POST | `/sessions/{id}/statements` | apply one statement |
//! | DELETE | `/sessions/{id}/statements/{sid}` | retract a statement |
//! | POST | `/sessions/{id}/intervals` | `{"queries": [{"query", "given"?}]}` |
//! | GET | `/sessions/{id}/history` | applied and retracted statements |

pub mod api;
pub mod error;
pub mod session;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use probint_core::model::StatementDocument;
use serde::de::DeserializeOwned;
use tokio::net::TcpListener;

use crate::api::{CreateSession, HistoryView, IntervalsRequest, IntervalsView, MutationView, SessionView};
use crate::error::ApiError;
use crate::session::{Snapshot, Store};

pub use error::ApiError as Error;
pub use session::Store as SessionStore;

type Shared = Arc<Store>;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/structure", get(structure))
        .route("/sessions/{id}/statements", post(apply_statement))
        .route("/sessions/{id}/statements/{sid}", delete(retract_statement))
        .route("/sessions/{id}/intervals", post(query_intervals))
        .route("/sessions/{id}/history", get(history))
        .with_state(store)
}

/// Serves on an already bound listener until the process is stopped.
pub async fn serve(listener: TcpListener, store: Store) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(store))).await
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("malformed request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Task(e.to_string()))?
}

async fn create_session(State(store): State<Shared>, body: Bytes) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let request: CreateSession = parse_body(&body)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let snapshot = blocking(move || session::create(id, request.model, request.watch))
        .await
        .map_err(|e| match e {
            ApiError::Model(_) | ApiError::Locality { .. } => ApiError::BadRequest(e.to_string()),
            e => e,
        })?;
    let snapshot = store.insert(snapshot)?;
    Ok((StatusCode::CREATED, Json(snapshot.view())))
}

async fn structure(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(store.get(&id)?.current().view()))
}

async fn mutate(
    store: Shared,
    id: &str,
    change: impl FnOnce(&Snapshot) -> Result<(Snapshot, u64), ApiError> + Send + 'static,
) -> Result<MutationView, ApiError> {
    let entry = store.get(id)?;
    let _guard = entry.write.lock().await;
    let current = entry.current();
    let (next, sid) = blocking(move || change(&current)).await?;
    store.persist(&next)?;
    let next = entry.replace(next);
    Ok(MutationView {
        revision: next.revision(),
        statement_id: sid,
        consistency: next.consistency_view(),
        watched: next.watched.clone(),
    })
}

async fn apply_statement(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<MutationView>), ApiError> {
    let statement: StatementDocument = parse_body(&body)?;
    let view = mutate(store, &id, move |s| s.apply(statement)).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn retract_statement(
    State(store): State<Shared>,
    Path((id, sid)): Path<(String, u64)>,
) -> Result<Json<MutationView>, ApiError> {
    Ok(Json(mutate(store, &id, move |s| Ok((s.retract(sid)?, sid))).await?))
}

async fn query_intervals(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<IntervalsView>, ApiError> {
    let request: IntervalsRequest = parse_body(&body)?;
    let snapshot = store.get(&id)?.current();
    let revision = snapshot.revision();
    let results = blocking(move || snapshot.intervals(&request.queries)).await?;
    Ok(Json(IntervalsView { revision, results }))
}

async fn history(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<HistoryView>, ApiError> {
    let snapshot = store.get(&id)?.current();
    Ok(Json(HistoryView {
        revision: snapshot.revision(),
        events: snapshot.persisted.history.clone(),
    }))
}

//! HTTP front end: `POST /retrieve` takes a [`RetrieveRequestMessage`] and
//! answers with a [`toolseek::RetrieveResponseMessage`]; `GET /health`
//! reports the loaded catalog.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use toolseek::{retrieve, RetrieveRequestMessage, RoutingConfig, RoutingError, API_SCHEMA_VERSION};

use crate::Loaded;

pub struct AppState {
    pub loaded: Loaded,
    pub routing: RoutingConfig,
}

impl AppState {
    pub fn new(loaded: Loaded, routing: RoutingConfig) -> Self {
        Self { loaded, routing }
    }
}

#[derive(Debug, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub schema_version: u32,
    pub catalog_fingerprint: String,
    pub provider_id: String,
    pub servers: usize,
    pub tools: usize,
    pub index_entries: usize,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/retrieve", post(retrieve_handler))
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    let l = &state.loaded;
    Json(Health {
        status: "ok",
        schema_version: API_SCHEMA_VERSION,
        catalog_fingerprint: l.catalog.fingerprint().to_string(),
        provider_id: l.index.provider_id().to_string(),
        servers: l.catalog.server_count(),
        tools: l.catalog.total_tools(),
        index_entries: l.index.entry_count(),
    })
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn retrieve_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    if body.iter().all(u8::is_ascii_whitespace) {
        return error(
            StatusCode::BAD_REQUEST,
            "request body is empty; expected a JSON object with fields `server` and `tool`",
        );
    }
    let message: RetrieveRequestMessage = match serde_json::from_slice(&body) {
        Ok(m) => m,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let outcome = tokio::task::spawn_blocking(move || {
        let l = &state.loaded;
        retrieve(&message, &l.catalog, &l.index, &state.routing, l.provider.as_ref())
    })
    .await;
    match outcome {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(RoutingError::EmptyRequestField(field))) => {
            error(StatusCode::BAD_REQUEST, format!("field `{field}` is empty"))
        }
        Ok(Err(e @ RoutingError::InvalidConfig(_))) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("retrieval task failed: {e}")),
    }
}

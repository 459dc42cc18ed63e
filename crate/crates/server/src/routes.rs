use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gazego_core::api::{AssessResponse, ClosedSession, CreateSessionRequest, ErrorBody, FramesResponse, SessionInfo};
use gazego_core::assessor::assess;
use gazego_core::goban::to_sgf;
use gazego_core::pipeline::log_to_jsonl;
use gazego_core::{EvalSample, Session};

use crate::{ws, AppState, Entry, SharedEntry};

pub(crate) enum ApiError {
    NotFound(String),
    BadRequest(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error) = match self {
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, format!("no session `{id}`")),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
        };
        (status, Json(ErrorBody { error })).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/ws", get(ws::upgrade))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session).delete(close_session))
        .route("/api/sessions/{id}/frames", post(post_frame))
        .route("/api/sessions/{id}/log", get(get_log))
        .route("/api/assess", post(assess_sample))
        .with_state(state)
}

pub(crate) fn new_session(state: &AppState, req: &CreateSessionRequest) -> Result<SharedEntry, ApiError> {
    let mut cfg = state.config.defaults.clone();
    if let Some(mode) = req.mode {
        cfg.mode = mode;
    }
    if let Some(color) = req.human_color {
        cfg.human_color = color;
    }
    if let Some(size) = req.board_size {
        cfg.board_size = size;
    }
    if let Some(seed) = req.seed {
        cfg.seed = seed;
    }
    if let Some(snr) = req.snr_db {
        cfg.synth.snr_db = snr;
    }
    if let Some(playouts) = req.playouts {
        cfg.engine.playouts = playouts;
    }
    if cfg.engine.playouts > state.config.max_playouts {
        return Err(ApiError::BadRequest(format!("playouts above the server cap of {}", state.config.max_playouts)));
    }
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(id, cfg).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    Ok(state.insert(session))
}

pub(crate) fn snapshot(entry: &Entry) -> SessionInfo {
    let s = &entry.session;
    SessionInfo { session_id: s.id().to_string(), phase: s.phase(), frames: vec![s.hello(), s.board_state()] }
}

fn lookup(state: &AppState, id: &str) -> Result<SharedEntry, ApiError> {
    state.get(id).ok_or_else(|| ApiError::NotFound(id.to_string()))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Option<Json<CreateSessionRequest>>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let req = body.map(|Json(r)| r).unwrap_or_default();
    let entry = new_session(&state, &req)?;
    let info = snapshot(&*entry.lock().await);
    Ok((StatusCode::CREATED, Json(info)))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionInfo>, ApiError> {
    let entry = lookup(&state, &id)?;
    let info = snapshot(&*entry.lock().await);
    Ok(Json(info))
}

/// Body is one protocol frame as JSON text. Protocol-level problems come
/// back as `error` frames with status 200.
async fn post_frame(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: String,
) -> Result<Json<FramesResponse>, ApiError> {
    let entry = lookup(&state, &id)?;
    let frames = handle_blocking(entry, body).await;
    Ok(Json(FramesResponse { frames }))
}

/// Runs one message on the blocking pool while holding the session lock.
pub(crate) async fn handle_blocking(entry: SharedEntry, text: String) -> Vec<gazego_core::Frame> {
    let mut guard = entry.lock_owned().await;
    tokio::task::spawn_blocking(move || guard.handle_text(&text)).await.expect("session handler panicked")
}

async fn get_log(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<String, ApiError> {
    let entry = lookup(&state, &id)?;
    let log = log_to_jsonl(&entry.lock().await.log);
    Ok(log)
}

async fn close_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<ClosedSession>, ApiError> {
    let entry = state.remove(&id).ok_or_else(|| ApiError::NotFound(id.clone()))?;
    let record = entry.lock().await.session.close_session();
    Ok(Json(ClosedSession {
        session_id: id,
        result: record.result.clone().unwrap_or_default(),
        sgf: to_sgf(&record),
    }))
}

async fn assess_sample(State(state): State<Arc<AppState>>, Json(sample): Json<EvalSample>) -> Result<Json<AssessResponse>, ApiError> {
    if !(sample.black_winrate.is_finite() && (0.0..=1.0).contains(&sample.black_winrate)) {
        return Err(ApiError::BadRequest("black_winrate must lie in [0, 1]".into()));
    }
    let a = assess(&sample, &state.config.defaults.assessor);
    Ok(Json(AssessResponse {
        label: a.label,
        memberships: a.memberships.iter().map(|(l, m)| (l.as_str().to_string(), *m)).collect(),
    }))
}

//! JSON-over-HTTP API.
//!
//! | method | path | body / query | response |
//! |---|---|---|---|
//! | POST | `/sessions` | multipart `nodes`, `edges`?, `config`? | [`SessionHandle`] |
//! | GET | `/sessions/{id}` | | [`SessionView`] |
//! | DELETE | `/sessions/{id}` | | 204 |
//! | POST | `/sessions/{id}/ops` | one `SculptOp` | [`Updated`] |
//! | POST | `/sessions/{id}/undo`, `/redo` | | [`Updated`] |
//! | POST | `/sessions/{id}/goto` | `{"cursor": n}` | [`Updated`] |
//! | GET | `/sessions/{id}/log` | | [`LogView`] |
//! | GET | `/sessions/{id}/save` | | `SessionLog` JSON |
//! | GET | `/sessions/{id}/substrates/{sid}/layout` | `w`, `h` | `GridLayout` |
//! | GET | `/sessions/{id}/substrates/{sid}/highlight` | `w`, `h`, `key` (FacetKey JSON) | `HoverHighlight` |
//! | GET | `/sessions/{id}/substrates/{sid}/histogram` | `attr` | `[{category, count}]` |
//! | GET | `/sessions/{id}/substrates/{sid}/export` | | CSV |
//!
//! Errors are `{"error": {"code", "message"}}` with status 400 (bad request),
//! 404 (unknown session or substrate) or 409 (precondition failed).

use std::path::PathBuf;
use std::sync::Arc;

use aqs_core::ingest::IngestOptions;
use aqs_core::model::SubstrateSummary;
use aqs_core::{
    hover_highlight_model, ingest_readers, Error, FacetKey, SculptOp, Session, SubstrateId,
};
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::OwnedMutexGuard;
use tower_http::services::ServeDir;

use crate::store::{SessionHandle, SessionStore};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_sessions: usize,
    pub max_upload_bytes: usize,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_sessions: 32,
            max_upload_bytes: 1 << 30,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_owned(),
            message: message.into(),
        }
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("unknown session {id}"))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownSubstrate(_) => StatusCode::NOT_FOUND,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            e if e.is_precondition() => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCursor {
    pub cursor: usize,
    pub length: usize,
    pub can_undo: bool,
    pub can_redo: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    #[serde(flatten)]
    pub handle: SessionHandle,
    pub substrates: Vec<SubstrateSummary>,
    pub log: LogCursor,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Updated {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<SubstrateId>,
    pub substrates: Vec<SubstrateSummary>,
    pub log: LogCursor,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub index: usize,
    pub description: String,
    pub op: SculptOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogView {
    pub cursor: usize,
    pub entries: Vec<LogEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: String,
    pub count: usize,
}

fn cursor_of(s: &Session) -> LogCursor {
    let log = s.log();
    LogCursor {
        cursor: log.cursor,
        length: log.entries.len(),
        can_undo: log.can_undo(),
        can_redo: log.can_redo(),
    }
}

fn updated(s: &Session, created: Option<SubstrateId>) -> Updated {
    Updated {
        created,
        substrates: s.substrates().iter().map(|x| x.summary()).collect(),
        log: cursor_of(s),
        digest: s.digest(),
    }
}

pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let sub = "/sessions/{id}/substrates/{sid}";
    let mut app = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/ops", post(apply_op))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/redo", post(redo))
        .route("/sessions/{id}/goto", post(goto))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/save", get(save))
        .route(&format!("{sub}/layout"), get(layout))
        .route(&format!("{sub}/highlight"), get(highlight))
        .route(&format!("{sub}/histogram"), get(histogram))
        .route(&format!("{sub}/export"), get(export))
        .layer(DefaultBodyLimit::max(config.max_upload_bytes))
        .with_state(state);
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app
}

pub fn app(config: &ServiceConfig) -> Router {
    let state = AppState {
        store: Arc::new(SessionStore::new(config.max_sessions)),
    };
    router(state, config)
}

async fn lock(state: &AppState, id: &str) -> ApiResult<OwnedMutexGuard<Session>> {
    let entry = state.store.get(id).ok_or_else(|| ApiError::unknown_session(id))?;
    Ok(entry.session.clone().lock_owned().await)
}

/// Runs `f` on the locked session off the async executor.
async fn with_session<T, F>(state: &AppState, id: &str, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> ApiResult<T> + Send + 'static,
{
    let mut guard = lock(state, id).await?;
    tokio::task::spawn_blocking(move || f(&mut guard))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn create_session(
    State(state): State<AppState>,
    mut multipart: Multipart,
) -> ApiResult<(StatusCode, Json<SessionHandle>)> {
    let mut nodes = None;
    let mut edges = None;
    let mut options = IngestOptions::default();
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request("invalid_upload", e.body_text()))?
    {
        let name = field.name().unwrap_or_default().to_owned();
        let bytes = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request("invalid_upload", e.body_text()))?;
        match name.as_str() {
            "nodes" => nodes = Some(bytes),
            "edges" => edges = Some(bytes),
            "config" => {
                options = serde_json::from_slice(&bytes)
                    .map_err(|e| ApiError::bad_request("invalid_config", e.to_string()))?
            }
            other => {
                return Err(ApiError::bad_request(
                    "invalid_upload",
                    format!("unexpected field `{other}`"),
                ))
            }
        }
    }
    let nodes = nodes.ok_or_else(|| ApiError::bad_request("invalid_upload", "missing `nodes` file"))?;
    let dataset = tokio::task::spawn_blocking(move || {
        ingest_readers(nodes.as_ref(), edges.as_deref(), &options)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let entry = state.store.insert(Session::new(Arc::new(dataset)));
    Ok((StatusCode::CREATED, Json(entry.handle.clone())))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let entry = state.store.get(&id).ok_or_else(|| ApiError::unknown_session(&id))?;
    let s = entry.session.lock().await;
    Ok(Json(SessionView {
        handle: entry.handle.clone(),
        substrates: s.substrates().iter().map(|x| x.summary()).collect(),
        log: cursor_of(&s),
        digest: s.digest(),
    }))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if state.store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::unknown_session(&id))
    }
}

async fn apply_op(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> ApiResult<Json<Updated>> {
    let op: SculptOp =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("invalid_op", e.to_string()))?;
    with_session(&state, &id, move |s| {
        let applied = s.apply(op)?;
        Ok(Json(updated(s, applied.created)))
    })
    .await
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Updated>> {
    with_session(&state, &id, |s| {
        s.undo()?;
        Ok(Json(updated(s, None)))
    })
    .await
}

async fn redo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Updated>> {
    with_session(&state, &id, |s| {
        s.redo()?;
        Ok(Json(updated(s, None)))
    })
    .await
}

#[derive(Deserialize)]
struct GotoBody {
    cursor: usize,
}

async fn goto(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> ApiResult<Json<Updated>> {
    let GotoBody { cursor } =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("invalid_parameter", e.to_string()))?;
    with_session(&state, &id, move |s| {
        s.goto(cursor)?;
        Ok(Json(updated(s, None)))
    })
    .await
}

async fn log(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<LogView>> {
    let s = lock(&state, &id).await?;
    let log = s.log();
    Ok(Json(LogView {
        cursor: log.cursor,
        entries: log
            .entries
            .iter()
            .enumerate()
            .map(|(index, op)| LogEntry {
                index,
                description: op.kind.describe(),
                op: op.clone(),
            })
            .collect(),
    }))
}

async fn save(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let s = lock(&state, &id).await?;
    let body = serde_json::to_vec_pretty(&s.to_log()).map_err(Error::from)?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/json"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"session.json\""),
        ],
        body,
    )
        .into_response())
}

#[derive(Deserialize)]
struct Canvas {
    w: Option<f64>,
    h: Option<f64>,
    key: Option<String>,
}

const DEFAULT_WIDTH: f64 = 1200.0;
const DEFAULT_HEIGHT: f64 = 800.0;

async fn layout(
    State(state): State<AppState>,
    Path((id, sid)): Path<(String, u32)>,
    Query(q): Query<Canvas>,
) -> ApiResult<Json<aqs_core::GridLayout>> {
    let (w, h) = (q.w.unwrap_or(DEFAULT_WIDTH), q.h.unwrap_or(DEFAULT_HEIGHT));
    with_session(&state, &id, move |s| Ok(Json(s.layout(SubstrateId(sid), w, h)?))).await
}

async fn highlight(
    State(state): State<AppState>,
    Path((id, sid)): Path<(String, u32)>,
    Query(q): Query<Canvas>,
) -> ApiResult<Json<aqs_core::HoverHighlight>> {
    let (w, h) = (q.w.unwrap_or(DEFAULT_WIDTH), q.h.unwrap_or(DEFAULT_HEIGHT));
    let raw = q.key.ok_or_else(|| ApiError::bad_request("invalid_parameter", "missing `key`"))?;
    let key: FacetKey =
        serde_json::from_str(&raw).map_err(|e| ApiError::bad_request("invalid_parameter", e.to_string()))?;
    with_session(&state, &id, move |s| {
        let layout = s.layout(SubstrateId(sid), w, h)?;
        Ok(Json(hover_highlight_model(&layout, &key)?))
    })
    .await
}

#[derive(Deserialize)]
struct AttrQuery {
    attr: String,
}

async fn histogram(
    State(state): State<AppState>,
    Path((id, sid)): Path<(String, u32)>,
    Query(q): Query<AttrQuery>,
) -> ApiResult<Json<Vec<CategoryCount>>> {
    with_session(&state, &id, move |s| {
        let counts = s.histogram(SubstrateId(sid), &q.attr)?;
        Ok(Json(
            counts
                .into_iter()
                .map(|(category, count)| CategoryCount { category, count })
                .collect(),
        ))
    })
    .await
}

async fn export(
    State(state): State<AppState>,
    Path((id, sid)): Path<(String, u32)>,
) -> ApiResult<Response> {
    let body = with_session(&state, &id, move |s| Ok(s.export_csv(SubstrateId(sid))?)).await?;
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"substrate.csv\""),
        ],
        body,
    )
        .into_response())
}

//! HTTP and WebSocket routes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pedsim_core::agents::Role;
use pedsim_core::recorder::{SceneHeader, SCENE_EXT};
use pedsim_core::scenarios::{builtin_scenario, BUILTIN_IDS};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::actor::{spawn_session, ActorError, SessionHandle};
use crate::messages::{Event, ServerMessage};
use crate::session::{load_session_scenario, SessionCore, SessionError};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub out_dir: PathBuf,
    /// Used when a create request names no scenario.
    pub scenario: String,
    /// Used when a create request carries no seed.
    pub seed: u64,
    pub tick: Duration,
    /// Web client files; a placeholder page is served without them.
    pub static_dir: Option<PathBuf>,
}

impl ServerConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            scenario: "jaywalk".into(),
            seed: 0,
            tick: Duration::from_millis(50),
            static_dir: None,
        }
    }
}

pub struct AppState {
    cfg: ServerConfig,
    sessions: Mutex<BTreeMap<String, SessionHandle>>,
    next: AtomicU64,
}

type Shared = Arc<AppState>;

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let code = match &e {
            SessionError::UnknownScenario(_) | SessionError::UnknownConnection(_) => StatusCode::NOT_FOUND,
            SessionError::Run(_) => StatusCode::INTERNAL_SERVER_ERROR,
            SessionError::RoleNotOffered(_) | SessionError::RoleMismatch { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::CONFLICT,
        };
        ApiError(code, e.to_string())
    }
}

impl From<ActorError> for ApiError {
    fn from(e: ActorError) -> Self {
        match e {
            ActorError::Session(s) => s.into(),
            ActorError::Gone => ApiError(StatusCode::GONE, e.to_string()),
        }
    }
}

pub fn router(cfg: ServerConfig) -> Router {
    let static_dir = cfg.static_dir.clone();
    let state = Arc::new(AppState {
        cfg,
        sessions: Mutex::new(BTreeMap::new()),
        next: AtomicU64::new(1),
    });
    let api = Router::new()
        .route("/scenarios", get(scenarios))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_status))
        .route("/sessions/{id}/start", post(start_session))
        .route("/sessions/{id}/stop", post(stop_session))
        .route("/scenes", get(scene_index))
        .route("/scenes/{name}", get(scene_file))
        .route("/ws/{id}", get(ws_upgrade))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(placeholder)),
    }
}

async fn placeholder() -> Html<&'static str> {
    Html(
        "<!doctype html><title>pedsim</title><p>No web client installed. \
         API: GET /scenarios, POST /sessions, POST /sessions/{id}/start, GET /scenes, WS /ws/{id}?role=</p>",
    )
}

#[derive(Serialize)]
struct ScenarioEntry {
    id: &'static str,
    roles: Vec<Role>,
}

async fn scenarios() -> Result<Json<Vec<ScenarioEntry>>, ApiError> {
    let mut out = Vec::new();
    for id in BUILTIN_IDS {
        let spec = builtin_scenario(id, 0).map_err(|e| SessionError::Run(e.into()))?;
        let core = SessionCore::new("probe", spec, PathBuf::new())?;
        out.push(ScenarioEntry {
            id,
            roles: core.roles().to_vec(),
        });
    }
    Ok(Json(out))
}

#[derive(Deserialize, Default)]
struct CreateSession {
    scenario: Option<String>,
    seed: Option<u64>,
}

fn handle_of(state: &AppState, id: &str) -> Result<SessionHandle, ApiError> {
    state
        .sessions
        .lock()
        .expect("session table lock")
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown session {id:?}")))
}

async fn create_session(
    State(state): State<Shared>,
    headers: HeaderMap,
    body: Option<Json<CreateSession>>,
) -> Result<impl IntoResponse, ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let scenario = req.scenario.unwrap_or_else(|| state.cfg.scenario.clone());
    let seed = req.seed.unwrap_or(state.cfg.seed);
    let spec = load_session_scenario(&scenario, seed)?;
    let id = format!("s{}", state.next.fetch_add(1, Ordering::Relaxed));
    let core = SessionCore::new(id.clone(), spec, state.cfg.out_dir.clone())?;
    let roles = core.roles().to_vec();
    let handle = spawn_session(core, state.cfg.tick);
    state.sessions.lock().expect("session table lock").insert(id.clone(), handle);
    let ws_url = match headers.get(header::HOST).and_then(|h| h.to_str().ok()) {
        Some(host) => format!("ws://{host}/ws/{id}"),
        None => format!("/ws/{id}"),
    };
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": id, "ws_url": ws_url, "roles": roles })),
    ))
}

async fn session_status(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(handle_of(&state, &id)?.status().await?))
}

async fn start_session(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(handle_of(&state, &id)?.start().await?))
}

async fn stop_session(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(handle_of(&state, &id)?.stop().await?))
}

#[derive(Serialize)]
struct SceneEntry {
    name: String,
    scenario: String,
    seed: u64,
    rate_hz: u32,
    frames: u64,
    duration_s: f64,
    truncated: bool,
}

fn read_header(path: &Path) -> Option<SceneHeader> {
    let text = fs::read_to_string(path).ok()?;
    serde_json::from_str(text.lines().next()?).ok()
}

async fn scene_index(State(state): State<Shared>) -> Result<impl IntoResponse, ApiError> {
    let mut out = Vec::new();
    let entries = match fs::read_dir(&state.cfg.out_dir) {
        Ok(e) => e,
        Err(_) => return Ok(Json(out)),
    };
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if !name.ends_with(SCENE_EXT) {
            continue;
        }
        if let Some(h) = read_header(&entry.path()) {
            out.push(SceneEntry {
                duration_s: h.duration_s(),
                name,
                scenario: h.scenario,
                seed: h.seed,
                rate_hz: h.rate_hz,
                frames: h.frames,
                truncated: h.truncated,
            });
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Json(out))
}

async fn scene_file(State(state): State<Shared>, UrlPath(name): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let plain = !name.is_empty() && !name.starts_with('.') && !name.contains(['/', '\\']) && !name.contains("..");
    if !plain || !name.ends_with(SCENE_EXT) {
        return Err(ApiError(StatusCode::NOT_FOUND, format!("no scene {name:?}")));
    }
    let bytes = fs::read(state.cfg.out_dir.join(&name))
        .map_err(|_| ApiError(StatusCode::NOT_FOUND, format!("no scene {name:?}")))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], bytes))
}

#[derive(Deserialize)]
struct WsQuery {
    role: Option<String>,
}

async fn ws_upgrade(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<WsQuery>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let handle = handle_of(&state, &id)?;
    let role: Role = q
        .role
        .as_deref()
        .unwrap_or("observer")
        .parse()
        .map_err(|e: pedsim_core::agents::InputError| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    Ok(ws.on_upgrade(move |socket| connection(socket, handle, role)))
}

async fn connection(mut socket: WebSocket, handle: SessionHandle, role: Role) {
    let (conn, mut outbox) = match handle.connect(role).await {
        Ok(c) => c,
        Err(e) => {
            let msg = ServerMessage::Event(Event::Error { message: e.to_string() });
            let _ = socket.send(Message::Text(msg.to_text().into())).await;
            let _ = socket.send(Message::Close(None)).await;
            return;
        }
    };
    loop {
        tokio::select! {
            out = outbox.recv() => match out {
                Some(text) => {
                    if socket.send(Message::Text(text.as_ref().into())).await.is_err() {
                        break;
                    }
                }
                // dropped by the session (backlog or finish)
                None => {
                    let _ = socket.send(Message::Close(None)).await;
                    break;
                }
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => handle.input(conn, text.to_string()),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    handle.disconnect(conn);
}

//! HTTP endpoints and the per-session WebSocket.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use teachkit_core::session::PROTOCOL;

use crate::engine::{Created, Engine, SessionRequest, Status};
use crate::error::ServeError;
use crate::protocol::{ClientMsg, ServerMsg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ServeConfig {
    /// Fixed parking tick. Each tick applies the client's latest action;
    /// `None` steps once per client action. Writing is always stepped per
    /// client event.
    pub tick_ms: Option<u64>,
}

#[derive(Clone)]
struct AppState {
    engine: Arc<Engine>,
    config: ServeConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyBody {
    pub ratings: Vec<u8>,
    #[serde(default)]
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub protocol: u32,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finalized {
    pub protocol: u32,
    pub log_path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub protocol: u32,
    pub error: String,
}

impl IntoResponse for ServeError {
    fn into_response(self) -> Response {
        let code = match &self {
            ServeError::UnknownSetting(_)
            | ServeError::UnknownEnv(_)
            | ServeError::InvalidUsername(_)
            | ServeError::Rating(_)
            | ServeError::Config(_) => StatusCode::BAD_REQUEST,
            ServeError::NoSession(_) => StatusCode::NOT_FOUND,
            ServeError::DuplicateSession(_)
            | ServeError::SessionExists(_)
            | ServeError::WrongPhase { .. }
            | ServeError::AlreadyFinalized(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorBody {
            protocol: PROTOCOL,
            error: self.to_string(),
        };
        (code, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ServeError>;

pub fn router(engine: Arc<Engine>, config: ServeConfig) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(status))
        .route("/sessions/{id}/survey", post(survey))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/ws", get(ws))
        .with_state(AppState { engine, config })
}

/// Serves `router` on `listener` until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, router: Router) -> std::io::Result<()> {
    axum::serve(listener, router).await
}

async fn create(State(st): State<AppState>, Json(req): Json<SessionRequest>) -> ApiResult<Created> {
    let engine = st.engine.clone();
    let created = tokio::task::spawn_blocking(move || engine.create_session(&req))
        .await
        .map_err(|e| ServeError::Config(format!("session setup panicked: {e}")))??;
    Ok(Json(created))
}

async fn status(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Status> {
    Ok(Json(st.engine.status(&id)?))
}

async fn survey(State(st): State<AppState>, Path(id): Path<String>, Json(body): Json<SurveyBody>) -> ApiResult<Ack> {
    st.engine.submit_survey(&id, &body.ratings, &body.text)?;
    Ok(Json(Ack {
        protocol: PROTOCOL,
        ok: true,
    }))
}

async fn finalize(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Finalized> {
    let path = st.engine.finalize(&id)?;
    Ok(Json(Finalized {
        protocol: PROTOCOL,
        log_path: path.display().to_string(),
    }))
}

async fn ws(State(st): State<AppState>, Path(id): Path<String>, up: WebSocketUpgrade) -> Result<Response, ServeError> {
    let resume = st.engine.resume(&id)?;
    let parking = st.engine.status(&id)?.env == "parking";
    let tick = st.config.tick_ms.filter(|_| parking).map(Duration::from_millis);
    Ok(up.on_upgrade(move |socket| run_socket(socket, st.engine, id, resume, tick)))
}

async fn send_all(socket: &mut WebSocket, msgs: Vec<ServerMsg>, tick: Option<Duration>) -> bool {
    for m in msgs {
        if m.is_playback() {
            if let Some(t) = tick {
                tokio::time::sleep(t).await;
            }
        }
        let text = serde_json::to_string(&m).expect("server messages serialize");
        if socket.send(Message::Text(text.into())).await.is_err() {
            return false;
        }
    }
    true
}

fn error_msg(e: ServeError) -> Vec<ServerMsg> {
    vec![ServerMsg::Error {
        protocol: PROTOCOL,
        message: e.to_string(),
    }]
}

async fn run_socket(mut socket: WebSocket, engine: Arc<Engine>, id: String, resume: Vec<ServerMsg>, tick: Option<Duration>) {
    if !send_all(&mut socket, resume, tick).await {
        return;
    }
    let mut held: Option<Vec<f64>> = None;
    let mut interval = tick.map(tokio::time::interval);
    loop {
        let out = tokio::select! {
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t.to_string(),
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                match serde_json::from_str::<ClientMsg>(&text) {
                    Err(e) => engine.reject(&id, &format!("malformed message: {e}")),
                    Ok(m) if m.protocol() != PROTOCOL => {
                        engine.reject(&id, &format!("protocol {} is not {PROTOCOL}", m.protocol()))
                    }
                    Ok(ClientMsg::Action { values, .. }) if interval.is_some() => {
                        if values.len() == 2 && values.iter().all(|v| v.is_finite()) {
                            held = Some(values);
                            Ok(Vec::new())
                        } else {
                            engine.reject(&id, &format!("action needs 2 finite values, got {values:?}"))
                        }
                    }
                    Ok(ClientMsg::Action { values, .. }) => engine.action(&id, &values),
                    Ok(ClientMsg::PenUp { .. }) => engine.pen_up(&id),
                }
            }
            _ = async { interval.as_mut().expect("guarded").tick().await }, if interval.is_some() => {
                match &held {
                    Some(a) => engine.action(&id, a),
                    None => Ok(Vec::new()),
                }
            }
        };
        let msgs = out.unwrap_or_else(error_msg);
        if !send_all(&mut socket, msgs, tick).await {
            break;
        }
    }
}

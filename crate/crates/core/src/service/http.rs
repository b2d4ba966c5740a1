//! JSON-over-HTTP front end for [`SessionStore`].
//!
//! | method | path |
//! |--------|------|
//! | POST | `/sessions` |
//! | GET | `/sessions/{id}` |
//! | POST | `/sessions/{id}/moves` |
//! | GET | `/sessions/{id}/events` (server-sent events) |
//! | GET | `/sessions/{id}/transcript?format=corpus\|trace` |
//! | GET | `/protocols` |
//! | GET | `/protocols/{id}` |

use std::collections::VecDeque;
use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast;

use super::{ExportFormat, RoleBindings, ServiceError, SessionEvent, SessionStore};
use crate::protocol::{Move, Step};

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub legal_moves: Option<Vec<Step>>,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError {
            status: StatusCode::from_u16(e.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            body: ErrorBody {
                code: e.code().to_string(),
                message: e.to_string(),
                legal_moves: e.legal_moves().map(<[Step]>::to_vec),
            },
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: ErrorBody { code: "BAD_REQUEST".into(), message: e.body_text(), legal_moves: None },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(alias = "protocol_id", default = "default_protocol_id")]
    pub protocol: String,
    #[serde(alias = "role_bindings", default)]
    pub bindings: RoleBindings,
}

fn default_protocol_id() -> String {
    "default".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostMove {
    pub expected_seq: u64,
    #[serde(rename = "move")]
    pub mv: Move,
}

#[derive(Debug, Deserialize)]
pub struct TranscriptQuery {
    pub format: Option<String>,
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", post(post_move))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/protocols", get(list_protocols))
        .route("/protocols/{id}", get(get_protocol))
        .with_state(store)
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    let snap = store.create_session(&req.protocol, req.bindings)?;
    Ok((StatusCode::CREATED, Json(snap)).into_response())
}

async fn get_session(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(store.get_session(&id)?).into_response())
}

async fn post_move(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<PostMove>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    Ok(Json(store.post_move(&id, req.expected_seq, req.mv)?).into_response())
}

async fn transcript(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    Query(q): Query<TranscriptQuery>,
) -> ApiResult<Response> {
    let format = match q.format.as_deref().unwrap_or("corpus").parse::<ExportFormat>() {
        Ok(f) => f,
        Err(message) => {
            return Err(ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: ErrorBody { code: "BAD_REQUEST".into(), message, legal_moves: None },
            })
        }
    };
    let text = store.export_transcript(&id, format)?;
    let content_type = match format {
        ExportFormat::Corpus => "application/json",
        ExportFormat::Trace => "application/x-ndjson",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], text).into_response())
}

async fn list_protocols(State(store): State<Arc<SessionStore>>) -> ApiResult<Response> {
    let list: Vec<Value> = store
        .protocol_ids()
        .into_iter()
        .filter_map(|id| store.protocol(&id).ok())
        .map(|p| json!({"id": p.id(), "initial": p.initial(), "states": p.states().len(), "transitions": p.transitions().len()}))
        .collect();
    Ok(Json(list).into_response())
}

async fn get_protocol(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(store.protocol(&id)?.to_json_value()).into_response())
}

struct Feed {
    store: Arc<SessionStore>,
    id: String,
    rx: broadcast::Receiver<SessionEvent>,
    queue: VecDeque<SessionEvent>,
    last_seq: u64,
    done: bool,
}

fn sse_event(e: &SessionEvent) -> Event {
    Event::default()
        .id(e.seq.to_string())
        .event("move")
        .json_data(json!({"seq": e.seq, "move": e.mv, "state": e.state}))
        .expect("event serializes")
}

/// Replays the log so far, then follows live moves. The stream closes after a
/// terminal state.
async fn events(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let (backlog, rx) = store.subscribe(&id)?;
    let protocol = store.protocol(&store.get_session(&id)?.protocol)?;
    let feed = Feed { store, id, rx, queue: backlog.into(), last_seq: 0, done: false };
    let stream = futures::stream::unfold(feed, move |mut f| {
        let protocol = protocol.clone();
        async move {
            loop {
                if f.done {
                    return None;
                }
                if let Some(e) = f.queue.pop_front() {
                    if e.seq <= f.last_seq {
                        continue;
                    }
                    f.last_seq = e.seq;
                    f.done = protocol.is_terminal(e.state);
                    return Some((Ok(sse_event(&e)), f));
                }
                match f.rx.recv().await {
                    Ok(e) => f.queue.push_back(e),
                    Err(broadcast::error::RecvError::Lagged(_)) => {
                        f.queue.extend(f.store.events_since(&f.id, f.last_seq).unwrap_or_default());
                    }
                    Err(broadcast::error::RecvError::Closed) => return None,
                }
            }
        }
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

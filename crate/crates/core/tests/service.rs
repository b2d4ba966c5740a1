use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use xdialog_core::protocol::{
    default_protocol, validate_trace, DialogState, Move, MoveKind, Role, SessionState, Trace,
};
use xdialog_core::service::{http, trace_from_export, Binding, ExportFormat, PolicyName, RoleBindings, SessionStore};

use MoveKind::*;
use Role::{Explainer as E, Questioner as Q};

fn bindings(q: &str, e: &str) -> RoleBindings {
    BTreeMap::from([(Q, q.parse::<Binding>().unwrap()), (E, e.parse::<Binding>().unwrap())])
}

#[test]
fn create_and_read() {
    let store = SessionStore::in_memory();
    let s = store.create_session("default", bindings("human", "canned-explainer")).unwrap();
    assert_eq!(s.state, DialogState::Start);
    assert_eq!(s.seq, 0);
    assert!(s.legal_moves[&Q].contains(&QuestionWhat));
    assert_eq!(store.get_session(&s.session_id).unwrap(), s);

    assert_eq!(store.create_session("nope", bindings("human", "human")).unwrap_err().code(), "UNKNOWN_PROTOCOL");
    let only_q = BTreeMap::from([(Q, Binding::Human)]);
    assert_eq!(store.create_session("default", only_q).unwrap_err().code(), "BAD_BINDING");
    assert_eq!(store.get_session("missing").unwrap_err().code(), "NOT_FOUND");
}

#[test]
fn canned_explainer_answers_a_question() {
    let store = SessionStore::in_memory();
    let id = store.create_session("default", bindings("human", "canned-explainer")).unwrap().session_id;
    let out = store.post_move(&id, 0, Move::new(QuestionWhat, Q)).unwrap();
    assert_eq!(out.state, DialogState::ExplanationPresented);
    assert_eq!(out.seq, 2);
    assert_eq!(out.events.len(), 2);
    assert_eq!(out.events[1].mv.kind, Explanation);

    let stale = store.post_move(&id, 1, Move::new(ExplaineeAffirmation, Q)).unwrap_err();
    assert_eq!(stale.code(), "CONFLICT");
    assert_eq!(store.get_session(&id).unwrap().seq, 2);

    let err = store.post_move(&id, 2, Move::new(Explanation, E)).unwrap_err();
    assert_eq!(err.code(), "ACTOR_VIOLATION");
}

#[test]
fn illegal_move_echoes_legal_set() {
    let store = SessionStore::in_memory();
    let id = store.create_session("default", bindings("human", "human")).unwrap().session_id;
    let err = store.post_move(&id, 0, Move::new(ExplaineeAffirmation, Q)).unwrap_err();
    assert_eq!(err.code(), "ILLEGAL_MOVE");
    let legal = err.legal_moves().unwrap();
    assert!(legal.contains(&(QuestionWhat, Q)));
    assert_eq!(legal.len(), default_protocol().legal_moves(DialogState::Start).unwrap().len());
}

#[test]
fn golden_session_exports_accepted() {
    let store = SessionStore::in_memory();
    let id = store.create_session("default", bindings("human", "human")).unwrap().session_id;
    let moves = [
        Move::new(QuestionWhat, Q).with_text("What is X?"),
        Move::new(Explanation, E).with_text("X is Y."),
        Move::new(ExplaineeAffirmation, Q),
        Move::new(ArgumentOpen, Q),
        Move::new(ArgumentBody, Q).with_text("But Z."),
        Move::new(ArgumentAffirmation, E),
        Move::new(EndDialog, E),
    ];
    for (i, m) in moves.into_iter().enumerate() {
        store.post_move(&id, i as u64, m).unwrap();
    }
    let snap = store.get_session(&id).unwrap();
    assert!(snap.finished);
    assert!(snap.legal_moves.values().all(Vec::is_empty));
    assert_eq!(store.post_move(&id, 7, Move::new(QuestionWhat, Q)).unwrap_err().code(), "TERMINATED");

    let doc = store.export_transcript(&id, ExportFormat::Corpus).unwrap();
    let trace = trace_from_export(&doc).unwrap();
    assert!(validate_trace(&default_protocol(), &trace).is_accepted());
    let reparsed = xdialog_core::corpus::parse_corpus(&doc, true).unwrap();
    assert_eq!(xdialog_core::corpus::serialize_corpus(&reparsed), doc);

    let jsonl = store.export_transcript(&id, ExportFormat::Trace).unwrap();
    assert_eq!(Trace::from_jsonl(&jsonl).unwrap().steps(), snap.history.iter().map(Move::step).collect::<Vec<_>>());
}

#[test]
fn fresh_and_partial_exports_are_incomplete() {
    let store = SessionStore::in_memory();
    let id = store.create_session("default", bindings("human", "canned-explainer")).unwrap().session_id;
    let p = default_protocol();
    let doc = store.export_transcript(&id, ExportFormat::Corpus).unwrap();
    assert_eq!(validate_trace(&p, &trace_from_export(&doc).unwrap()).label(), "INCOMPLETE");
    store.post_move(&id, 0, Move::new(QuestionHow, Q)).unwrap();
    let doc = store.export_transcript(&id, ExportFormat::Corpus).unwrap();
    let trace = trace_from_export(&doc).unwrap();
    assert_eq!(trace.kinds(), vec![QuestionHow, Explanation]);
    assert_eq!(validate_trace(&p, &trace).label(), "INCOMPLETE");
}

#[test]
fn two_policies_finish_on_their_own() {
    let store = SessionStore::in_memory();
    let s = store.create_session("default", bindings("canned-explainee", "canned-explainer")).unwrap();
    assert!(s.finished);
    let kinds: Vec<MoveKind> = s.history.iter().map(|m| m.kind).collect();
    assert_eq!(kinds, vec![QuestionWhat, Explanation, ExplaineeAffirmation, ExplainerAffirmation, EndDialog]);
}

#[test]
fn random_policies_only_make_legal_moves() {
    let store = SessionStore::in_memory();
    let p = default_protocol();
    for seed in 0..50 {
        let b = bindings(&format!("uniform-random({seed})"), &format!("uniform-random({})", seed + 1000));
        let s = store.create_session("default", b).unwrap();
        let replayed = SessionState::replay(&p, &Trace::new(s.history.clone())).unwrap();
        assert_eq!(replayed.current, s.state);
    }
}

#[test]
fn topic_change_is_rejected() {
    let store = SessionStore::in_memory();
    let id = store.create_session("default", bindings("human", "canned-explainer")).unwrap().session_id;
    store.post_move(&id, 0, Move::new(QuestionWhy, Q).with_topic("loans")).unwrap();
    let err = store.post_move(&id, 2, Move::new(QuestionWhat, Q).with_topic("weather")).unwrap_err();
    assert_eq!(err.code(), "ILLEGAL_MOVE");
    assert_eq!(store.get_session(&id).unwrap().seq, 2);
}

#[test]
fn sessions_are_isolated() {
    let store = SessionStore::in_memory();
    let a = store.create_session("default", bindings("human", "human")).unwrap().session_id;
    let b = store.create_session("default", bindings("human", "human")).unwrap().session_id;
    store.post_move(&a, 0, Move::new(QuestionWhat, Q)).unwrap();
    assert_eq!(store.get_session(&b).unwrap().seq, 0);
    assert_eq!(store.get_session(&b).unwrap().state, DialogState::Start);
}

#[test]
fn logs_reload_after_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, snap) = {
        let store = SessionStore::open(dir.path(), []).unwrap();
        let id = store.create_session("default", bindings("human", "canned-explainer")).unwrap().session_id;
        store.post_move(&id, 0, Move::new(QuestionWhat, Q)).unwrap();
        store.post_move(&id, 2, Move::new(ExplaineeAffirmation, Q)).unwrap();
        (id.clone(), store.get_session(&id).unwrap())
    };
    let store = SessionStore::open(dir.path(), []).unwrap();
    let reloaded = store.get_session(&id).unwrap();
    assert_eq!(reloaded, snap);
    assert_eq!(reloaded.state, DialogState::ExplainerAffirmed);
    let next = store.post_move(&id, reloaded.seq, Move::new(EndDialog, Q)).unwrap();
    assert_eq!(next.state, DialogState::End);

    // a torn trailing line is ignored
    let path = dir.path().join(format!("{id}.jsonl"));
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"type\":\"move\",\"se");
    std::fs::write(&path, text).unwrap();
    let store = SessionStore::open(dir.path(), []).unwrap();
    assert_eq!(store.get_session(&id).unwrap().state, DialogState::End);
}

#[test]
fn policy_names_parse() {
    assert_eq!("uniform-random(3)".parse::<PolicyName>().unwrap(), PolicyName::UniformRandom { seed: 3 });
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn http_round_trip() {
    let app = http::router(Arc::new(SessionStore::in_memory()));

    let (st, protocols) = call_json(&app, "GET", "/protocols", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(protocols[0]["id"], "default");
    let (st, def) = call_json(&app, "GET", "/protocols/default", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(def["transitions"].as_array().unwrap().len(), 61);
    assert_eq!(call_json(&app, "GET", "/protocols/other", None).await.0, StatusCode::NOT_FOUND);

    let (st, snap) = call_json(
        &app,
        "POST",
        "/sessions",
        Some(json!({"protocol": "default", "bindings": {"Q": "human", "E": "canned-explainer"}})),
    )
    .await;
    assert_eq!(st, StatusCode::CREATED);
    let id = snap["session_id"].as_str().unwrap().to_string();
    assert_eq!(snap["state"], "START");
    assert!(snap["legal_moves"]["Q"].as_array().unwrap().contains(&json!("QUESTION_WHAT")));

    let (st, err) = call_json(&app, "POST", "/sessions", Some(json!({"bindings": {"Q": "human"}}))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "BAD_BINDING");

    let uri = format!("/sessions/{id}/moves");
    let (st, err) = call_json(
        &app,
        "POST",
        &uri,
        Some(json!({"expected_seq": 0, "move": {"kind": "EXPLAINEE_AFFIRMATION", "actor": "Q"}})),
    )
    .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "ILLEGAL_MOVE");
    assert!(err["legal_moves"].as_array().unwrap().contains(&json!(["QUESTION_WHAT", "Q"])));

    let (st, out) = call_json(
        &app,
        "POST",
        &uri,
        Some(json!({"expected_seq": 0, "move": {"kind": "QUESTION_WHAT", "actor": "Q"}})),
    )
    .await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(out["state"], "EXPLANATION_PRESENTED");
    assert_eq!(out["seq"], 2);

    let (st, err) =
        call_json(&app, "POST", &uri, Some(json!({"expected_seq": 0, "move": {"kind": "END_DIALOG", "actor": "Q"}})))
            .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(err["code"], "CONFLICT");

    let (st, err) = call_json(&app, "POST", &uri, Some(json!({"expected_seq": 2, "move": {"kind": "NOPE"}}))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "BAD_REQUEST");

    let (st, _) =
        call_json(&app, "POST", &uri, Some(json!({"expected_seq": 2, "move": {"kind": "END_DIALOG", "actor": "Q"}})))
            .await;
    assert_eq!(st, StatusCode::OK);
    let (st, err) = call_json(
        &app,
        "POST",
        &uri,
        Some(json!({"expected_seq": 3, "move": {"kind": "QUESTION_WHAT", "actor": "Q"}})),
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(err["code"], "TERMINATED");

    let (st, body) = call(&app, "GET", &format!("/sessions/{id}/transcript?format=trace"), None).await;
    assert_eq!(st, StatusCode::OK);
    let trace = Trace::from_jsonl(std::str::from_utf8(&body).unwrap()).unwrap();
    assert_eq!(trace.kinds(), vec![QuestionWhat, Explanation, EndDialog]);
    let (st, body) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(st, StatusCode::OK);
    let exported = trace_from_export(std::str::from_utf8(&body).unwrap()).unwrap();
    assert!(validate_trace(&default_protocol(), &exported).is_accepted());
    assert_eq!(
        call(&app, "GET", &format!("/sessions/{id}/transcript?format=pdf"), None).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );

    // the event stream of a finished session replays the log and closes
    let (st, body) = call(&app, "GET", &format!("/sessions/{id}/events"), None).await;
    assert_eq!(st, StatusCode::OK);
    let text = String::from_utf8(body).unwrap();
    let data: Vec<Value> =
        text.lines().filter_map(|l| l.strip_prefix("data: ")).map(|d| serde_json::from_str(d).unwrap()).collect();
    assert_eq!(data.iter().map(|d| d["seq"].as_u64().unwrap()).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert_eq!(data[2]["state"], "END");

    assert_eq!(call_json(&app, "GET", "/sessions/unknown", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/sessions/unknown/events", None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn event_stream_follows_live_moves() {
    let store = Arc::new(SessionStore::in_memory());
    let app = http::router(store.clone());
    let id = store.create_session("default", bindings("human", "canned-explainer")).unwrap().session_id;
    let req = Request::builder().uri(format!("/sessions/{id}/events")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let mut body = resp.into_body();

    store.post_move(&id, 0, Move::new(QuestionWhat, Q)).unwrap();
    store.post_move(&id, 2, Move::new(EndDialog, Q)).unwrap();

    let mut text = String::new();
    while let Some(frame) = body.frame().await {
        if let Ok(data) = frame.unwrap().into_data() {
            text.push_str(std::str::from_utf8(&data).unwrap());
        }
    }
    let seqs: Vec<&str> = text.lines().filter_map(|l| l.strip_prefix("id: ")).collect();
    assert_eq!(seqs, vec!["1", "2", "3"]);
}

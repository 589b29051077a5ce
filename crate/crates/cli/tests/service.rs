use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use kopl_cli::feedback::{FeedbackLog, FeedbackWriter};
use kopl_cli::service::{router, AppState};
use kopl_core::linker::{LexicalScorer, Linker, Pipeline, TemplateStore};
use kopl_core::KnowledgeBase;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn app(dir: &std::path::Path) -> (axum::Router, FeedbackWriter) {
    let kb = Arc::new(KnowledgeBase::from_json(include_str!("../../core/fixtures/mini_discos.json")).unwrap());
    let templates = TemplateStore::from_jsonl(include_str!("../../core/fixtures/gold.jsonl")).unwrap();
    let linker = Linker::with_acronyms(&kb, &kopl_core::augment::default_acronyms());
    let pipeline = Pipeline::new(kb, templates, linker, Arc::new(LexicalScorer::default()));
    let (log, writer) = FeedbackLog::open(&dir.join("feedback.jsonl")).await.unwrap();
    let state = AppState {
        pipeline: Arc::new(pipeline),
        feedback: log,
        validation: Arc::new(vec!["What is the mass of Saturn V?".into()]),
    };
    (router(state), writer)
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn answer_returns_program_answer_and_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _w) = app(dir.path()).await;
    let q = json!({"question": "What is the inclination of the orbit of Hubble?"});
    let (status, v) = call(&app, "POST", "/answer", Some(q.clone())).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["answer"]["rendered"], "28.5 deg");
    assert_eq!(v["program"][0]["function"], "Find");
    assert_eq!(v["program"][0]["inputs"][0], "Hubble");
    assert!(!v["decisions"].as_array().unwrap().is_empty());

    // identical requests give identical responses
    let (_, again) = call(&app, "POST", "/answer", Some(q)).await;
    assert_eq!(v, again);
}

#[tokio::test]
async fn bad_requests_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _w) = app(dir.path()).await;
    let (status, v) = call(&app, "POST", "/execute", Some(json!({"program": []}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["stage"], "parse");

    let (status, v) = call(&app, "POST", "/answer", Some(json!({"q": "x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["stage"], "request");

    let bad = json!({"program": [{"function": "Find", "inputs": ["Hubble"], "dependencies": []}, {"function": "QueryAttr", "inputs": ["colour"], "dependencies": [0]}]});
    let (status, v) = call(&app, "POST", "/execute", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["stage"], "execute", "{v}");
}

#[tokio::test]
async fn execute_runs_a_program() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _w) = app(dir.path()).await;
    let p = json!({"program": [
        {"function": "Find", "inputs": ["Saturn V"], "dependencies": []},
        {"function": "QueryAttr", "inputs": ["mass"], "dependencies": [0]}
    ]});
    let (status, v) = call(&app, "POST", "/execute", Some(p)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["answer"]["rendered"], "2970000 kg");
}

#[tokio::test]
async fn feedback_is_appended() {
    let dir = tempfile::tempdir().unwrap();
    let (app, writer) = app(dir.path()).await;
    let body = json!({
        "username": "ops",
        "question": "What is the mass of Saturn V?",
        "program": [],
        "answer": "2970000 kg",
        "rating": "up"
    });
    let (status, v) = call(&app, "POST", "/feedback", Some(body.clone())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["id"], 0);
    let (_, v) = call(&app, "POST", "/feedback", Some(body)).await;
    assert_eq!(v["id"], 1);
    drop(app);
    writer.finish().await;
    let text = std::fs::read_to_string(dir.path().join("feedback.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["username"], "ops");
    assert!(first["timestamp"].as_str().unwrap().ends_with('Z'));
}

#[tokio::test]
async fn health_and_validation_sample() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _w) = app(dir.path()).await;
    let (status, v) = call(&app, "GET", "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["templates"], 23);
    assert_eq!(v["kb"]["entities"], 75);
    let (status, v) = call(&app, "GET", "/validation/sample", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["question"], "What is the mass of Saturn V?");
}

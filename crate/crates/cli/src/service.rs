//! HTTP+JSON API over the pipeline.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kopl_core::exec::AnswerJson;
use kopl_core::kb::KbStats;
use kopl_core::linker::LinkDecision;
use kopl_core::program::{program_from_value, program_to_value};
use kopl_core::Pipeline;
use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::feedback::{FeedbackInput, FeedbackLog};

#[derive(Clone)]
pub struct AppState {
    pub pipeline: Arc<Pipeline>,
    pub feedback: FeedbackLog,
    /// Questions served by `/validation/sample`.
    pub validation: Arc<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub stage: &'static str,
    pub error: String,
}

impl ApiError {
    fn bad(stage: &'static str, error: impl ToString) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            stage,
            error: error.to_string(),
        }
    }

    fn internal() -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            stage: "internal",
            error: "internal error".to_owned(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::bad("request", r.body_text())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub question: String,
}

#[derive(Debug, Serialize)]
pub struct AnswerResponse {
    pub program: serde_json::Value,
    pub answer: AnswerJson,
    pub decisions: Vec<LinkDecision>,
    pub template: usize,
    pub similarity: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecuteRequest {
    pub program: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct ExecuteResponse {
    pub answer: AnswerJson,
}

#[derive(Debug, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub kb: KbStats,
    pub templates: usize,
    pub scorer: String,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/answer", post(answer))
        .route("/execute", post(execute))
        .route("/feedback", post(feedback))
        .route("/validation/sample", get(sample))
        .route("/health", get(health))
        .with_state(state)
}

/// Runs pipeline work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|_| ApiError::internal())
}

async fn answer(
    State(st): State<AppState>,
    body: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<AnswerResponse>, ApiError> {
    let Json(req) = body?;
    if req.question.trim().is_empty() {
        return Err(ApiError::bad("request", "question is empty"));
    }
    let p = st.pipeline.clone();
    let r = blocking(move || {
        let r = p.answer(&req.question)?;
        Ok::<_, kopl_core::PipelineError>(AnswerResponse {
            program: program_to_value(&r.program),
            answer: r.answer.to_json(p.kb()),
            decisions: r.decisions,
            template: r.prediction.template,
            similarity: r.prediction.similarity,
            diagnostics: r.diagnostics,
        })
    })
    .await?
    .map_err(|e| ApiError::bad(e.stage(), e))?;
    Ok(Json(r))
}

async fn execute(
    State(st): State<AppState>,
    body: Result<Json<ExecuteRequest>, JsonRejection>,
) -> Result<Json<ExecuteResponse>, ApiError> {
    let Json(req) = body?;
    let program = program_from_value(req.program).map_err(|e| ApiError::bad("parse", e))?;
    let p = st.pipeline.clone();
    let answer = blocking(move || p.execute(&program).map(|a| a.to_json(p.kb())))
        .await?
        .map_err(|e| ApiError::bad(e.stage(), e))?;
    Ok(Json(ExecuteResponse { answer }))
}

#[derive(Debug, Serialize)]
pub struct FeedbackResponse {
    pub id: u64,
}

async fn feedback(
    State(st): State<AppState>,
    body: Result<Json<FeedbackInput>, JsonRejection>,
) -> Result<Json<FeedbackResponse>, ApiError> {
    let Json(input) = body?;
    if input.username.trim().is_empty() {
        return Err(ApiError::bad("request", "username is empty"));
    }
    let id = st.feedback.append(input).await.map_err(|_| ApiError::internal())?;
    Ok(Json(FeedbackResponse { id }))
}

#[derive(Debug, Serialize)]
pub struct SampleResponse {
    pub question: String,
}

async fn sample(State(st): State<AppState>) -> Result<Json<SampleResponse>, ApiError> {
    let q = st.validation.choose(&mut rand::rng()).ok_or_else(|| ApiError {
        status: StatusCode::NOT_FOUND,
        stage: "request",
        error: "no validation questions loaded".to_owned(),
    })?;
    Ok(Json(SampleResponse { question: q.clone() }))
}

async fn health(State(st): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok",
        kb: st.pipeline.kb().stats(),
        templates: st.pipeline.templates().len(),
        scorer: st.pipeline.scorer_name().to_owned(),
    })
}

/// Serves until Ctrl-C, then flushes the feedback log.
pub async fn serve(cfg: crate::config::AppConfig) -> anyhow::Result<()> {
    let pipeline = Arc::new(crate::config::build_pipeline(&cfg)?);
    let validation = match &cfg.validation {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            kopl_core::augment::read_dataset(&text)?
                .into_iter()
                .filter_map(|r| r.question)
                .collect()
        }
        None => pipeline.templates().iter().map(|t| t.question.clone()).collect(),
    };
    let (log, writer) = FeedbackLog::open(&cfg.feedback).await?;
    let state = AppState {
        pipeline,
        feedback: log,
        validation: Arc::new(validation),
    };
    let addr = SocketAddr::from(([0, 0, 0, 0], cfg.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    writer.finish().await;
    Ok(())
}

//! HTTP JSON API over a [`Lab`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use wordlab_core::agent::{AgentReaction, Millis};

use super::{Created, ElicitationOutcome, GuessOutcome, Intake, Lab, RoundOpening, ServiceError, SessionView};
use crate::export::{self, Format, TableKind};

/// A service error as sent to clients.
pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

/// Stable error name used in response bodies.
pub fn error_kind(e: &ServiceError) -> &'static str {
    match e {
        ServiceError::SessionNotFound(_) => "SessionNotFound",
        ServiceError::RoundsAlreadyStarted => "RoundsAlreadyStarted",
        ServiceError::NoActiveRound => "NoActiveRound",
        ServiceError::RoundAlreadyOver => "RoundAlreadyOver",
        ServiceError::RoundInProgress => "RoundInProgress",
        ServiceError::RoundsIncomplete => "RoundsIncomplete",
        ServiceError::OutOfRange(_) => "OutOfRange",
        ServiceError::QuestionnaireMissing => "QuestionnaireMissing",
        ServiceError::QuestionnaireAlreadySubmitted => "QuestionnaireAlreadySubmitted",
        ServiceError::SequenceGap { .. } => "SequenceGap",
        ServiceError::Config(_) | ServiceError::Load(_) => "Config",
        ServiceError::Log(_) => "Storage",
    }
}

fn status_of(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::SessionNotFound(_) => StatusCode::NOT_FOUND,
        ServiceError::OutOfRange(_) => StatusCode::UNPROCESSABLE_ENTITY,
        ServiceError::Config(_) | ServiceError::Load(_) | ServiceError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::CONFLICT,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": error_kind(&self.0), "message": self.0.to_string() });
        (status_of(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateRequest {
    #[serde(flatten)]
    pub intake: Intake,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_ms: Option<Millis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElicitationRequest {
    pub response_index: usize,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_ms: Option<Millis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuessRequest {
    pub guess: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_ms: Option<Millis>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TimeOnly {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_ms: Option<Millis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionnaireRequest {
    pub arousal: f64,
    pub valence: f64,
    pub crt_answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_ms: Option<Millis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdleReply {
    pub agent_reaction: Option<AgentReaction>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionnaireReply {
    pub crt_score: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BonusReply {
    pub bonus_rounds_started: u32,
    pub round: RoundOpening,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExportQuery {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default = "default_table")]
    pub table: String,
}

fn default_format() -> String {
    "csv".into()
}

fn default_table() -> String {
    "events".into()
}

type Shared = State<Arc<Lab>>;

async fn create(State(lab): Shared, Json(req): Json<CreateRequest>) -> ApiResult<Created> {
    Ok(Json(lab.create_session(req.intake, req.at_ms)?))
}

async fn elicitation(
    State(lab): Shared,
    Path(id): Path<String>,
    Json(req): Json<ElicitationRequest>,
) -> ApiResult<ElicitationOutcome> {
    Ok(Json(lab.submit_elicitation(&id, req.response_index, &req.text, req.at_ms)?))
}

async fn guess(State(lab): Shared, Path(id): Path<String>, Json(req): Json<GuessRequest>) -> ApiResult<GuessOutcome> {
    Ok(Json(lab.submit_guess(&id, &req.guess, req.seq, req.at_ms)?))
}

async fn idle(State(lab): Shared, Path(id): Path<String>, body: Option<Json<TimeOnly>>) -> ApiResult<IdleReply> {
    let at = body.and_then(|b| b.0.at_ms);
    Ok(Json(IdleReply {
        agent_reaction: lab.idle_ping(&id, at)?,
    }))
}

async fn questionnaire(
    State(lab): Shared,
    Path(id): Path<String>,
    Json(req): Json<QuestionnaireRequest>,
) -> ApiResult<QuestionnaireReply> {
    let crt_score = lab.submit_questionnaire(&id, req.arousal, req.valence, req.crt_answers, req.at_ms)?;
    Ok(Json(QuestionnaireReply { crt_score }))
}

async fn bonus(State(lab): Shared, Path(id): Path<String>, body: Option<Json<TimeOnly>>) -> ApiResult<BonusReply> {
    let round = lab.start_bonus_round(&id, body.and_then(|b| b.0.at_ms))?;
    let bonus_rounds_started = lab.state(&id)?.bonus_rounds_started;
    Ok(Json(BonusReply {
        bonus_rounds_started,
        round,
    }))
}

async fn state(State(lab): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    Ok(Json(lab.state(&id)?))
}

async fn export_table(State(lab): Shared, Query(q): Query<ExportQuery>) -> Response {
    let parsed = q.format.parse::<Format>().and_then(|f| Ok((f, q.table.parse::<TableKind>()?)));
    let (format, kind) = match parsed {
        Ok(p) => p,
        Err(message) => {
            return (StatusCode::BAD_REQUEST, Json(json!({ "error": "BadRequest", "message": message }))).into_response()
        }
    };
    let body = export::table(&lab.snapshot(), kind).render(format);
    let content_type = match format {
        Format::Csv => "text/csv; charset=utf-8",
        Format::Jsonl => "application/x-ndjson; charset=utf-8",
    };
    ([(header::CONTENT_TYPE, content_type)], body).into_response()
}

pub fn router(lab: Arc<Lab>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/elicitation", post(elicitation))
        .route("/sessions/{id}/guess", post(guess))
        .route("/sessions/{id}/idle", post(idle))
        .route("/sessions/{id}/questionnaire", post(questionnaire))
        .route("/sessions/{id}/bonus", post(bonus))
        .route("/sessions/{id}/state", get(state))
        .route("/export", get(export_table))
        .with_state(lab)
}

/// Serves until ctrl-c.
pub async fn serve(lab: Arc<Lab>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    ::log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(lab))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// A server running on its own thread, stopped on drop.
pub struct BackgroundServer {
    pub addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundServer {
    pub fn start(lab: Arc<Lab>, addr: SocketAddr) -> std::io::Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
        let listener = runtime.block_on(TcpListener::bind(addr))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let shutdown = async {
                    let _ = stopped.await;
                };
                if let Err(e) = axum::serve(listener, router(lab)).with_graceful_shutdown(shutdown).await {
                    ::log::error!("server stopped: {e}");
                }
            });
        });
        Ok(BackgroundServer {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

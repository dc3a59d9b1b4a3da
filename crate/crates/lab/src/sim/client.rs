//! How bots reach the service: directly in-process or over HTTP.

use std::sync::Arc;
use std::time::Duration;

use reqwest::blocking::Client;
use serde::de::DeserializeOwned;
use serde::Serialize;
use wordlab_core::agent::{AgentReaction, Millis};

use super::SimError;
use crate::export::{self, Format, TableKind};
use crate::service::http::{
    error_kind, BonusReply, CreateRequest, ElicitationRequest, GuessRequest, IdleReply, QuestionnaireReply,
    QuestionnaireRequest, TimeOnly,
};
use crate::service::{Created, ElicitationOutcome, GuessOutcome, Intake, Lab, RoundOpening, ServiceError};

pub trait LabClient {
    fn min_elicitation_chars(&self) -> usize;
    fn create_session(&mut self, intake: &Intake, at: Millis) -> Result<Created, SimError>;
    fn submit_elicitation(&mut self, id: &str, index: usize, text: &str, at: Millis)
        -> Result<ElicitationOutcome, SimError>;
    fn submit_guess(&mut self, id: &str, raw: &str, seq: Option<u64>, at: Millis) -> Result<GuessOutcome, SimError>;
    fn idle(&mut self, id: &str, at: Millis) -> Result<Option<AgentReaction>, SimError>;
    fn submit_questionnaire(
        &mut self,
        id: &str,
        arousal: f64,
        valence: f64,
        crt_answers: Vec<String>,
        at: Millis,
    ) -> Result<u8, SimError>;
    fn start_bonus(&mut self, id: &str, at: Millis) -> Result<RoundOpening, SimError>;
    fn export(&mut self, table: TableKind, format: Format) -> Result<String, SimError>;
}

impl From<ServiceError> for SimError {
    fn from(e: ServiceError) -> Self {
        SimError::Api {
            kind: error_kind(&e).to_owned(),
            message: e.to_string(),
        }
    }
}

/// Calls a [`Lab`] in the same process.
pub struct InProcess(pub Arc<Lab>);

impl LabClient for InProcess {
    fn min_elicitation_chars(&self) -> usize {
        self.0.config().min_elicitation_chars
    }

    fn create_session(&mut self, intake: &Intake, at: Millis) -> Result<Created, SimError> {
        Ok(self.0.create_session(intake.clone(), Some(at))?)
    }

    fn submit_elicitation(
        &mut self,
        id: &str,
        index: usize,
        text: &str,
        at: Millis,
    ) -> Result<ElicitationOutcome, SimError> {
        Ok(self.0.submit_elicitation(id, index, text, Some(at))?)
    }

    fn submit_guess(&mut self, id: &str, raw: &str, seq: Option<u64>, at: Millis) -> Result<GuessOutcome, SimError> {
        Ok(self.0.submit_guess(id, raw, seq, Some(at))?)
    }

    fn idle(&mut self, id: &str, at: Millis) -> Result<Option<AgentReaction>, SimError> {
        Ok(self.0.idle_ping(id, Some(at))?)
    }

    fn submit_questionnaire(
        &mut self,
        id: &str,
        arousal: f64,
        valence: f64,
        crt_answers: Vec<String>,
        at: Millis,
    ) -> Result<u8, SimError> {
        Ok(self.0.submit_questionnaire(id, arousal, valence, crt_answers, Some(at))?)
    }

    fn start_bonus(&mut self, id: &str, at: Millis) -> Result<RoundOpening, SimError> {
        Ok(self.0.start_bonus_round(id, Some(at))?)
    }

    fn export(&mut self, table: TableKind, format: Format) -> Result<String, SimError> {
        Ok(export::table(&self.0.snapshot(), table).render(format))
    }
}

/// Calls the HTTP API with a blocking client.
pub struct HttpClient {
    base: String,
    http: Client,
    min_chars: usize,
}

impl HttpClient {
    pub fn new(base: &str, min_elicitation_chars: usize) -> Result<Self, SimError> {
        let http = Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| SimError::ServiceUnreachable(e.to_string()))?;
        Ok(HttpClient {
            base: base.trim_end_matches('/').to_owned(),
            http,
            min_chars: min_elicitation_chars,
        })
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, SimError> {
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .json(body)
            .send()
            .map_err(|e| SimError::ServiceUnreachable(e.to_string()))?;
        Self::decode(resp)
    }

    fn decode<T: DeserializeOwned>(resp: reqwest::blocking::Response) -> Result<T, SimError> {
        let status = resp.status();
        let text = resp.text().map_err(|e| SimError::ServiceUnreachable(e.to_string()))?;
        if !status.is_success() {
            let body: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
            return Err(SimError::Api {
                kind: body["error"].as_str().unwrap_or(status.as_str()).to_owned(),
                message: body["message"].as_str().unwrap_or(&text).to_owned(),
            });
        }
        serde_json::from_str(&text).map_err(|e| SimError::Protocol(format!("{e}: {text}")))
    }
}

impl LabClient for HttpClient {
    fn min_elicitation_chars(&self) -> usize {
        self.min_chars
    }

    fn create_session(&mut self, intake: &Intake, at: Millis) -> Result<Created, SimError> {
        self.post(
            "/sessions",
            &CreateRequest {
                intake: intake.clone(),
                at_ms: Some(at),
            },
        )
    }

    fn submit_elicitation(
        &mut self,
        id: &str,
        index: usize,
        text: &str,
        at: Millis,
    ) -> Result<ElicitationOutcome, SimError> {
        self.post(
            &format!("/sessions/{id}/elicitation"),
            &ElicitationRequest {
                response_index: index,
                text: text.to_owned(),
                at_ms: Some(at),
            },
        )
    }

    fn submit_guess(&mut self, id: &str, raw: &str, seq: Option<u64>, at: Millis) -> Result<GuessOutcome, SimError> {
        self.post(
            &format!("/sessions/{id}/guess"),
            &GuessRequest {
                guess: raw.to_owned(),
                seq,
                at_ms: Some(at),
            },
        )
    }

    fn idle(&mut self, id: &str, at: Millis) -> Result<Option<AgentReaction>, SimError> {
        let reply: IdleReply = self.post(&format!("/sessions/{id}/idle"), &TimeOnly { at_ms: Some(at) })?;
        Ok(reply.agent_reaction)
    }

    fn submit_questionnaire(
        &mut self,
        id: &str,
        arousal: f64,
        valence: f64,
        crt_answers: Vec<String>,
        at: Millis,
    ) -> Result<u8, SimError> {
        let reply: QuestionnaireReply = self.post(
            &format!("/sessions/{id}/questionnaire"),
            &QuestionnaireRequest {
                arousal,
                valence,
                crt_answers,
                at_ms: Some(at),
            },
        )?;
        Ok(reply.crt_score)
    }

    fn start_bonus(&mut self, id: &str, at: Millis) -> Result<RoundOpening, SimError> {
        let reply: BonusReply = self.post(&format!("/sessions/{id}/bonus"), &TimeOnly { at_ms: Some(at) })?;
        Ok(reply.round)
    }

    fn export(&mut self, table: TableKind, format: Format) -> Result<String, SimError> {
        let resp = self
            .http
            .get(format!("{}/export?format={}&table={}", self.base, format.extension(), table.name()))
            .send()
            .map_err(|e| SimError::ServiceUnreachable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| SimError::ServiceUnreachable(e.to_string()))?;
        if status.is_success() {
            Ok(text)
        } else {
            Err(SimError::Api {
                kind: status.to_string(),
                message: text,
            })
        }
    }
}

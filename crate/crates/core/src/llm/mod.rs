//! Chat-completion backend abstraction used by translation, sampling, and
//! evaluation.
//!
//! A [`Backend`] issues one provider call. The [`Client`] wraps a backend
//! with validation, bounded retries with exponential backoff, and a global
//! in-flight bound shared by every concurrent caller. Batch completion
//! preserves input order and reports failures per item.
//!
//! Credentials are read from the environment by the HTTP backend; nothing
//! in this module persists them.

pub mod http;
pub mod mock;

use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use futures::stream::StreamExt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::Semaphore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }
    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Message {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub backend_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub seed: Option<u64>,
    /// Number of parallel samples to draw for this prompt.
    pub n: u32,
}

impl CompletionRequest {
    /// Single-sample request with the given user prompt.
    pub fn user_prompt(backend_id: impl Into<String>, prompt: impl Into<String>) -> Self {
        CompletionRequest {
            backend_id: backend_id.into(),
            messages: vec![Message::user(prompt)],
            temperature: 0.0,
            max_tokens: 512,
            seed: None,
            n: 1,
        }
    }

    fn validate(&self) -> Result<(), LlmError> {
        if self.n < 1 {
            return Err(LlmError::InvalidRequest("n must be >= 1".into()));
        }
        if self.max_tokens < 1 {
            return Err(LlmError::InvalidRequest("max_tokens must be >= 1".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(LlmError::InvalidRequest("temperature must be >= 0".into()));
        }
        Ok(())
    }
}

/// Stable digest of the message sequence, used as the fixture lookup key
/// and in transcript lines. Sampling parameters are excluded so a fixture
/// answers a prompt regardless of temperature or seed.
pub fn prompt_hash(req: &CompletionRequest) -> String {
    let mut h = Sha256::new();
    for m in &req.messages {
        h.update(match m.role {
            Role::System => b"system\x1f".as_slice(),
            Role::User => b"user\x1f",
            Role::Assistant => b"assistant\x1f",
        });
        h.update(m.content.as_bytes());
        h.update(b"\x1e");
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    pub texts: Vec<String>,
    pub usage: Usage,
    pub latency: Duration,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum LlmError {
    /// Network-level failure or provider outage; worth retrying.
    #[error("transport: {0}")]
    Transport(String),
    /// Provider asked us to slow down; worth retrying after a delay.
    #[error("rate limited: {0}")]
    RateLimited(String),
    /// The request itself is unacceptable; retrying cannot help.
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// The provider answered with a payload we cannot interpret.
    #[error("protocol: {0}")]
    Protocol(String),
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LlmError::Transport(_) | LlmError::RateLimited(_))
    }
}

#[async_trait]
pub trait Backend: Send + Sync {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryConfig {
    /// Additional attempts after the first call.
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryConfig {
    fn default() -> Self {
        RetryConfig {
            max_retries: 3,
            base_delay: Duration::from_millis(200),
            max_delay: Duration::from_secs(10),
        }
    }
}

impl RetryConfig {
    /// Delay before retry number `retry` (0-based): base * 2^retry, capped.
    /// Non-decreasing in `retry` by construction.
    pub fn delay_for(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry).unwrap_or(u32::MAX);
        self.base_delay
            .checked_mul(factor)
            .map_or(self.max_delay, |d| d.min(self.max_delay))
    }
}

/// Shared handle around a backend: validation, retries, a global in-flight
/// bound, and an optional call transcript.
#[derive(Clone)]
pub struct Client {
    backend: Arc<dyn Backend>,
    retry: RetryConfig,
    permits: Arc<Semaphore>,
    max_in_flight: usize,
    transcript: Option<Arc<std::sync::Mutex<Box<dyn std::io::Write + Send>>>>,
}

impl Client {
    pub fn new(backend: Arc<dyn Backend>, retry: RetryConfig, max_in_flight: usize) -> Client {
        let max_in_flight = max_in_flight.max(1);
        Client {
            backend,
            retry,
            permits: Arc::new(Semaphore::new(max_in_flight)),
            max_in_flight,
            transcript: None,
        }
    }

    /// Record one JSON line per provider call (after retries resolve) to
    /// `sink`: prompt hash, outcome, latency. Intended for replay debugging.
    pub fn with_transcript(mut self, sink: impl std::io::Write + Send + 'static) -> Client {
        self.transcript = Some(Arc::new(std::sync::Mutex::new(Box::new(sink))));
        self
    }

    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight
    }

    /// One completion with validation, the in-flight bound, and retries on
    /// transport or rate-limit failures.
    pub async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        req.validate()?;
        let _permit = self
            .permits
            .acquire()
            .await
            .expect("semaphore never closed");
        let started = Instant::now();
        let mut retry = 0u32;
        let outcome = loop {
            match self.backend.complete(req).await {
                Ok(resp) => break Ok(resp),
                Err(e) if e.is_retryable() && retry < self.retry.max_retries => {
                    tokio::time::sleep(self.retry.delay_for(retry)).await;
                    retry += 1;
                }
                Err(e) => break Err(e),
            }
        };
        self.log_call(req, &outcome, started.elapsed());
        outcome
    }

    /// Complete many requests with at most `max_in_flight` outstanding at
    /// once (additionally bounded by this client's own limit). The output
    /// is positionally aligned with the input; one failure never cancels
    /// the rest.
    pub async fn complete_batch(
        &self,
        reqs: Vec<CompletionRequest>,
        max_in_flight: usize,
    ) -> Vec<Result<CompletionResponse, LlmError>> {
        let width = max_in_flight.max(1);
        futures::stream::iter(reqs)
            .map(|req| async move { self.complete(&req).await })
            .buffered(width)
            .collect()
            .await
    }

    fn log_call(
        &self,
        req: &CompletionRequest,
        outcome: &Result<CompletionResponse, LlmError>,
        latency: Duration,
    ) {
        let Some(sink) = &self.transcript else { return };
        let line = serde_json::json!({
            "backend_id": req.backend_id,
            "prompt_hash": prompt_hash(req),
            "n": req.n,
            "ok": outcome.is_ok(),
            "error": outcome.as_ref().err().map(|e| e.to_string()),
            "latency_ms": latency.as_millis() as u64,
        });
        if let Ok(mut w) = sink.lock() {
            let _ = writeln!(w, "{line}");
        }
    }
}

//! In-process backends for tests and offline runs.
//!
//! [`FixtureBackend`] answers from a prompt-hash table: identical request
//! messages always yield identical bytes, which keeps pipeline tests
//! byte-stable with zero network. [`ScriptedBackend`] delegates to a
//! closure and instruments the call sequence (count, concurrency peak) so
//! tests can assert scheduling behavior.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::Deserialize;

use super::{
    prompt_hash, Backend, CompletionRequest, CompletionResponse, LlmError, Message, Usage,
};

fn word_count(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

fn respond(req: &CompletionRequest, texts: Vec<String>, started: Instant) -> CompletionResponse {
    let prompt_tokens: u64 = req.messages.iter().map(|m| word_count(&m.content)).sum();
    let completion_tokens: u64 = texts.iter().map(|t| word_count(t)).sum();
    CompletionResponse {
        texts,
        usage: Usage {
            prompt_tokens,
            completion_tokens,
        },
        latency: started.elapsed(),
    }
}

/// Deterministic map from prompt hash to response text. A request with
/// `n > 1` receives `n` copies of the mapped text.
#[derive(Debug, Default, Clone)]
pub struct FixtureBackend {
    map: HashMap<String, String>,
}

/// One line of a fixture file: either a legible prompt or a precomputed
/// hash, each with its response.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FixtureLine {
    Prompt { prompt: String, response: String },
    Hash { hash: String, response: String },
}

impl FixtureBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Map a single-user-message prompt to a response.
    pub fn insert_prompt(&mut self, prompt: impl Into<String>, response: impl Into<String>) {
        let req = CompletionRequest::user_prompt("fixture", prompt);
        self.map.insert(prompt_hash(&req), response.into());
    }

    /// Map a full message sequence to a response.
    pub fn insert_messages(&mut self, messages: &[Message], response: impl Into<String>) {
        let req = CompletionRequest {
            backend_id: "fixture".into(),
            messages: messages.to_vec(),
            temperature: 0.0,
            max_tokens: 1,
            seed: None,
            n: 1,
        };
        self.map.insert(prompt_hash(&req), response.into());
    }

    /// Map an externally computed [`prompt_hash`] to a response.
    pub fn insert_hash(&mut self, hash: impl Into<String>, response: impl Into<String>) {
        self.map.insert(hash.into(), response.into());
    }

    /// Load a line-delimited JSON fixture file. Each line is either
    /// `{"prompt": ..., "response": ...}` or `{"hash": ..., "response": ...}`.
    pub fn from_jsonl_path(path: impl AsRef<Path>) -> Result<Self, crate::corpus::CorpusError> {
        let lines: Vec<FixtureLine> = crate::corpus::read_jsonl(path)?;
        let mut backend = FixtureBackend::new();
        for line in lines {
            match line {
                FixtureLine::Prompt { prompt, response } => backend.insert_prompt(prompt, response),
                FixtureLine::Hash { hash, response } => backend.insert_hash(hash, response),
            }
        }
        Ok(backend)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[async_trait]
impl Backend for FixtureBackend {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let started = Instant::now();
        let hash = prompt_hash(req);
        match self.map.get(&hash) {
            Some(text) => Ok(respond(req, vec![text.clone(); req.n as usize], started)),
            None => Err(LlmError::Protocol(format!(
                "no fixture for prompt hash {}",
                &hash[..12]
            ))),
        }
    }
}

type Script = dyn Fn(usize, &CompletionRequest) -> Result<Vec<String>, LlmError> + Send + Sync;
type Jitter = dyn Fn(usize) -> Duration + Send + Sync;

/// Programmable backend: the closure receives the 0-based call index and
/// the request and returns the completion texts. Optional per-call latency
/// makes calls overlap so concurrency limits become observable.
pub struct ScriptedBackend {
    script: Box<Script>,
    jitter: Option<Box<Jitter>>,
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new(
        script: impl Fn(usize, &CompletionRequest) -> Result<Vec<String>, LlmError>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        ScriptedBackend {
            script: Box::new(script),
            jitter: None,
            calls: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        }
    }

    /// Sleep for `delay(call_index)` inside each call.
    pub fn with_jitter(
        mut self,
        delay: impl Fn(usize) -> Duration + Send + Sync + 'static,
    ) -> Self {
        self.jitter = Some(Box::new(delay));
        self
    }

    /// Total calls observed so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Highest number of simultaneously outstanding calls observed.
    pub fn peak_in_flight(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl Backend for ScriptedBackend {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let started = Instant::now();
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        let now_in_flight = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now_in_flight, Ordering::SeqCst);
        if let Some(jitter) = &self.jitter {
            tokio::time::sleep(jitter(call)).await;
        }
        let result = (self.script)(call, req);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        result.map(|texts| respond(req, texts, started))
    }
}

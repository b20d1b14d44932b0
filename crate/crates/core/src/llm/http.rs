//! Provider-style chat-completion backend over HTTP.
//!
//! Speaks the common JSON shape — `{"model", "messages", "temperature",
//! "max_tokens", "n", "seed"}` in, `{"choices": [{"message": {"content"}}],
//! "usage"}` out — that most hosted chat APIs accept. The API key is read
//! from a configurable environment variable at construction time and sent
//! as a bearer token; it never appears in configuration files.

use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::Deserialize;

use super::{Backend, CompletionRequest, CompletionResponse, LlmError, Usage};

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    /// Full URL of the chat-completion endpoint.
    pub endpoint: String,
    /// Model name forwarded in the payload.
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout: Duration,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        HttpBackendConfig {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: "LLM_API_KEY".into(),
            timeout: Duration::from_secs(60),
        }
    }
}

pub struct HttpBackend {
    cfg: HttpBackendConfig,
    key: String,
    http: reqwest::Client,
}

impl HttpBackend {
    /// Build a backend, reading the credential from the configured
    /// environment variable.
    pub fn new(cfg: HttpBackendConfig) -> Result<HttpBackend, LlmError> {
        let key = std::env::var(&cfg.api_key_env).map_err(|_| {
            LlmError::InvalidRequest(format!(
                "credential environment variable {} is not set",
                cfg.api_key_env
            ))
        })?;
        let http = reqwest::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| LlmError::Transport(format!("building http client: {e}")))?;
        Ok(HttpBackend { cfg, key, http })
    }
}

/// Request payload in the common chat-completion shape.
fn build_payload(model: &str, req: &CompletionRequest) -> serde_json::Value {
    let mut payload = serde_json::json!({
        "model": model,
        "messages": req.messages,
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
        "n": req.n,
    });
    if let Some(seed) = req.seed {
        payload["seed"] = serde_json::json!(seed);
    }
    payload
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: String,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

/// Decode a success body; enforces that the provider returned `n` choices.
fn parse_success_body(body: &str, n: u32) -> Result<(Vec<String>, Usage), LlmError> {
    let wire: WireResponse = serde_json::from_str(body)
        .map_err(|e| LlmError::Protocol(format!("undecodable response body: {e}")))?;
    if wire.choices.len() != n as usize {
        return Err(LlmError::Protocol(format!(
            "asked for {n} choices, provider returned {}",
            wire.choices.len()
        )));
    }
    let texts = wire
        .choices
        .into_iter()
        .map(|c| c.message.content)
        .collect();
    let usage = wire.usage.unwrap_or_default();
    Ok((
        texts,
        Usage {
            prompt_tokens: usage.prompt_tokens,
            completion_tokens: usage.completion_tokens,
        },
    ))
}

fn classify_status(status: reqwest::StatusCode, body: &str) -> LlmError {
    let snippet: String = body.chars().take(200).collect();
    if status.as_u16() == 429 {
        LlmError::RateLimited(format!("{status}: {snippet}"))
    } else if status.is_server_error() || status.as_u16() == 408 {
        LlmError::Transport(format!("{status}: {snippet}"))
    } else {
        LlmError::InvalidRequest(format!("{status}: {snippet}"))
    }
}

#[async_trait]
impl Backend for HttpBackend {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let started = Instant::now();
        let payload = build_payload(&self.cfg.model, req);
        let response = self
            .http
            .post(&self.cfg.endpoint)
            .bearer_auth(&self.key)
            .json(&payload)
            .send()
            .await
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = response.status();
        let body = response
            .text()
            .await
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(classify_status(status, &body));
        }
        let (texts, usage) = parse_success_body(&body, req.n)?;
        Ok(CompletionResponse {
            texts,
            usage,
            latency: started.elapsed(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Message;

    fn req() -> CompletionRequest {
        CompletionRequest {
            backend_id: "http".into(),
            messages: vec![Message::system("be brief"), Message::user("2+2?")],
            temperature: 0.9,
            max_tokens: 512,
            seed: Some(7),
            n: 2,
        }
    }

    #[test]
    fn payload_shape() {
        let p = build_payload("test-model", &req());
        assert_eq!(p["model"], "test-model");
        assert_eq!(p["temperature"], 0.9);
        assert_eq!(p["max_tokens"], 512);
        assert_eq!(p["n"], 2);
        assert_eq!(p["seed"], 7);
        assert_eq!(p["messages"][0]["role"], "system");
        assert_eq!(p["messages"][1]["content"], "2+2?");
        // Seedless requests omit the field entirely.
        let mut r = req();
        r.seed = None;
        assert!(build_payload("m", &r).get("seed").is_none());
    }

    #[test]
    fn success_body_parsing() {
        let body = r#"{
            "choices": [
                {"message": {"role": "assistant", "content": "4"}},
                {"message": {"role": "assistant", "content": "four"}}
            ],
            "usage": {"prompt_tokens": 12, "completion_tokens": 3}
        }"#;
        let (texts, usage) = parse_success_body(body, 2).unwrap();
        assert_eq!(texts, ["4", "four"]);
        assert_eq!(usage.prompt_tokens, 12);
        assert_eq!(usage.completion_tokens, 3);
    }

    #[test]
    fn wrong_choice_count_is_protocol_error() {
        let body = r#"{"choices": [{"message": {"content": "only one"}}]}"#;
        assert!(matches!(
            parse_success_body(body, 2).unwrap_err(),
            LlmError::Protocol(_)
        ));
    }

    #[test]
    fn undecodable_body_is_protocol_error() {
        assert!(matches!(
            parse_success_body("<html>oops</html>", 1).unwrap_err(),
            LlmError::Protocol(_)
        ));
    }

    #[test]
    fn status_classification() {
        use reqwest::StatusCode;
        assert!(matches!(
            classify_status(StatusCode::TOO_MANY_REQUESTS, ""),
            LlmError::RateLimited(_)
        ));
        assert!(matches!(
            classify_status(StatusCode::BAD_GATEWAY, ""),
            LlmError::Transport(_)
        ));
        assert!(matches!(
            classify_status(StatusCode::REQUEST_TIMEOUT, ""),
            LlmError::Transport(_)
        ));
        assert!(matches!(
            classify_status(StatusCode::UNAUTHORIZED, "bad key"),
            LlmError::InvalidRequest(_)
        ));
        assert!(matches!(
            classify_status(StatusCode::BAD_REQUEST, ""),
            LlmError::InvalidRequest(_)
        ));
    }

    #[test]
    fn missing_credential_is_invalid_request() {
        let cfg = HttpBackendConfig {
            endpoint: "http://localhost/never".into(),
            model: "m".into(),
            api_key_env: "MATHLING_TEST_UNSET_KEY".into(),
            timeout: Duration::from_secs(1),
        };
        std::env::remove_var("MATHLING_TEST_UNSET_KEY");
        match HttpBackend::new(cfg) {
            Err(LlmError::InvalidRequest(msg)) => {
                assert!(msg.contains("MATHLING_TEST_UNSET_KEY"))
            }
            Err(other) => panic!("unexpected error {other:?}"),
            Ok(_) => panic!("expected missing-credential error"),
        }
    }
}

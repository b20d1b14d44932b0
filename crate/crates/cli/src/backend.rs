//! Backend selection: offline prompt→response fixture or HTTP service.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use mathling_core::llm::http::{HttpBackend, HttpBackendConfig};
use mathling_core::llm::mock::FixtureBackend;
use mathling_core::llm::{Backend, Client, RetryConfig};

use crate::config::BackendSection;
use crate::CliError;

/// Build the completion client. A `--fixture` flag wins over the config
/// file's fixture path; with neither a fixture nor an endpoint there is
/// nothing to call. In-flight concurrency is the configured cap, lowered
/// to the worker budget when that is smaller.
pub fn client(
    section: &BackendSection,
    fixture_flag: Option<&Path>,
    jobs: usize,
) -> Result<Client, CliError> {
    let backend: Arc<dyn Backend> = match fixture_flag.or(section.fixture.as_deref()) {
        Some(path) => Arc::new(FixtureBackend::from_jsonl_path(path).map_err(|e| {
            CliError::Runtime(format!("cannot load fixture {}: {e}", path.display()))
        })?),
        None if !section.endpoint.is_empty() => Arc::new(
            HttpBackend::new(HttpBackendConfig {
                endpoint: section.endpoint.clone(),
                model: section.model.clone(),
                api_key_env: section.api_key_env.clone(),
                timeout: Duration::from_secs(section.timeout_secs),
            })
            .map_err(|e| CliError::Runtime(format!("cannot initialize backend: {e}")))?,
        ),
        None => {
            return Err(CliError::Validation(
                "no backend configured: pass --fixture or set [backend] endpoint in the config"
                    .into(),
            ))
        }
    };
    let retry = RetryConfig {
        max_retries: section.retry_cap,
        ..RetryConfig::default()
    };
    let max_in_flight = jobs.min(section.max_in_flight.max(1)).max(1);
    Ok(Client::new(backend, retry, max_in_flight))
}

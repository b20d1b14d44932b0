//! Pipeline configuration: compiled-in defaults, optionally overlaid by a
//! TOML file, then by command-line flags (flags win).
//!
//! Credentials never appear here; the backend section only names the
//! environment variable that holds the API key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mathling_core::dataset::TrainStrategy;
use mathling_core::gate::RetryPolicy;
use mathling_core::rft::SamplingConfig;
use mathling_core::{Lang, Tolerance, Tolerances};

use crate::CliError;

/// Everything a run needs besides its subcommand flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Language set, in the order reports list them. Must be non-empty
    /// and duplicate-free.
    pub languages: Vec<Lang>,
    /// Seed for every randomized step.
    pub seed: u64,
    /// Worker budget: CPU threads and concurrent backend calls.
    pub jobs: usize,
    /// Default dataset strategy for `build` when the flag is omitted.
    pub strategy: Option<TrainStrategy>,
    pub tolerance: ToleranceSection,
    pub retry: RetrySection,
    pub sampling: SamplingConfig,
    pub backend: BackendSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            languages: Lang::ALL.to_vec(),
            seed: 0,
            jobs: 8,
            strategy: None,
            tolerance: ToleranceSection::default(),
            retry: RetrySection::default(),
            sampling: SamplingConfig::default(),
            backend: BackendSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.languages.is_empty() {
            return Err(CliError::Validation(
                "config: language list is empty".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &lang in &self.languages {
            if !seen.insert(lang) {
                return Err(CliError::Validation(format!(
                    "config: duplicate language {lang}"
                )));
            }
        }
        if self.jobs == 0 {
            return Err(CliError::Validation("config: jobs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerance.build()
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.retry.max_attempts,
            answer_check_enabled: self.retry.answer_check,
        }
    }
}

/// Numeric slack for annotation checking and answer comparison.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub annotation_abs: f64,
    pub annotation_rel: f64,
    pub answer_abs: f64,
    pub answer_rel: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        let annotation = Tolerance::annotation();
        let answer = Tolerance::answer();
        ToleranceSection {
            annotation_abs: annotation.abs,
            annotation_rel: annotation.rel,
            answer_abs: answer.abs,
            answer_rel: answer.rel,
        }
    }
}

impl ToleranceSection {
    fn build(self) -> Tolerances {
        Tolerances {
            annotation: Tolerance::new(self.annotation_abs, self.annotation_rel),
            answer: Tolerance::new(self.answer_abs, self.answer_rel),
        }
    }
}

/// Translation retry budget.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrySection {
    /// Failed candidates tolerated before a record is discarded.
    pub max_attempts: u32,
    /// Also require the translated final answer to match the source gold.
    pub answer_check: bool,
}

impl Default for RetrySection {
    fn default() -> Self {
        let policy = RetryPolicy::default();
        RetrySection {
            max_attempts: policy.max_attempts,
            answer_check: policy.answer_check_enabled,
        }
    }
}

/// How completions are obtained. A fixture path selects the offline
/// prompt→response backend; otherwise `endpoint` must name an HTTP
/// chat-completion service whose key is read from the environment
/// variable named by `api_key_env`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
    /// Extra attempts after a retryable transport failure.
    pub retry_cap: u32,
    /// Concurrent in-flight calls; `--jobs` lowers but never raises it.
    pub max_in_flight: usize,
    /// Offline prompt→response fixture (JSONL).
    pub fixture: Option<PathBuf>,
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: "LLM_API_KEY".into(),
            timeout_secs: 60,
            retry_cap: 3,
            max_in_flight: 8,
            fixture: None,
        }
    }
}

/// Read the configuration file when given, otherwise start from defaults.
pub fn load(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let cfg: PipelineConfig = match path {
        None => PipelineConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Runtime(format!("cannot read config {}: {e}", p.display()))
            })?;
            toml::from_str(&text)
                .map_err(|e| CliError::Validation(format!("config {}: {e}", p.display())))?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

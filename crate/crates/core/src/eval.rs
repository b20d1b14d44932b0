//! Evaluation harness: load math test sets, build prompts under several
//! modes, run a backend, score extracted answers, and aggregate accuracy.
//!
//! Two test modes: `parallel_test` asks the question in its own language;
//! `cross_test` asks the English question but instructs the model to
//! answer in the target language. Three prompt styles: the training
//! instruction template, zero-shot chain-of-thought, and a fixed pair of
//! English chain-of-thought exemplars (reproduced byte-for-byte from the
//! original evaluation, spelling quirks included).
//!
//! Accuracy is macro-averaged: mean of per-language accuracies, which for
//! equal-size language branches equals the micro average but stays
//! well-defined on ragged sets. Repeated runs (default 3, distinct seeds)
//! are averaged per language.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::answer::{answers_equal, extract_answer, PhraseConfig};
use crate::corpus::{read_jsonl, CorpusError};
use crate::dataset::instruct_prompt;
use crate::lang::Lang;
use crate::llm::{Client, CompletionRequest, Message};
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestItem {
    pub id: String,
    pub lang: Lang,
    pub question: String,
    pub gold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    ParallelTest,
    CrossTest,
}

impl std::fmt::Display for EvalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvalMode::ParallelTest => "parallel_test",
            EvalMode::CrossTest => "cross_test",
        })
    }
}

impl std::str::FromStr for EvalMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parallel_test" | "parallel" => Ok(EvalMode::ParallelTest),
            "cross_test" | "cross" => Ok(EvalMode::CrossTest),
            other => Err(format!("unknown eval mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prompting {
    #[serde(rename = "instruct_template")]
    InstructTemplate,
    #[serde(rename = "zero_shot_cot")]
    ZeroShotCot,
    #[serde(rename = "en_2shot_cot")]
    En2ShotCot,
}

impl std::fmt::Display for Prompting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Prompting::InstructTemplate => "instruct_template",
            Prompting::ZeroShotCot => "zero_shot_cot",
            Prompting::En2ShotCot => "en_2shot_cot",
        })
    }
}

impl std::str::FromStr for Prompting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "instruct_template" | "instruct" => Ok(Prompting::InstructTemplate),
            "zero_shot_cot" | "zero_shot" => Ok(Prompting::ZeroShotCot),
            "en_2shot_cot" | "en_2shot" => Ok(Prompting::En2ShotCot),
            other => Err(format!("unknown prompting {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub mode: EvalMode,
    pub prompting: Prompting,
    /// Number of repeated runs averaged into the report.
    pub repeats: u32,
    /// Seed for run `r` (falls back to `r + 1` past the end of the list).
    pub seeds: Vec<u64>,
    pub max_tokens: u32,
    pub temperature: f64,
    pub backend_id: String,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mode: EvalMode::ParallelTest,
            prompting: Prompting::InstructTemplate,
            repeats: 3,
            seeds: vec![1, 2, 3],
            max_tokens: 512,
            temperature: 0.0,
            backend_id: "eval".into(),
        }
    }
}

impl EvalConfig {
    fn seed_for(&self, run: usize) -> u64 {
        self.seeds.get(run).copied().unwrap_or(run as u64 + 1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("invalid eval config: {0}")]
    InvalidConfig(String),
    #[error("item {id} ({lang}) has no English question for cross-test")]
    MissingEnglishQuestion { id: String, lang: Lang },
}

// ---------------------------------------------------------------------------
// Test-set loading

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFormat {
    /// Directory of `mgsm_<code>.tsv` files, one `question<TAB>answer`
    /// per line; lines align across languages (same problem, same index).
    Mgsm,
    /// Directory of `msvamp_<code>.jsonl` files, one `{question, gold}`
    /// object per line, aligned across languages.
    Msvamp,
    /// Single JSONL file of `{id, lang, question, gold}` objects.
    Generic,
}

impl std::str::FromStr for TestFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mgsm" => Ok(TestFormat::Mgsm),
            "msvamp" => Ok(TestFormat::Msvamp),
            "generic" => Ok(TestFormat::Generic),
            other => Err(format!("unknown test set format {other:?}")),
        }
    }
}

impl TestFormat {
    fn file_prefix(self) -> &'static str {
        match self {
            TestFormat::Mgsm => "mgsm_",
            TestFormat::Msvamp => "msvamp_",
            TestFormat::Generic => "",
        }
    }

    fn expected_per_lang(self) -> Option<usize> {
        match self {
            TestFormat::Mgsm => Some(250),
            TestFormat::Msvamp => Some(1000),
            TestFormat::Generic => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TestSetError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot infer language from test file name {name:?}")]
    BadFileName { name: String },
    #[error("empty test set at {path}")]
    Empty { path: PathBuf },
}

/// A loaded test set plus non-fatal observations (for example a language
/// branch with an unexpected item count).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTestSet {
    pub items: Vec<TestItem>,
    pub warnings: Vec<String>,
}

fn read_mgsm_file(path: &Path, lang: Lang) -> Result<Vec<TestItem>, TestSetError> {
    let file = std::fs::File::open(path).map_err(|source| TestSetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut items = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| TestSetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (question, answer) = line
            .split_once('\t')
            .ok_or_else(|| TestSetError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected question<TAB>answer".into(),
            })?;
        let gold: f64 =
            answer
                .trim()
                .replace(',', "")
                .parse()
                .map_err(|e| TestSetError::Malformed {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("bad answer {answer:?}: {e}"),
                })?;
        items.push(TestItem {
            id: format!("mgsm-{:04}", items.len()),
            lang,
            question: question.to_string(),
            gold,
        });
    }
    Ok(items)
}

fn read_msvamp_file(path: &Path, lang: Lang) -> Result<Vec<TestItem>, TestSetError> {
    #[derive(Deserialize)]
    struct Line {
        question: String,
        gold: f64,
    }
    let lines: Vec<Line> = read_jsonl(path)?;
    Ok(lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| TestItem {
            id: format!("msvamp-{i:04}"),
            lang,
            question: l.question,
            gold: l.gold,
        })
        .collect())
}

/// Load a test set. Per-language branch files are discovered by name
/// (`<prefix><code>.<ext>`) and read in canonical language order; a
/// branch whose size deviates from the format's published count yields a
/// warning, not an error. An overall empty result is an error.
pub fn load_testset(path: &Path, format: TestFormat) -> Result<LoadedTestSet, TestSetError> {
    let mut items = Vec::new();
    let mut warnings = Vec::new();
    match format {
        TestFormat::Generic => {
            items = read_jsonl::<TestItem>(path)?;
        }
        TestFormat::Mgsm | TestFormat::Msvamp => {
            let prefix = format.file_prefix();
            let mut files: Vec<(Lang, PathBuf)> = Vec::new();
            let entries = std::fs::read_dir(path).map_err(|source| TestSetError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            for entry in entries {
                let entry = entry.map_err(|source| TestSetError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                let name = entry.file_name().to_string_lossy().into_owned();
                let Some(stem) = name.strip_prefix(prefix) else {
                    continue;
                };
                let Some(code) = stem.split('.').next() else {
                    continue;
                };
                let lang = code
                    .parse::<Lang>()
                    .map_err(|_| TestSetError::BadFileName { name: name.clone() })?;
                files.push((lang, entry.path()));
            }
            files.sort();
            for (lang, file) in files {
                let branch = match format {
                    TestFormat::Mgsm => read_mgsm_file(&file, lang)?,
                    _ => read_msvamp_file(&file, lang)?,
                };
                if let Some(expected) = format.expected_per_lang() {
                    if branch.len() != expected {
                        warnings.push(format!(
                            "{}: expected {expected} items, found {}",
                            file.display(),
                            branch.len()
                        ));
                    }
                }
                items.extend(branch);
            }
        }
    }
    if items.is_empty() {
        return Err(TestSetError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok(LoadedTestSet { items, warnings })
}

// ---------------------------------------------------------------------------
// Prompt construction

/// Two-shot English chain-of-thought header, byte-verbatim from the
/// original evaluation prompt (including its spelling and the second
/// exemplar's inconsistent final answer).
pub const TWO_SHOT_TEMPLATE: &str = "Answer the following math probelm step by step in {language}.\nBelow are examples:\nQ: Julia played tag with 18 kids on Monday. She played tag with 10 kids on Tuesday. how many more kids did she play with on Monday than on Tuesday?\nA: Let's think step by step. Julia playsed tag with 18 kids on Monday and 10 kids Tuesday, separately. So the amount of kids that she played with on Monday than on Tuesday is 18-10=8. So the answer is 8.\nQ: Jack had 9 action figures and 10 books on a shelf in his room. later he added 7 more action figures to the shelf. how many more action figures than books were on his shelf ?\nA: Let's think step by step. The amount of action figures that Jack had is 9+7=16. And Jack had 10 books. So the amount of action figures than books on his shelf is 16-10=6. So the answer is 7.";

/// Exemplars plus the item under test.
pub fn two_shot_prompt(language_display: &str, question: &str) -> String {
    format!(
        "{}\nQ: {question}\nA:",
        TWO_SHOT_TEMPLATE.replace("{language}", language_display)
    )
}

/// Bare question with an answer-language instruction and the step-by-step
/// nudge appended.
pub fn zero_shot_prompt(language_display: &str, question: &str) -> String {
    format!("{question}\nPlease answer in {language_display}.\nLet's think step by step.")
}

/// Build the prompt for one item. In cross-test mode the question body is
/// the English variant (`english_question`; items already in English use
/// their own text) while the answer-language instruction still names the
/// item's language.
pub fn build_eval_prompt(
    item: &TestItem,
    english_question: Option<&str>,
    cfg: &EvalConfig,
) -> Result<String, EvalError> {
    let question = match cfg.mode {
        EvalMode::ParallelTest => item.question.as_str(),
        EvalMode::CrossTest if item.lang == Lang::En => item.question.as_str(),
        EvalMode::CrossTest => {
            english_question.ok_or_else(|| EvalError::MissingEnglishQuestion {
                id: item.id.clone(),
                lang: item.lang,
            })?
        }
    };
    let display = item.lang.display_name();
    Ok(match cfg.prompting {
        Prompting::InstructTemplate => instruct_prompt(display, question),
        Prompting::ZeroShotCot => zero_shot_prompt(display, question),
        Prompting::En2ShotCot => two_shot_prompt(display, question),
    })
}

// ---------------------------------------------------------------------------
// Scoring and aggregation

/// True iff a final answer can be extracted and matches gold. Responses
/// with no extractable number score false.
pub fn score(
    response: &str,
    gold: f64,
    lang: Lang,
    phrases: &PhraseConfig,
    tol: Tolerance,
) -> bool {
    extract_answer(response, lang, phrases)
        .map(|e| answers_equal(e.value, gold, tol))
        .unwrap_or(false)
}

/// Raw tallies for one language in one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LangScore {
    pub items: usize,
    pub correct: usize,
}

impl LangScore {
    pub fn accuracy(&self) -> f64 {
        if self.items == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.items as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScores {
    pub seed: u64,
    pub per_lang: BTreeMap<Lang, LangScore>,
}

/// One model call in the audit transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemOutcome {
    pub repeat: u32,
    pub seed: u64,
    pub id: String,
    pub lang: Lang,
    pub response: String,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub runs: Vec<RunScores>,
    /// Per-language accuracy averaged over runs (percent, unrounded).
    pub per_lang: BTreeMap<Lang, f64>,
    /// Mean of the per-language accuracies.
    pub macro_avg: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<ItemOutcome>,
}

/// Mean of per-language accuracies; 0 for an empty map.
pub fn macro_average(per_lang: &BTreeMap<Lang, f64>) -> f64 {
    if per_lang.is_empty() {
        0.0
    } else {
        per_lang.values().sum::<f64>() / per_lang.len() as f64
    }
}

impl EvalReport {
    /// Assemble a report from known per-language accuracies (used when
    /// importing published rows for comparison).
    pub fn from_per_lang(config: EvalConfig, per_lang: BTreeMap<Lang, f64>) -> EvalReport {
        let macro_avg = macro_average(&per_lang);
        EvalReport {
            config,
            runs: Vec::new(),
            per_lang,
            macro_avg,
            transcript: Vec::new(),
        }
    }
}

/// Evaluate every item `cfg.repeats` times and aggregate. Individual
/// call failures score 0 and are recorded in the transcript; they never
/// abort the run.
pub async fn run_eval(
    client: &Client,
    items: &[TestItem],
    cfg: &EvalConfig,
    phrases: &PhraseConfig,
    tol: Tolerance,
) -> Result<EvalReport, EvalError> {
    if cfg.repeats < 1 {
        return Err(EvalError::InvalidConfig("repeats must be >= 1".into()));
    }
    let english: BTreeMap<&str, &str> = items
        .iter()
        .filter(|i| i.lang == Lang::En)
        .map(|i| (i.id.as_str(), i.question.as_str()))
        .collect();
    let mut prompts = Vec::with_capacity(items.len());
    for item in items {
        prompts.push(build_eval_prompt(
            item,
            english.get(item.id.as_str()).copied(),
            cfg,
        )?);
    }

    let mut runs = Vec::new();
    let mut transcript = Vec::new();
    for repeat in 0..cfg.repeats {
        let seed = cfg.seed_for(repeat as usize);
        let requests: Vec<CompletionRequest> = prompts
            .iter()
            .map(|p| CompletionRequest {
                backend_id: cfg.backend_id.clone(),
                messages: vec![Message::user(p.clone())],
                temperature: cfg.temperature,
                max_tokens: cfg.max_tokens,
                seed: Some(seed),
                n: 1,
            })
            .collect();
        let results = client
            .complete_batch(requests, client.max_in_flight())
            .await;
        let mut per_lang: BTreeMap<Lang, LangScore> = BTreeMap::new();
        for (item, result) in items.iter().zip(results) {
            let (response, error) = match result {
                Ok(resp) => (resp.texts.into_iter().next().unwrap_or_default(), None),
                Err(e) => (String::new(), Some(e.to_string())),
            };
            let correct = score(&response, item.gold, item.lang, phrases, tol);
            let tally = per_lang.entry(item.lang).or_default();
            tally.items += 1;
            tally.correct += correct as usize;
            transcript.push(ItemOutcome {
                repeat,
                seed,
                id: item.id.clone(),
                lang: item.lang,
                response,
                correct,
                error,
            });
        }
        runs.push(RunScores { seed, per_lang });
    }

    let mut per_lang: BTreeMap<Lang, f64> = BTreeMap::new();
    for run in &runs {
        for (&lang, tally) in &run.per_lang {
            *per_lang.entry(lang).or_default() += tally.accuracy();
        }
    }
    for v in per_lang.values_mut() {
        *v /= runs.len() as f64;
    }
    let macro_avg = macro_average(&per_lang);
    Ok(EvalReport {
        config: cfg.clone(),
        runs,
        per_lang,
        macro_avg,
        transcript,
    })
}

// ---------------------------------------------------------------------------
// Rendering

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Delimited,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "delimited" | "csv" => Ok(ReportFormat::Delimited),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

/// One header row (languages plus "Avg.") and one data row per report,
/// accuracies to one decimal.
pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    let langs: Vec<Lang> = report.per_lang.keys().copied().collect();
    let mut header = vec!["Config".to_string()];
    header.extend(langs.iter().map(|l| l.label().to_string()));
    header.push("Avg.".into());
    let mut rows: Vec<Vec<String>> = Vec::new();
    if !report.per_lang.is_empty() {
        let mut row = vec![format!(
            "{}/{}",
            report.config.mode, report.config.prompting
        )];
        row.extend(langs.iter().map(|l| format!("{:.1}", report.per_lang[l])));
        row.push(format!("{:.1}", report.macro_avg));
        rows.push(row);
    }
    match format {
        ReportFormat::Delimited => {
            let mut out = vec![header.join(",")];
            out.extend(rows.into_iter().map(|r| r.join(",")));
            out.join("\n")
        }
        ReportFormat::Table => {
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let render_row = |cells: &[String]| {
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        if i == 0 {
                            format!("{c:<width$}", width = widths[i])
                        } else {
                            format!("{c:>width$}", width = widths[i])
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let mut out = vec![render_row(&header).trim_end().to_string()];
            out.extend(rows.iter().map(|r| render_row(r).trim_end().to_string()));
            out.join("\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::llm::mock::{FixtureBackend, ScriptedBackend};
    use crate::llm::{Backend, LlmError, RetryConfig};
    use crate::tolerance::Tolerances;

    fn item(id: &str, lang: Lang, question: &str, gold: f64) -> TestItem {
        TestItem {
            id: id.into(),
            lang,
            question: question.into(),
            gold,
        }
    }

    fn eval_client(backend: Arc<dyn Backend>) -> Client {
        let mut retry = RetryConfig::default();
        retry.base_delay = std::time::Duration::from_millis(1);
        Client::new(backend, retry, 8)
    }

    #[test]
    fn mgsm_directory_loads_aligned_branches() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("mgsm_en.tsv"),
            "How many legs do 3 dogs have?\t12\nA farm has 1,000 hens. Half?\t500\n",
        )
        .unwrap();
        std::fs::write(
            dir.path().join("mgsm_de.tsv"),
            "Wie viele Beine haben 3 Hunde?\t12\nEin Hof hat 1.000 Hennen?\t500\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let loaded = load_testset(dir.path(), TestFormat::Mgsm).unwrap();
        assert_eq!(loaded.items.len(), 4);
        // En precedes De in canonical order regardless of file-name order.
        assert_eq!(loaded.items[0].lang, Lang::En);
        assert_eq!(loaded.items[2].lang, Lang::De);
        assert_eq!(
            loaded.items[0].id, loaded.items[2].id,
            "branches align by line"
        );
        assert_eq!(loaded.items[1].gold, 500.0);
        assert_eq!(loaded.warnings.len(), 2, "both branches deviate from 250");
        assert!(loaded.warnings[0].contains("expected 250"));
    }

    #[test]
    fn msvamp_directory_loads_jsonl_branches() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("msvamp_th.jsonl"),
            "{\"question\":\"2+2?\",\"gold\":4}\n{\"question\":\"3+3?\",\"gold\":6}\n",
        )
        .unwrap();
        let loaded = load_testset(dir.path(), TestFormat::Msvamp).unwrap();
        assert_eq!(loaded.items.len(), 2);
        assert_eq!(loaded.items[0].lang, Lang::Th);
        assert_eq!(loaded.items[0].id, "msvamp-0000");
        assert!(loaded.warnings[0].contains("expected 1000"));
    }

    #[test]
    fn generic_jsonl_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("items.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"x1\",\"lang\":\"ru\",\"question\":\"5*5?\",\"gold\":25}\n",
        )
        .unwrap();
        let loaded = load_testset(&path, TestFormat::Generic).unwrap();
        assert_eq!(loaded.items[0].lang, Lang::Ru);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.jsonl");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(
            load_testset(&empty, TestFormat::Generic),
            Err(TestSetError::Empty { .. })
        ));
        assert!(matches!(
            load_testset(dir.path(), TestFormat::Mgsm),
            Err(TestSetError::Empty { .. })
        ));
        std::fs::write(dir.path().join("mgsm_xx.tsv"), "q\t1\n").unwrap();
        assert!(matches!(
            load_testset(dir.path(), TestFormat::Mgsm),
            Err(TestSetError::BadFileName { .. })
        ));
        let bad = dir.path().join("bad.tsv");
        std::fs::write(&bad, "no tab here\n").unwrap();
        assert!(matches!(
            read_mgsm_file(&bad, Lang::En),
            Err(TestSetError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn zero_shot_prompt_shape() {
        let it = item("i1", Lang::De, "Wie viele Eier?", 9.0);
        let cfg = EvalConfig {
            prompting: Prompting::ZeroShotCot,
            ..EvalConfig::default()
        };
        let p = build_eval_prompt(&it, None, &cfg).unwrap();
        assert_eq!(
            p,
            "Wie viele Eier?\nPlease answer in German.\nLet's think step by step."
        );
        assert!(p.ends_with("Let's think step by step."));
    }

    #[test]
    fn two_shot_prompt_contains_both_exemplars() {
        let it = item("i1", Lang::Zh, "三只狗有几条腿？", 12.0);
        let cfg = EvalConfig {
            prompting: Prompting::En2ShotCot,
            ..EvalConfig::default()
        };
        let p = build_eval_prompt(&it, None, &cfg).unwrap();
        assert!(p.starts_with("Answer the following math probelm step by step in Chinese.\n"));
        assert!(p.contains("Julia played tag with 18 kids on Monday."));
        assert!(p.contains("Jack had 9 action figures and 10 books"));
        assert!(p.contains("So the answer is 8."));
        assert!(p.ends_with("Q: 三只狗有几条腿？\nA:"));
    }

    #[test]
    fn instruct_template_matches_training_prompt() {
        let it = item("i1", Lang::Es, "¿Cuántos huevos?", 4.0);
        let cfg = EvalConfig::default();
        let p = build_eval_prompt(&it, None, &cfg).unwrap();
        assert_eq!(p, instruct_prompt("Spanish", "¿Cuántos huevos?"));
    }

    #[test]
    fn cross_test_uses_english_question_with_target_instruction() {
        let it = item("i1", Lang::Zh, "三只狗有几条腿？", 12.0);
        let cfg = EvalConfig {
            mode: EvalMode::CrossTest,
            ..EvalConfig::default()
        };
        let p = build_eval_prompt(&it, Some("How many legs do 3 dogs have?"), &cfg).unwrap();
        assert!(p.contains("### Instruction:\nHow many legs do 3 dogs have?"));
        assert!(p.contains("Please answer in Chinese."));
        assert!(!p.contains("三只狗"));
        // Missing English variant violates the precondition.
        assert!(matches!(
            build_eval_prompt(&it, None, &cfg),
            Err(EvalError::MissingEnglishQuestion { .. })
        ));
    }

    #[test]
    fn parallel_and_cross_agree_on_english_items() {
        let it = item("i1", Lang::En, "How many legs do 3 dogs have?", 12.0);
        for prompting in [
            Prompting::InstructTemplate,
            Prompting::ZeroShotCot,
            Prompting::En2ShotCot,
        ] {
            let parallel = EvalConfig {
                mode: EvalMode::ParallelTest,
                prompting,
                ..EvalConfig::default()
            };
            let cross = EvalConfig {
                mode: EvalMode::CrossTest,
                prompting,
                ..EvalConfig::default()
            };
            assert_eq!(
                build_eval_prompt(&it, None, &parallel).unwrap(),
                build_eval_prompt(&it, None, &cross).unwrap()
            );
        }
    }

    #[test]
    fn scoring_examples() {
        let phrases = PhraseConfig::default();
        let tol = Tolerances::default().answer;
        assert!(score(
            "Cada día son 9 x 2 = 18. La respuesta es 18 todos los días",
            18.0,
            Lang::Es,
            &phrases,
            tol
        ));
        assert!(!score("羊は118頭です", 260.0, Lang::Ja, &phrases, tol));
        assert!(!score("", 5.0, Lang::En, &phrases, tol));
    }

    #[tokio::test]
    async fn scripted_seven_of_ten_scores_seventy() {
        let items: Vec<TestItem> = (0..10)
            .map(|i| {
                item(
                    &format!("q{i}"),
                    Lang::En,
                    &format!("What is {i} + 0?"),
                    i as f64,
                )
            })
            .collect();
        let cfg = EvalConfig {
            repeats: 1,
            ..EvalConfig::default()
        };
        let mut fixture = FixtureBackend::new();
        for (i, it) in items.iter().enumerate() {
            let prompt = build_eval_prompt(it, None, &cfg).unwrap();
            let reply = if i < 7 {
                format!("The answer is {i}")
            } else {
                format!("The answer is {}", i + 100)
            };
            fixture.insert_prompt(prompt, reply);
        }
        let client = eval_client(Arc::new(fixture));
        let report = run_eval(
            &client,
            &items,
            &cfg,
            &PhraseConfig::default(),
            Tolerances::default().answer,
        )
        .await
        .unwrap();
        assert_eq!(report.runs.len(), 1);
        let en = report.runs[0].per_lang[&Lang::En];
        assert_eq!((en.items, en.correct), (10, 7));
        assert_eq!(report.per_lang[&Lang::En], 70.0);
        assert_eq!(report.macro_avg, 70.0);
    }

    #[tokio::test]
    async fn repeats_are_deterministic_and_seeded() {
        let items = vec![
            item("a", Lang::En, "What is 2 + 3?", 5.0),
            item("b", Lang::Fr, "Combien font 2 + 3 ?", 5.0),
        ];
        let backend = Arc::new(ScriptedBackend::new(|_, req| {
            assert_eq!(req.temperature, 0.0);
            assert_eq!(req.max_tokens, 512);
            assert!(matches!(req.seed, Some(1..=3)));
            Ok(vec!["The answer is 5".into()])
        }));
        let client = eval_client(backend.clone());
        let cfg = EvalConfig::default();
        let report = run_eval(
            &client,
            &items,
            &cfg,
            &PhraseConfig::default(),
            Tolerances::default().answer,
        )
        .await
        .unwrap();
        assert_eq!(report.runs.len(), 3);
        let seeds: Vec<u64> = report.runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![1, 2, 3]);
        for run in &report.runs {
            assert_eq!(run.per_lang, report.runs[0].per_lang);
        }
        assert_eq!(report.per_lang[&Lang::En], 100.0);
        assert_eq!(report.macro_avg, 100.0);
        assert_eq!(report.transcript.len(), 6);
        assert_eq!(backend.calls(), 6);
    }

    #[tokio::test]
    async fn failed_calls_score_zero_without_aborting() {
        let items = vec![
            item("good1", Lang::En, "What is 1 + 0?", 1.0),
            item("bad", Lang::En, "item-bad marker", 1.0),
            item("good2", Lang::En, "What is 1 * 1?", 1.0),
        ];
        let backend = Arc::new(ScriptedBackend::new(|_, req| {
            if req.messages[0].content.contains("item-bad") {
                Err(LlmError::InvalidRequest("rejected".into()))
            } else {
                Ok(vec!["The answer is 1".into()])
            }
        }));
        let client = eval_client(backend);
        let cfg = EvalConfig {
            repeats: 1,
            ..EvalConfig::default()
        };
        let report = run_eval(
            &client,
            &items,
            &cfg,
            &PhraseConfig::default(),
            Tolerances::default().answer,
        )
        .await
        .unwrap();
        let en = report.runs[0].per_lang[&Lang::En];
        assert_eq!((en.items, en.correct), (3, 2));
        let failed = report.transcript.iter().find(|t| t.id == "bad").unwrap();
        assert!(!failed.correct);
        assert!(failed.error.as_deref().unwrap().contains("rejected"));
        assert_eq!(failed.response, "");
    }

    #[tokio::test]
    async fn zero_repeats_is_invalid() {
        let backend = Arc::new(ScriptedBackend::new(|_, _| Ok(vec!["x".into()])));
        let client = eval_client(backend);
        let cfg = EvalConfig {
            repeats: 0,
            ..EvalConfig::default()
        };
        let err = run_eval(
            &client,
            &[item("a", Lang::En, "q", 1.0)],
            &cfg,
            &PhraseConfig::default(),
            Tolerances::default().answer,
        )
        .await;
        assert!(matches!(err, Err(EvalError::InvalidConfig(_))));
    }

    #[test]
    fn macro_average_properties() {
        let mut per_lang = BTreeMap::new();
        per_lang.insert(Lang::En, 50.0);
        per_lang.insert(Lang::Sw, 30.0);
        assert_eq!(macro_average(&per_lang), 40.0);
        let lo = per_lang.values().cloned().fold(f64::INFINITY, f64::min);
        let hi = per_lang.values().cloned().fold(0.0, f64::max);
        let avg = macro_average(&per_lang);
        assert!(lo <= avg && avg <= hi);
        assert_eq!(macro_average(&BTreeMap::new()), 0.0);
    }

    #[test]
    fn report_rendering() {
        let mut per_lang = BTreeMap::new();
        per_lang.insert(Lang::En, 50.0);
        per_lang.insert(Lang::Sw, 30.0);
        let report = EvalReport::from_per_lang(EvalConfig::default(), per_lang);
        let csv = render_report(&report, ReportFormat::Delimited);
        assert_eq!(
            csv,
            "Config,En,Sw,Avg.\nparallel_test/instruct_template,50.0,30.0,40.0"
        );
        let table = render_report(&report, ReportFormat::Table);
        let mut lines = table.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("Config"));
        assert!(header.contains("Avg."));
        assert!(lines.next().unwrap().contains("40.0"));

        let empty = EvalReport::from_per_lang(EvalConfig::default(), BTreeMap::new());
        assert_eq!(
            render_report(&empty, ReportFormat::Delimited),
            "Config,Avg."
        );
        assert_eq!(
            render_report(&empty, ReportFormat::Table).lines().count(),
            1
        );
    }

    #[test]
    fn published_two_shot_row_averages_to_46_3() {
        // Per-language accuracies of the strongest 2-shot baseline row.
        let values = [
            (Lang::En, 67.2),
            (Lang::Sw, 40.0),
            (Lang::Zh, 52.8),
            (Lang::Bn, 7.6),
            (Lang::De, 62.0),
            (Lang::Es, 61.2),
            (Lang::Fr, 59.2),
            (Lang::Ja, 46.8),
            (Lang::Ru, 50.4),
            (Lang::Th, 15.6),
        ];
        let per_lang: BTreeMap<Lang, f64> = values.into_iter().collect();
        let cfg = EvalConfig {
            prompting: Prompting::En2ShotCot,
            ..EvalConfig::default()
        };
        let report = EvalReport::from_per_lang(cfg, per_lang);
        assert!((report.macro_avg - 46.28).abs() < 1e-9);
        let rendered = render_report(&report, ReportFormat::Delimited);
        assert!(rendered.ends_with(",46.3"));
        assert!(rendered.contains("en_2shot_cot"));
    }
}

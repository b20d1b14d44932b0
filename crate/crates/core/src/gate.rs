//! Translation gating: prompt construction, consistency verification, and
//! the retry/discard loop.
//!
//! A machine translation of a solution is accepted only if its calculator
//! annotations all check out arithmetically and their canonical forms match
//! the English source's, in order. Optionally the translated text's final
//! answer must also equal the source gold. A record that fails gating for
//! `max_attempts` consecutive translations is discarded and logged so
//! per-language corpus shortfalls stay auditable.

use serde::{Deserialize, Serialize};

use crate::answer::{answers_equal, extract_answer, PhraseConfig};
use crate::calc::{check_annotation, parse_annotations, CheckStatus};
use crate::corpus::ProblemRecord;
use crate::lang::Lang;
use crate::llm::{Client, CompletionRequest, LlmError, Message};
use crate::tolerance::Tolerances;

/// One worked translation example shown in the prompt: an English question
/// and reasoning path with their reference translations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub question: String,
    pub path: String,
    pub translated_question: String,
    pub translated_path: String,
}

/// The two default worked examples (English to Spanish). The same pair is
/// shown for every target language; only the language name in the
/// surrounding instructions changes.
pub fn default_exemplars() -> Vec<Exemplar> {
    vec![
        Exemplar {
            question: "Weng earns $12 an hour for babysitting. Yesterday, she just did 50 minutes \
                       of babysitting. How much did she earn?"
                .into(),
            path: "Babysitting is $12/hour = $12/60 minutes = $<<12/60=0.2>>0.2 per minute. Weng \
                   did babysitting for 50 minutes, so she earned $0.2 x 50 = $<<0.2*50=10>>10."
                .into(),
            translated_question: "Weng gana 12 dólares la hora por cuidar niños. Ayer cuidó niños \
                                  durante 50 minutos. ¿Cuánto ganó?"
                .into(),
            translated_path: "Cuidar niños cuesta $12/hora = $12/60 minutos = $<<12/60=0.2>>0.2 \
                              por minute. Weng cuidó niños durante 50 minutos, por lo que ganó \
                              $0.2 x 50 = $<<0.2*50=10>>10."
                .into(),
        },
        Exemplar {
            question: "Julie is reading a 120-page book. Yesterday, she was able to read 12 pages \
                       and today, she read twice as many pages as yesterday. If she wants to read \
                       half of the remaining pages tomorrow, how many pages should she read?"
                .into(),
            path: "Since today is the last day of the month, Julie would like to finish an entire \
                   book before tomorrow. She has read a total of 12 + 24 = <<12+24=36>>36 pages \
                   in two days. There are 120 - 36 = <<120-36=84>>84 pages left to be read. \
                   Hence, Julie should read 84/2 = <<84/2=42>>42 pages tomorrow."
                .into(),
            translated_question: "Julie está leyendo un libro de 120 páginas. Ayer pudo leer 12 \
                                  páginas y hoy leyó el doble que ayer. Si quiere leer la mitad \
                                  de las páginas restantes mañana, ¿cuántas páginas debería leer?"
                .into(),
            translated_path: "Como hoy es el último día del mes, a Julie le gustaría terminar un \
                              libro completo antes de mañana. Ha leído un total de 12 + 24 = \
                              <<12+24=36>>36 páginas en dos días. Quedan 120 - 36 = \
                              <<120-36=84>>84 páginas por leer. Por lo tanto , Julie debería \
                              leer 84/2 = <<84/2=42>>42 páginas mañana."
                .into(),
        },
    ]
}

#[derive(Debug, thiserror::Error)]
pub enum GateError {
    #[error("translation prompt needs at least one exemplar")]
    NoExemplars,
}

/// The instruction block of the translation prompt: persona line, worked
/// examples, and the four rules, with `target` substituted for the
/// language placeholder.
pub fn render_translation_instructions(target: &str, exemplars: &[Exemplar]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "You are a professional {target} translator and spelling corrector. Please translate \
         the given math question and its reasoning path into {target}.\n"
    ));
    s.push_str("Below are examples:\n");
    for ex in exemplars {
        s.push_str(&format!("Q: {}\n", ex.question));
        s.push_str(&format!("P: {}\n", ex.path));
        s.push_str(&format!("T-Q: {}\n", ex.translated_question));
        s.push_str(&format!("T-P: {}\n", ex.translated_path));
    }
    s.push_str("Please Keep in mind that:\n");
    s.push_str(
        "(1) keep the translations consistent for names of people and places within the \
         sentences.\n",
    );
    s.push_str(
        "(2) Preserve the mathematical formula within the \"<< >>\" brackets when translating.\n",
    );
    s.push_str(&format!("(3) You must translate the text into {target}.\n"));
    s.push_str("(4) You must follow the output format with: \"T-Q:... T-P:...\"");
    s
}

/// Full translation prompt: instructions plus the source question and
/// reasoning path to translate. Deterministic.
pub fn build_translation_prompt(
    src: &ProblemRecord,
    target: Lang,
    exemplars: &[Exemplar],
) -> Result<String, GateError> {
    if exemplars.is_empty() {
        return Err(GateError::NoExemplars);
    }
    Ok(format!(
        "{}\nQ: {}\nP: {}",
        render_translation_instructions(target.display_name(), exemplars),
        src.question,
        src.answer_text
    ))
}

/// Pull the translated question and path out of a `T-Q:... T-P:...`
/// response. Returns `None` when either marker is missing.
pub fn parse_translation_response(text: &str) -> Option<(String, String)> {
    let q_at = text.find("T-Q:")?;
    let rest = &text[q_at + 4..];
    let p_rel = rest.find("T-P:")?;
    let question = rest[..p_rel].trim().to_string();
    let path = rest[p_rel + 4..].trim().to_string();
    if question.is_empty() || path.is_empty() {
        return None;
    }
    Some((question, path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStatus {
    Pass,
    Malformed,
    ArithmeticError,
    Inconsistent,
    AnswerMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub status: GateStatus,
    /// Index of the first offending annotation, for malformed/arithmetic
    /// failures and ordered inconsistencies.
    pub failing_index: Option<usize>,
    pub src_canon: Vec<String>,
    pub trans_canon: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == GateStatus::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Consecutive failed translations tolerated before discarding.
    pub max_attempts: u32,
    /// Also require the translated text's final answer to match the source
    /// gold. The formula check alone reproduces the original gating; this
    /// extra check is defensive and on by default.
    pub answer_check_enabled: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            answer_check_enabled: true,
        }
    }
}

/// Whether formula consistency compares annotation sequences in order or
/// as multisets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyMode {
    #[default]
    Ordered,
    Unordered,
}

/// Discard-log line: which record failed gating for which language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscardEntry {
    pub id: String,
    pub lang: Lang,
    pub status: GateStatus,
    pub attempt_count: u32,
}

/// Outcome of [`Gate::translate_with_retry`].
#[derive(Debug, Clone, PartialEq)]
pub enum TranslationOutcome {
    Verified(ProblemRecord),
    Discarded {
        entry: DiscardEntry,
        last_report: VerificationReport,
    },
}

/// Settings for issuing translation calls.
#[derive(Debug, Clone)]
pub struct TranslateSettings {
    pub backend_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for TranslateSettings {
    fn default() -> Self {
        TranslateSettings {
            backend_id: "translator".into(),
            temperature: 0.0,
            max_tokens: 1024,
        }
    }
}

/// The verification context: tolerances, retry policy, phrase table for the
/// answer check, consistency mode, and prompt exemplars.
#[derive(Debug, Clone)]
pub struct Gate {
    pub tolerances: Tolerances,
    pub policy: RetryPolicy,
    pub phrases: PhraseConfig,
    pub mode: ConsistencyMode,
    pub exemplars: Vec<Exemplar>,
}

impl Default for Gate {
    fn default() -> Self {
        Gate {
            tolerances: Tolerances::default(),
            policy: RetryPolicy::default(),
            phrases: PhraseConfig::default(),
            mode: ConsistencyMode::Ordered,
            exemplars: default_exemplars(),
        }
    }
}

impl Gate {
    /// Check a translated record against its English source.
    ///
    /// Failure precedence: the first malformed or arithmetically wrong
    /// annotation in the translation, then formula-sequence inconsistency,
    /// then (if enabled) final-answer disagreement with the source gold.
    pub fn verify(&self, src: &ProblemRecord, trans: &ProblemRecord) -> VerificationReport {
        let src_canon: Vec<String> = parse_annotations(&src.answer_text)
            .iter()
            .filter_map(|a| a.canonical())
            .collect();
        let trans_annotations = parse_annotations(&trans.answer_text);
        let mut trans_canon: Vec<String> = Vec::with_capacity(trans_annotations.len());
        for (i, a) in trans_annotations.iter().enumerate() {
            let outcome = check_annotation(a, self.tolerances.annotation);
            match outcome.status {
                CheckStatus::Ok => trans_canon.push(a.canonical().expect("ok implies well-formed")),
                CheckStatus::Malformed => {
                    return VerificationReport {
                        status: GateStatus::Malformed,
                        failing_index: Some(i),
                        src_canon,
                        trans_canon,
                    }
                }
                CheckStatus::ArithmeticMismatch | CheckStatus::DivisionByZero => {
                    return VerificationReport {
                        status: GateStatus::ArithmeticError,
                        failing_index: Some(i),
                        src_canon,
                        trans_canon,
                    }
                }
            }
        }

        let consistent = match self.mode {
            ConsistencyMode::Ordered => src_canon == trans_canon,
            ConsistencyMode::Unordered => {
                let mut a = src_canon.clone();
                let mut b = trans_canon.clone();
                a.sort();
                b.sort();
                a == b
            }
        };
        if !consistent {
            let failing_index = src_canon
                .iter()
                .zip(trans_canon.iter())
                .position(|(s, t)| s != t)
                .or(Some(src_canon.len().min(trans_canon.len())));
            return VerificationReport {
                status: GateStatus::Inconsistent,
                failing_index,
                src_canon,
                trans_canon,
            };
        }

        if self.policy.answer_check_enabled {
            let extracted = extract_answer(&trans.answer_text, trans.lang, &self.phrases);
            let agrees = extracted
                .map(|e| answers_equal(e.value, src.gold, self.tolerances.answer))
                .unwrap_or(false);
            if !agrees {
                return VerificationReport {
                    status: GateStatus::AnswerMismatch,
                    failing_index: None,
                    src_canon,
                    trans_canon,
                };
            }
        }

        VerificationReport {
            status: GateStatus::Pass,
            failing_index: None,
            src_canon,
            trans_canon,
        }
    }

    /// Translate one record, verifying each candidate, until one passes or
    /// `max_attempts` consecutive candidates fail (then the record is
    /// discarded). Backend/transport errors abort and propagate without
    /// consuming an attempt, so an outage never discards data.
    pub async fn translate_with_retry(
        &self,
        client: &Client,
        src: &ProblemRecord,
        target: Lang,
        settings: &TranslateSettings,
    ) -> Result<TranslationOutcome, LlmError> {
        let prompt = build_translation_prompt(src, target, &self.exemplars)
            .map_err(|e| LlmError::InvalidRequest(e.to_string()))?;
        let mut last_report: Option<VerificationReport> = None;
        for attempt in 1..=self.policy.max_attempts {
            let req = CompletionRequest {
                backend_id: settings.backend_id.clone(),
                messages: vec![Message::user(prompt.clone())],
                temperature: settings.temperature,
                max_tokens: settings.max_tokens,
                seed: None,
                n: 1,
            };
            let resp = client.complete(&req).await?;
            let text = resp.texts.first().map(String::as_str).unwrap_or("");
            let report = match parse_translation_response(text) {
                Some((question, answer_text)) => {
                    let candidate = ProblemRecord {
                        id: src.id.clone(),
                        lang: target,
                        question,
                        answer_text,
                        gold: src.gold,
                        options: src.options.clone(),
                        attempts: attempt,
                        origin: src.origin,
                    };
                    let report = self.verify(src, &candidate);
                    if report.passed() {
                        return Ok(TranslationOutcome::Verified(candidate));
                    }
                    report
                }
                None => VerificationReport {
                    status: GateStatus::Malformed,
                    failing_index: None,
                    src_canon: Vec::new(),
                    trans_canon: Vec::new(),
                },
            };
            last_report = Some(report);
        }
        let last_report = last_report.expect("max_attempts >= 1");
        Ok(TranslationOutcome::Discarded {
            entry: DiscardEntry {
                id: src.id.clone(),
                lang: target,
                status: last_report.status,
                attempt_count: self.policy.max_attempts,
            },
            last_report,
        })
    }
}

/// Per-language and overall agreement percentages (one decimal) from a set
/// of (language, consistent?) judgments.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgreementReport {
    pub per_lang: std::collections::BTreeMap<Lang, f64>,
    pub overall: f64,
}

pub fn agreement_rate(judgments: &[(Lang, bool)]) -> AgreementReport {
    fn pct(hits: usize, total: usize) -> f64 {
        (hits as f64 / total as f64 * 1000.0).round() / 10.0
    }
    if judgments.is_empty() {
        return AgreementReport::default();
    }
    let mut counts: std::collections::BTreeMap<Lang, (usize, usize)> = Default::default();
    let mut hits = 0usize;
    for &(lang, ok) in judgments {
        let c = counts.entry(lang).or_default();
        c.1 += 1;
        if ok {
            c.0 += 1;
            hits += 1;
        }
    }
    AgreementReport {
        per_lang: counts
            .into_iter()
            .map(|(l, (h, t))| (l, pct(h, t)))
            .collect(),
        overall: pct(hits, judgments.len()),
    }
}

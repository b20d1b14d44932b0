//! Final-answer extraction from chain-of-thought text.
//!
//! Three rules, tried in order:
//!
//! 1. **Gold marker** — `#### N` as used by gold solutions; the last marker
//!    wins.
//! 2. **Answer phrase** — a configurable per-language phrase list
//!    ("the answer is", "la respuesta es", ...); the first number after the
//!    last phrase occurrence wins.
//! 3. **Last number** — the last standalone number in the text. Numbers
//!    inside `<<...>>` calculator annotations are not standalone, but the
//!    echoed result right after `>>` is.
//!
//! All rules skip annotation interiors, strip grouping commas, and ignore a
//! leading currency symbol (matches start at the first digit). A minus sign
//! is honored only when directly attached to the digits and not preceded by
//! another digit, so subtraction chains like `18-10=8` never produce `-10`.

use std::collections::BTreeMap;
use std::ops::Range;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::calc::parse_annotations;
use crate::lang::Lang;
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractRule {
    AnswerPhrase,
    GoldMarker,
    LastNumber,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedAnswer {
    pub value: f64,
    pub rule: ExtractRule,
    /// Byte range of the matched number in the source text.
    pub span: Range<usize>,
}

static NUMBER_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"-?(?:\d(?:[\d,]*\d)?(?:\.\d+)?|\.\d+)").unwrap());

/// A number occurrence with grouping commas stripped and the sign dropped
/// when it belongs to surrounding arithmetic rather than the number.
fn numbers_in(text: &str, skip: &[Range<usize>]) -> Vec<(f64, Range<usize>)> {
    let mut out = Vec::new();
    for m in NUMBER_RE.find_iter(text) {
        let mut start = m.start();
        let mut body = m.as_str();
        if let Some(rest) = body.strip_prefix('-') {
            let attached_to_digit = text[..start]
                .bytes()
                .last()
                .is_some_and(|b| b.is_ascii_digit());
            if attached_to_digit {
                start += 1;
                body = rest;
            }
        }
        let span = start..m.end();
        if skip
            .iter()
            .any(|r| span.start < r.end && r.start < span.end)
        {
            continue;
        }
        let cleaned: String = body.chars().filter(|&c| c != ',').collect();
        let Ok(value) = cleaned.parse::<f64>() else {
            continue;
        };
        if value.is_finite() {
            out.push((value, span));
        }
    }
    out
}

/// Extract the final answer using an explicit phrase list.
pub fn extract_final_answer(text: &str, phrases: &[String]) -> Option<ExtractedAnswer> {
    let skip: Vec<Range<usize>> = parse_annotations(text)
        .into_iter()
        .map(|a| a.span)
        .collect();
    let numbers = numbers_in(text, &skip);
    if numbers.is_empty() {
        return None;
    }

    if let Some(marker) = text.rfind("####") {
        let after = marker + "####".len();
        if let Some((value, span)) = numbers.iter().find(|(_, s)| s.start >= after) {
            return Some(ExtractedAnswer {
                value: *value,
                rule: ExtractRule::GoldMarker,
                span: span.clone(),
            });
        }
    }

    let lowered = text.to_lowercase();
    let mut phrase_ends: Vec<usize> = Vec::new();
    for phrase in phrases {
        let needle = phrase.to_lowercase();
        if needle.is_empty() {
            continue;
        }
        let mut from = 0;
        while let Some(rel) = lowered[from..].find(&needle) {
            let at = from + rel;
            phrase_ends.push(at + needle.len());
            from = at + needle.len();
        }
    }
    phrase_ends.sort_unstable();
    for end in phrase_ends.iter().rev() {
        // to_lowercase can shift byte offsets for some scripts; clamp and
        // fall back gracefully rather than indexing out of range.
        let end = (*end).min(text.len());
        if let Some((value, span)) = numbers.iter().find(|(_, s)| s.start >= end) {
            return Some(ExtractedAnswer {
                value: *value,
                rule: ExtractRule::AnswerPhrase,
                span: span.clone(),
            });
        }
    }

    numbers.last().map(|(value, span)| ExtractedAnswer {
        value: *value,
        rule: ExtractRule::LastNumber,
        span: span.clone(),
    })
}

/// Extract using the configured phrases for `lang` (plus the English
/// defaults, which chain-of-thought models emit in any language).
pub fn extract_answer(text: &str, lang: Lang, config: &PhraseConfig) -> Option<ExtractedAnswer> {
    extract_final_answer(text, &config.effective(lang))
}

/// Numeric agreement for scoring: `|a - b| <= max(1e-3, 1e-4 * |b|)`.
pub fn answers_equal(a: f64, b: f64, tol: Tolerance) -> bool {
    tol.close(a, b)
}

/// Per-language answer-phrase patterns.
///
/// The file format is one pattern per line under `[code]` group headers:
///
/// ```text
/// [en]
/// the answer is
///
/// [es]
/// la respuesta es
/// ```
///
/// Blank lines and `#` comments are ignored. Matching is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseConfig {
    per_lang: BTreeMap<Lang, Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum PhraseConfigError {
    #[error("line {line}: pattern before any [lang] header")]
    PatternOutsideGroup { line: usize },
    #[error("line {line}: unknown language code {code:?}")]
    UnknownLang { line: usize, code: String },
}

impl Default for PhraseConfig {
    fn default() -> Self {
        let mut per_lang = BTreeMap::new();
        let phrases = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        per_lang.insert(Lang::En, phrases(&["the answer is"]));
        per_lang.insert(Lang::Sw, phrases(&["jibu ni"]));
        per_lang.insert(Lang::Zh, phrases(&["答案是"]));
        per_lang.insert(Lang::Bn, phrases(&["উত্তর হল", "উত্তর হচ্ছে"]));
        per_lang.insert(
            Lang::De,
            phrases(&["die antwort ist", "die antwort lautet"]),
        );
        per_lang.insert(Lang::Es, phrases(&["la respuesta es"]));
        per_lang.insert(Lang::Fr, phrases(&["la réponse est"]));
        per_lang.insert(Lang::Ja, phrases(&["答えは"]));
        per_lang.insert(Lang::Ru, phrases(&["ответ:", "ответ —", "ответ равен"]));
        per_lang.insert(Lang::Th, phrases(&["คำตอบคือ"]));
        PhraseConfig { per_lang }
    }
}

impl PhraseConfig {
    /// Parse the group-header file format described on [`PhraseConfig`].
    pub fn parse(text: &str) -> Result<PhraseConfig, PhraseConfigError> {
        let mut per_lang: BTreeMap<Lang, Vec<String>> = BTreeMap::new();
        let mut current: Option<Lang> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(code) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let lang = code
                    .parse::<Lang>()
                    .map_err(|_| PhraseConfigError::UnknownLang {
                        line: idx + 1,
                        code: code.to_string(),
                    })?;
                current = Some(lang);
                per_lang.entry(lang).or_default();
                continue;
            }
            let Some(lang) = current else {
                return Err(PhraseConfigError::PatternOutsideGroup { line: idx + 1 });
            };
            per_lang.entry(lang).or_default().push(line.to_string());
        }
        Ok(PhraseConfig { per_lang })
    }

    pub fn patterns_for(&self, lang: Lang) -> &[String] {
        self.per_lang.get(&lang).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Patterns for `lang` joined with the English set: responses frequently
    /// conclude in English regardless of the requested language.
    pub fn effective(&self, lang: Lang) -> Vec<String> {
        let mut out: Vec<String> = self.patterns_for(lang).to_vec();
        if lang != Lang::En {
            for p in self.patterns_for(Lang::En) {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en(text: &str) -> Option<ExtractedAnswer> {
        extract_answer(text, Lang::En, &PhraseConfig::default())
    }

    #[test]
    fn phrase_rule_wins_over_last_number() {
        let got = en("Julia played with 18-10=8. So the answer is 8.").unwrap();
        assert_eq!(got.value, 8.0);
        assert_eq!(got.rule, ExtractRule::AnswerPhrase);
    }

    #[test]
    fn annotation_interior_skipped_echo_kept() {
        let text = "por lo que gana 9 * 2 = $<<9*2=18>>18 todos los días en el mercado.";
        let got = extract_answer(text, Lang::Es, &PhraseConfig::default()).unwrap();
        assert_eq!(got.value, 18.0);
        assert_eq!(got.rule, ExtractRule::LastNumber);
        assert_eq!(&text[got.span.clone()], "18");
        assert!(got.span.start > text.find(">>").unwrap());
    }

    #[test]
    fn empty_and_numberless() {
        assert_eq!(en(""), None);
        assert_eq!(en("no digits at all"), None);
    }

    #[test]
    fn gold_marker_takes_precedence() {
        let got = en("work 3+4=7 here. The answer is 9.\n#### 7").unwrap();
        assert_eq!(got.value, 7.0);
        assert_eq!(got.rule, ExtractRule::GoldMarker);
        // The last marker wins.
        let got = en("#### 3 revised\n#### 5").unwrap();
        assert_eq!(got.value, 5.0);
    }

    #[test]
    fn subtraction_is_not_negative() {
        let got = en("the difference 18-10").unwrap();
        assert_eq!(got.value, 10.0);
        let got = en("it was -5 degrees").unwrap();
        assert_eq!(got.value, -5.0);
    }

    #[test]
    fn currency_and_commas() {
        assert_eq!(en("she makes $18 daily").unwrap().value, 18.0);
        assert_eq!(en("total of 1,234,567 units").unwrap().value, 1_234_567.0);
        assert_eq!(en("#### 1,080").unwrap().value, 1080.0);
    }

    #[test]
    fn decimals_and_bare_fraction() {
        assert_eq!(en("that is $0.2 per minute").unwrap().value, 0.2);
        assert_eq!(en("roughly .5 of the total").unwrap().value, 0.5);
    }

    #[test]
    fn cjk_adjacent_digits() {
        let text = "部屋の合計は90-8=<<90-8=82>>82部屋である。";
        let got = extract_answer(text, Lang::Ja, &PhraseConfig::default()).unwrap();
        assert_eq!(got.value, 82.0);
        assert_eq!(got.rule, ExtractRule::LastNumber);
    }

    #[test]
    fn plain_equation_text_without_annotations() {
        let got = extract_answer(
            "Insgesamt sind das 204 + 160 + 330 = 694 US-Dollar.",
            Lang::De,
            &PhraseConfig::default(),
        )
        .unwrap();
        assert_eq!(got.value, 694.0);
    }

    #[test]
    fn localized_phrases() {
        let got = extract_answer(
            "计算得出 3+4=7。答案是 7。",
            Lang::Zh,
            &PhraseConfig::default(),
        )
        .unwrap();
        assert_eq!(got.value, 7.0);
        assert_eq!(got.rule, ExtractRule::AnswerPhrase);
        // English phrasing still recognized under a non-English language.
        let got = extract_answer(
            "18-10=8. So the answer is 8.",
            Lang::Zh,
            &PhraseConfig::default(),
        )
        .unwrap();
        assert_eq!(got.rule, ExtractRule::AnswerPhrase);
        assert_eq!(got.value, 8.0);
    }

    #[test]
    fn phrase_without_following_number_falls_back() {
        let got = en("7 items. the answer is unclear").unwrap();
        assert_eq!(got.rule, ExtractRule::LastNumber);
        assert_eq!(got.value, 7.0);
    }

    #[test]
    fn spans_index_source_text() {
        let text = "she sells 9 eggs for $2, making $18";
        let got = en(text).unwrap();
        assert_eq!(&text[got.span.clone()], "18");
    }

    #[test]
    fn answers_equal_tolerances() {
        let tol = Tolerance::answer();
        assert!(answers_equal(18.0, 18.0, tol));
        assert!(answers_equal(0.2, 0.2000004, tol));
        assert!(answers_equal(10000.0, 10000.9, tol));
        assert!(!answers_equal(260.0, 118.0, tol));
        assert!(!answers_equal(18.0, 16.0, tol));
    }

    #[test]
    fn phrase_config_parsing() {
        let cfg = PhraseConfig::parse(
            "# comment\n[en]\nthe answer is\nanswer:\n\n[es]\nla respuesta es\n",
        )
        .unwrap();
        assert_eq!(cfg.patterns_for(Lang::En), ["the answer is", "answer:"]);
        assert_eq!(cfg.patterns_for(Lang::Es), ["la respuesta es"]);
        assert!(cfg.patterns_for(Lang::Th).is_empty());
        // Effective set folds in the English phrases.
        assert_eq!(
            cfg.effective(Lang::Es),
            ["la respuesta es", "the answer is", "answer:"]
        );

        assert!(matches!(
            PhraseConfig::parse("stray pattern"),
            Err(PhraseConfigError::PatternOutsideGroup { line: 1 })
        ));
        assert!(matches!(
            PhraseConfig::parse("[xx]\n"),
            Err(PhraseConfigError::UnknownLang { line: 1, .. })
        ));
    }
}

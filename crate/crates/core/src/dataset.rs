//! Instruction-dataset assembly from a verified multilingual corpus.
//!
//! Four strategies pair questions with answers:
//!
//! * **parallel** — question and answer in the same language;
//! * **cross** — English question, target-language answer (the English
//!   pairs themselves included, so both strategies have equal cardinality);
//! * **mix** — union of the two with exact duplicates (the English pairs)
//!   emitted once;
//! * **mix_all** — every ordered (question language, answer language) pair,
//!   which on ten fully translated languages yields ten times the parallel
//!   volume. A seeded sampled-pairs variant bounds the blow-up.
//!
//! Problems missing a translation are skipped for pairs involving that
//! language; only cross-building treats a missing English source as an
//! error. Output order is deterministic: problem id, then the caller's
//! language order, then corpus order within duplicates.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Origin, ProblemRecord};
use crate::lang::Lang;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStrategy {
    Parallel,
    Cross,
    Mix,
    MixAll,
}

impl TrainStrategy {
    pub const ALL: [TrainStrategy; 4] = [
        TrainStrategy::Parallel,
        TrainStrategy::Cross,
        TrainStrategy::Mix,
        TrainStrategy::MixAll,
    ];
}

impl std::fmt::Display for TrainStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrainStrategy::Parallel => "parallel",
            TrainStrategy::Cross => "cross",
            TrainStrategy::Mix => "mix",
            TrainStrategy::MixAll => "mix_all",
        })
    }
}

impl std::str::FromStr for TrainStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parallel" => Ok(TrainStrategy::Parallel),
            "cross" => Ok(TrainStrategy::Cross),
            "mix" => Ok(TrainStrategy::Mix),
            "mix_all" | "mix-all" => Ok(TrainStrategy::MixAll),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

/// One training example: rendered prompt plus the raw query/response pair
/// so the template can be swapped without rebuilding the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub id: String,
    pub strategy: TrainStrategy,
    pub q_lang: Lang,
    pub a_lang: Lang,
    pub prompt: String,
    pub query: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Origin::is_base")]
    pub origin: Origin,
}

/// Instruction template. `{language}` is replaced by the answer language's
/// display name and `{query}` by the question text.
pub const INSTRUCT_TEMPLATE: &str = "Below is an instruction that describes a task.\nWrite a response that appropriately completes the request in {language}. Please answer in {language}.\n\n### Instruction:\n{query}\n\n### Response:";

/// Fill [`INSTRUCT_TEMPLATE`] for an answer language and query.
pub fn instruct_prompt(language_display: &str, query: &str) -> String {
    INSTRUCT_TEMPLATE
        .replace("{language}", language_display)
        .replace("{query}", query)
}

/// Render (or re-render) the prompt for a record.
pub fn render_prompt(rec: &InstructionRecord) -> String {
    instruct_prompt(rec.a_lang.display_name(), &rec.query)
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("problem {id:?} has a {lang} answer but no English source question")]
    MissingEnglish { id: String, lang: Lang },
}

/// Corpus indexed as id -> lang -> records (corpus order preserved within
/// a language, so base records precede augmentations appended later).
struct Index<'a> {
    by_id: BTreeMap<&'a str, BTreeMap<Lang, Vec<&'a ProblemRecord>>>,
}

impl<'a> Index<'a> {
    fn new(corpus: &'a [ProblemRecord]) -> Self {
        let mut by_id: BTreeMap<&str, BTreeMap<Lang, Vec<&ProblemRecord>>> = BTreeMap::new();
        for r in corpus {
            by_id
                .entry(r.id.as_str())
                .or_default()
                .entry(r.lang)
                .or_default()
                .push(r);
        }
        Index { by_id }
    }

    /// Question text for (id, lang): the first record's, preferring base
    /// origin. Augmented paths share their problem's question.
    fn question(&self, id: &str, lang: Lang) -> Option<&'a str> {
        let records = self.by_id.get(id)?.get(&lang)?;
        records
            .iter()
            .find(|r| r.origin == Origin::Base)
            .or_else(|| records.first())
            .map(|r| r.question.as_str())
    }
}

fn make_record(
    strategy: TrainStrategy,
    id: &str,
    q_lang: Lang,
    query: &str,
    answer: &ProblemRecord,
) -> InstructionRecord {
    InstructionRecord {
        id: id.to_string(),
        strategy,
        q_lang,
        a_lang: answer.lang,
        prompt: instruct_prompt(answer.lang.display_name(), query),
        query: query.to_string(),
        response: answer.answer_text.clone(),
        origin: answer.origin,
    }
}

/// Question and answer in the same language, one record per corpus record
/// whose language is requested.
pub fn build_parallel(corpus: &[ProblemRecord], langs: &[Lang]) -> Vec<InstructionRecord> {
    let index = Index::new(corpus);
    let mut out = Vec::new();
    for (&id, by_lang) in &index.by_id {
        for &l in langs {
            for r in by_lang.get(&l).map(Vec::as_slice).unwrap_or(&[]) {
                out.push(make_record(TrainStrategy::Parallel, id, l, &r.question, r));
            }
        }
    }
    out
}

/// English question, language-l answer, for every requested answer
/// language including English itself.
pub fn build_cross(
    corpus: &[ProblemRecord],
    langs: &[Lang],
) -> Result<Vec<InstructionRecord>, BuildError> {
    let index = Index::new(corpus);
    let mut out = Vec::new();
    for (&id, by_lang) in &index.by_id {
        let english = index.question(id, Lang::En);
        for &l in langs {
            for r in by_lang.get(&l).map(Vec::as_slice).unwrap_or(&[]) {
                let Some(en_q) = english else {
                    return Err(BuildError::MissingEnglish {
                        id: id.to_string(),
                        lang: l,
                    });
                };
                out.push(make_record(TrainStrategy::Cross, id, Lang::En, en_q, r));
            }
        }
    }
    Ok(out)
}

fn dedup_exact(records: Vec<InstructionRecord>) -> Vec<InstructionRecord> {
    let mut seen: HashSet<(String, Lang, Lang, String)> = HashSet::new();
    records
        .into_iter()
        .filter(|r| seen.insert((r.id.clone(), r.q_lang, r.a_lang, r.response.clone())))
        .collect()
}

/// Parallel and cross records together, exact duplicates (the English
/// self-pairs, present in both) emitted once.
pub fn build_mix(
    corpus: &[ProblemRecord],
    langs: &[Lang],
) -> Result<Vec<InstructionRecord>, BuildError> {
    let mut records = build_parallel(corpus, langs);
    records.extend(build_cross(corpus, langs)?);
    for r in &mut records {
        r.strategy = TrainStrategy::Mix;
    }
    Ok(dedup_exact(records))
}

/// Every ordered (question language, answer language) pair available for
/// each problem.
pub fn build_mix_all(corpus: &[ProblemRecord], langs: &[Lang]) -> Vec<InstructionRecord> {
    let index = Index::new(corpus);
    let mut out = Vec::new();
    for (&id, by_lang) in &index.by_id {
        for &lq in langs {
            let Some(query) = index.question(id, lq) else {
                continue;
            };
            for &la in langs {
                for r in by_lang.get(&la).map(Vec::as_slice).unwrap_or(&[]) {
                    out.push(make_record(TrainStrategy::MixAll, id, lq, query, r));
                }
            }
        }
    }
    out
}

/// Sampled variant of [`build_mix_all`]: per problem, keep at most
/// `pairs_per_problem` of its ordered pairs, chosen without replacement by
/// a seeded generator. Deterministic for a given seed; the result is a
/// subset of the full product.
pub fn build_mix_all_sampled(
    corpus: &[ProblemRecord],
    langs: &[Lang],
    pairs_per_problem: usize,
    seed: u64,
) -> Vec<InstructionRecord> {
    let full = build_mix_all(corpus, langs);
    let mut by_id: BTreeMap<String, Vec<InstructionRecord>> = BTreeMap::new();
    for r in full {
        by_id.entry(r.id.clone()).or_default().push(r);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (_, group) in by_id {
        let keep: Vec<usize> = {
            let mut idx: Vec<usize> = (0..group.len()).collect();
            idx.shuffle(&mut rng);
            idx.truncate(pairs_per_problem);
            idx.sort_unstable();
            idx
        };
        let mut group = group;
        for (offset, i) in keep.into_iter().enumerate() {
            out.push(group.swap_remove(i - offset));
        }
    }
    out
}

/// Build under a strategy chosen at runtime.
pub fn build(
    corpus: &[ProblemRecord],
    langs: &[Lang],
    strategy: TrainStrategy,
) -> Result<Vec<InstructionRecord>, BuildError> {
    match strategy {
        TrainStrategy::Parallel => Ok(build_parallel(corpus, langs)),
        TrainStrategy::Cross => build_cross(corpus, langs),
        TrainStrategy::Mix => build_mix(corpus, langs),
        TrainStrategy::MixAll => Ok(build_mix_all(corpus, langs)),
    }
}

/// Per-language record counts (by answer language) and their sum.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_lang: BTreeMap<Lang, usize>,
    pub total: usize,
}

pub fn corpus_stats(records: &[InstructionRecord]) -> CorpusStats {
    let mut per_lang: BTreeMap<Lang, usize> = BTreeMap::new();
    for r in records {
        *per_lang.entry(r.a_lang).or_default() += 1;
    }
    CorpusStats {
        total: per_lang.values().sum(),
        per_lang,
    }
}

/// Counts for a problem corpus (one line per record's own language).
pub fn problem_stats(records: &[ProblemRecord]) -> CorpusStats {
    let mut per_lang: BTreeMap<Lang, usize> = BTreeMap::new();
    for r in records {
        *per_lang.entry(r.lang).or_default() += 1;
    }
    CorpusStats {
        total: per_lang.values().sum(),
        per_lang,
    }
}

/// Tab-separated stats table: language codes across the header, counts
/// below, with an Overall column.
pub fn render_stats_table(stats: &CorpusStats, langs: &[Lang]) -> String {
    let mut header: Vec<String> = langs.iter().map(|l| l.label().to_string()).collect();
    header.push("Overall".into());
    let mut row: Vec<String> = langs
        .iter()
        .map(|l| stats.per_lang.get(l).copied().unwrap_or(0).to_string())
        .collect();
    row.push(stats.total.to_string());
    format!("{}\n{}", header.join("\t"), row.join("\t"))
}

//! Rejection sampling of reasoning paths.
//!
//! For each (question, language) the sampler draws `per_model_k`
//! completions per model at high temperature, keeps only paths whose
//! final answer matches the gold answer and whose calculator annotations
//! all check out, and deduplicates by formula identity: two paths count
//! as the same reasoning iff they carry the same multiset of canonical
//! expressions (claimed results are excluded — filtered paths already
//! have correct ones). An ordered-sequence key is available behind
//! [`DedupKeyMode`] for stricter identity. Surviving paths become
//! additional corpus records tagged with their sampled origin.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::answer::{answers_equal, extract_answer, PhraseConfig};
use crate::calc::{check_annotation, parse_annotations, CalcAnnotation};
use crate::corpus::{Origin, ProblemRecord};
use crate::dataset::instruct_prompt;
use crate::lang::Lang;
use crate::llm::{Client, CompletionRequest, Message};
use crate::tolerance::Tolerances;

/// Which backend produced a path and with what sampling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOrigin {
    pub model: String,
    pub seed: u64,
    pub temperature: f64,
}

/// One sampled chain-of-thought solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningPath {
    pub lang: Lang,
    pub text: String,
    pub final_answer: Option<f64>,
    pub origin: PathOrigin,
}

impl ReasoningPath {
    /// Build a path from raw completion text, extracting the final answer
    /// with the language's phrase patterns.
    pub fn from_text(lang: Lang, text: String, origin: PathOrigin, phrases: &PhraseConfig) -> Self {
        let final_answer = extract_answer(&text, lang, phrases).map(|e| e.value);
        ReasoningPath {
            lang,
            text,
            final_answer,
            origin,
        }
    }

    /// Annotations are always re-derived from the text, so they cannot
    /// drift from it.
    pub fn annotations(&self) -> Vec<CalcAnnotation> {
        parse_annotations(&self.text)
    }
}

/// All paths sampled for one (problem, language).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPool {
    pub problem_id: String,
    pub lang: Lang,
    pub gold: f64,
    /// Sampling budget: completions requested, not necessarily obtained.
    pub budget_k: u32,
    pub paths: Vec<ReasoningPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub temperature: f64,
    /// Explicit seeds for the per-model draws; draw `j` falls back to
    /// seed `j` when the list is shorter.
    pub seeds: Vec<u64>,
    pub per_model_k: u32,
    pub models: Vec<String>,
    pub max_tokens: u32,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            temperature: 0.9,
            seeds: Vec::new(),
            per_model_k: 25,
            models: vec!["sampler".into()],
            max_tokens: 512,
        }
    }
}

impl SamplingConfig {
    fn validate(&self) -> Result<(), SamplingError> {
        if !(self.temperature >= 0.0) {
            return Err(SamplingError::InvalidConfig(
                "temperature must be >= 0".into(),
            ));
        }
        if self.per_model_k < 1 {
            return Err(SamplingError::InvalidConfig(
                "per_model_k must be >= 1".into(),
            ));
        }
        if self.models.is_empty() {
            return Err(SamplingError::InvalidConfig(
                "at least one model backend id is required".into(),
            ));
        }
        Ok(())
    }

    fn seed_for(&self, draw: usize) -> u64 {
        self.seeds.get(draw).copied().unwrap_or(draw as u64)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SamplingError {
    #[error("invalid sampling config: {0}")]
    InvalidConfig(String),
}

/// Draw `per_model_k` completions per model for one problem. Draws that
/// fail even after client retries are dropped (the pool simply comes up
/// short of `budget_k`); large sampling jobs should not die on one draw.
pub async fn sample_paths(
    client: &Client,
    problem: &ProblemRecord,
    cfg: &SamplingConfig,
    phrases: &PhraseConfig,
) -> Result<PathPool, SamplingError> {
    cfg.validate()?;
    let prompt = instruct_prompt(problem.lang.display_name(), &problem.question);
    let mut requests = Vec::new();
    let mut origins = Vec::new();
    for model in &cfg.models {
        for draw in 0..cfg.per_model_k as usize {
            let seed = cfg.seed_for(draw);
            requests.push(CompletionRequest {
                backend_id: model.clone(),
                messages: vec![Message::user(prompt.clone())],
                temperature: cfg.temperature,
                max_tokens: cfg.max_tokens,
                seed: Some(seed),
                n: 1,
            });
            origins.push(PathOrigin {
                model: model.clone(),
                seed,
                temperature: cfg.temperature,
            });
        }
    }
    let results = client
        .complete_batch(requests, client.max_in_flight())
        .await;
    let mut paths = Vec::new();
    for (result, origin) in results.into_iter().zip(origins) {
        if let Ok(resp) = result {
            if let Some(text) = resp.texts.into_iter().next() {
                paths.push(ReasoningPath::from_text(
                    problem.lang,
                    text,
                    origin,
                    phrases,
                ));
            }
        }
    }
    Ok(PathPool {
        problem_id: problem.id.clone(),
        lang: problem.lang,
        gold: problem.gold,
        budget_k: cfg.per_model_k * cfg.models.len() as u32,
        paths,
    })
}

/// Why a sampled path was dropped from the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    WrongAnswer,
    BadAnnotation,
    Duplicate,
}

/// Filter gate: `None` means the path passes (correct final answer and
/// every annotation checks ok). Answer is checked first, mirroring the
/// two-stage elimination.
fn filter_reason(path: &ReasoningPath, gold: f64, tols: &Tolerances) -> Option<DropReason> {
    match path.final_answer {
        Some(a) if answers_equal(a, gold, tols.answer) => {}
        _ => return Some(DropReason::WrongAnswer),
    }
    for annotation in path.annotations() {
        if !check_annotation(&annotation, tols.annotation).is_ok() {
            return Some(DropReason::BadAnnotation);
        }
    }
    None
}

/// Keep exactly the paths with the right answer and sound arithmetic;
/// order preserved.
pub fn filter_pool(pool: &PathPool, tols: &Tolerances) -> Vec<ReasoningPath> {
    pool.paths
        .iter()
        .filter(|p| filter_reason(p, pool.gold, tols).is_none())
        .cloned()
        .collect()
}

/// How two paths are compared for formula identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupKeyMode {
    /// Multiset of canonical expressions: reorderings of the same
    /// calculations are not distinct reasoning.
    #[default]
    ExprMultiset,
    /// Ordered sequence of canonical expressions.
    ExprSequence,
}

/// The path's formula key under the given mode. Only well-formed
/// annotations contribute; claimed results are excluded.
pub fn formula_key(path: &ReasoningPath, mode: DedupKeyMode) -> Vec<String> {
    let mut key: Vec<String> = path
        .annotations()
        .iter()
        .filter_map(CalcAnnotation::canonical_expr)
        .collect();
    if mode == DedupKeyMode::ExprMultiset {
        key.sort_unstable();
    }
    key
}

/// Greedy first-seen scan: a path is kept iff its formula key differs
/// from every already-kept path's key. Stable in input order.
pub fn dedup_paths(paths: Vec<ReasoningPath>, mode: DedupKeyMode) -> Vec<ReasoningPath> {
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    paths
        .into_iter()
        .filter(|p| seen.insert(formula_key(p, mode)))
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum MergeError {
    #[error("cannot merge pools for different problems ({0:?} vs {1:?})")]
    ProblemMismatch(String, String),
    #[error("cannot merge pools for different languages ({0} vs {1})")]
    LangMismatch(Lang, Lang),
    #[error("cannot merge pools with different gold answers ({0} vs {1})")]
    GoldMismatch(f64, f64),
    #[error("no pools to merge")]
    Empty,
}

/// Fuse pools from different model runs over the same (problem, language):
/// filter each, concatenate in pool order, deduplicate jointly.
pub fn merge_pools(
    pools: &[PathPool],
    tols: &Tolerances,
    mode: DedupKeyMode,
) -> Result<Vec<ReasoningPath>, MergeError> {
    let first = pools.first().ok_or(MergeError::Empty)?;
    let mut all = Vec::new();
    for pool in pools {
        if pool.problem_id != first.problem_id {
            return Err(MergeError::ProblemMismatch(
                first.problem_id.clone(),
                pool.problem_id.clone(),
            ));
        }
        if pool.lang != first.lang {
            return Err(MergeError::LangMismatch(first.lang, pool.lang));
        }
        if pool.gold != first.gold {
            return Err(MergeError::GoldMismatch(first.gold, pool.gold));
        }
        all.extend(filter_pool(pool, tols));
    }
    Ok(dedup_paths(all, mode))
}

/// Average distinct-path count per question, grouped by sampling budget
/// and language, reported to one decimal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathStats {
    pub per_k: BTreeMap<u32, BTreeMap<Lang, f64>>,
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Mean of `paths.len()` over pools sharing (budget_k, lang). Call on
/// pools that already hold their deduplicated survivors.
pub fn pool_stats(pools: &[PathPool]) -> PathStats {
    let mut sums: BTreeMap<(u32, Lang), (usize, usize)> = BTreeMap::new();
    for pool in pools {
        let cell = sums.entry((pool.budget_k, pool.lang)).or_default();
        cell.0 += pool.paths.len();
        cell.1 += 1;
    }
    let mut per_k: BTreeMap<u32, BTreeMap<Lang, f64>> = BTreeMap::new();
    for ((k, lang), (total, count)) in sums {
        per_k
            .entry(k)
            .or_default()
            .insert(lang, round1(total as f64 / count as f64));
    }
    PathStats { per_k }
}

/// Tab-separated table: budgets down the side, languages across the top.
pub fn render_path_stats(stats: &PathStats, langs: &[Lang]) -> String {
    let mut lines = Vec::new();
    let mut header = vec!["k".to_string()];
    header.extend(langs.iter().map(|l| l.label().to_string()));
    lines.push(header.join("\t"));
    for (k, row) in &stats.per_k {
        let mut cells = vec![k.to_string()];
        cells.extend(langs.iter().map(|l| {
            row.get(l)
                .map(|v| format!("{v:.1}"))
                .unwrap_or_else(|| "-".into())
        }));
        lines.push(cells.join("\t"));
    }
    lines.join("\n")
}

/// One line per sampled path in the audit dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDumpLine {
    pub problem_id: String,
    pub lang: Lang,
    pub model: String,
    pub seed: u64,
    pub text: String,
    pub final_answer: Option<f64>,
    pub kept: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_reason: Option<DropReason>,
}

/// Audit view of a pool: every path with its keep/drop verdict under the
/// filter and the greedy dedup.
pub fn pool_dump(pool: &PathPool, tols: &Tolerances, mode: DedupKeyMode) -> Vec<PathDumpLine> {
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    pool.paths
        .iter()
        .map(|p| {
            let reason = filter_reason(p, pool.gold, tols).or_else(|| {
                if seen.insert(formula_key(p, mode)) {
                    None
                } else {
                    Some(DropReason::Duplicate)
                }
            });
            PathDumpLine {
                problem_id: pool.problem_id.clone(),
                lang: pool.lang,
                model: p.origin.model.clone(),
                seed: p.origin.seed,
                text: p.text.clone(),
                final_answer: p.final_answer,
                kept: reason.is_none(),
                drop_reason: reason,
            }
        })
        .collect()
}

/// Turn surviving paths into corpus records for the same problem id,
/// tagged as sampled so downstream stats can tell them apart from the
/// base corpus.
pub fn augmented_records(problem: &ProblemRecord, paths: &[ReasoningPath]) -> Vec<ProblemRecord> {
    paths
        .iter()
        .map(|p| {
            let mut rec = ProblemRecord::new(
                problem.id.clone(),
                p.lang,
                problem.question.clone(),
                p.text.clone(),
                problem.gold,
            );
            rec.origin = Origin::Xrft;
            rec
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::llm::mock::ScriptedBackend;
    use crate::llm::{LlmError, RetryConfig};

    fn origin(seed: u64) -> PathOrigin {
        PathOrigin {
            model: "m".into(),
            seed,
            temperature: 0.9,
        }
    }

    fn path(seed: u64, text: &str) -> ReasoningPath {
        ReasoningPath::from_text(
            Lang::En,
            text.into(),
            origin(seed),
            &PhraseConfig::default(),
        )
    }

    fn pool_of(gold: f64, paths: Vec<ReasoningPath>) -> PathPool {
        PathPool {
            problem_id: "p1".into(),
            lang: Lang::En,
            gold,
            budget_k: paths.len() as u32,
            paths,
        }
    }

    #[test]
    fn path_from_text_extracts_answer_and_annotations() {
        let p = path(0, "She sells 16 - 7 = <<16-7=9>>9 eggs. The answer is 9");
        assert_eq!(p.final_answer, Some(9.0));
        let anns = p.annotations();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].canonical_expr().as_deref(), Some("16-7"));
    }

    #[test]
    fn filter_keeps_correct_answers_only() {
        let pool = pool_of(
            10.0,
            vec![
                path(0, "<<5*2=10>>10. The answer is 10"),
                path(1, "<<5+5=10>>10. The answer is 10"),
                path(2, "<<5*2=10>>10 minus one. The answer is 9"),
            ],
        );
        let kept = filter_pool(&pool, &Tolerances::default());
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].origin.seed, 0);
        assert_eq!(kept[1].origin.seed, 1);
    }

    #[test]
    fn filter_drops_bad_or_malformed_annotations() {
        let tols = Tolerances::default();
        // Wrong arithmetic inside the annotation, right final answer.
        let wrong = pool_of(5.0, vec![path(0, "<<2+2=5>>5. The answer is 5")]);
        assert!(filter_pool(&wrong, &tols).is_empty());
        // Malformed annotation (no '='), right final answer.
        let malformed = pool_of(4.0, vec![path(0, "<<2+2>>4. The answer is 4")]);
        assert!(filter_pool(&malformed, &tols).is_empty());
        // No annotations at all is fine.
        let bare = pool_of(4.0, vec![path(0, "The answer is 4")]);
        assert_eq!(filter_pool(&bare, &tols).len(), 1);
        // Empty pool stays empty.
        assert!(filter_pool(&pool_of(1.0, vec![]), &tols).is_empty());
    }

    #[test]
    fn missing_answer_counts_as_wrong() {
        let pool = pool_of(3.0, vec![path(0, "I cannot solve this.")]);
        assert!(filter_pool(&pool, &Tolerances::default()).is_empty());
        let dump = pool_dump(&pool, &Tolerances::default(), DedupKeyMode::default());
        assert_eq!(dump[0].drop_reason, Some(DropReason::WrongAnswer));
    }

    #[test]
    fn dedup_collapses_identical_formulas() {
        let a = path(0, "First <<16-7=9>>9, then <<9*2=18>>18. The answer is 18");
        let b = path(
            1,
            "We compute <<16-7=9>>9 and double: <<9*2=18>>18. The answer is 18",
        );
        let kept = dedup_paths(vec![a, b], DedupKeyMode::default());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].origin.seed, 0, "first-seen representative wins");
    }

    #[test]
    fn dedup_keeps_distinct_multisets() {
        let a = path(0, "<<1+1=2>>2. The answer is 2");
        let b = path(1, "<<1+1=2>>2 and <<2*3=6>>6. The answer is 6");
        let c = path(2, "<<2*3=6>>6. The answer is 6");
        assert_eq!(dedup_paths(vec![a, b, c], DedupKeyMode::default()).len(), 3);
    }

    #[test]
    fn multiset_vs_sequence_key_modes() {
        let forward = path(0, "<<2+3=5>>5 then <<5*2=10>>10. The answer is 10");
        let reversed = path(1, "<<5*2=10>>10 from <<2+3=5>>5. The answer is 10");
        let pair = vec![forward, reversed];
        assert_eq!(
            dedup_paths(pair.clone(), DedupKeyMode::ExprMultiset).len(),
            1
        );
        assert_eq!(dedup_paths(pair, DedupKeyMode::ExprSequence).len(), 2);
    }

    #[test]
    fn claimed_results_are_not_part_of_the_key() {
        // Same expression, differently rounded claims; both check ok.
        let a = path(0, "<<1/3=0.33>>0.33. The answer is 0.33");
        let b = path(1, "<<1/3=0.3>>0.3. The answer is 0.3");
        assert_eq!(dedup_paths(vec![a, b], DedupKeyMode::default()).len(), 1);
    }

    #[test]
    fn annotation_free_paths_share_one_key() {
        let a = path(0, "Obviously the answer is 2");
        let b = path(1, "It is trivial. The answer is 2");
        assert_eq!(dedup_paths(vec![a, b], DedupKeyMode::default()).len(), 1);
    }

    #[test]
    fn dedup_is_idempotent_and_shrinking() {
        let paths = vec![
            path(0, "<<1+1=2>>2. The answer is 2"),
            path(1, "<<1+1=2>>2. The answer is 2"),
            path(2, "<<4-1=3>>3. The answer is 3"),
        ];
        let once = dedup_paths(paths.clone(), DedupKeyMode::default());
        let twice = dedup_paths(once.clone(), DedupKeyMode::default());
        assert_eq!(once, twice);
        assert!(once.len() <= paths.len());
        assert_eq!(once.len(), 2);
    }

    #[test]
    fn merge_unions_distinct_keys() {
        let x = "<<2+2=4>>4. The answer is 4";
        let y = "<<2*2=4>>4. The answer is 4";
        let a = pool_of(4.0, vec![path(0, x)]);
        let b = pool_of(4.0, vec![path(1, x), path(2, y)]);
        let tols = Tolerances::default();
        let merged = merge_pools(&[a.clone(), b], &tols, DedupKeyMode::default()).unwrap();
        assert_eq!(merged.len(), 2);
        // Merging a pool with itself changes nothing.
        let self_merge = merge_pools(&[a.clone(), a.clone()], &tols, DedupKeyMode::default());
        assert_eq!(self_merge.unwrap().len(), 1);
    }

    #[test]
    fn merge_rejects_mismatched_pools() {
        let a = pool_of(4.0, vec![]);
        let mut b = pool_of(4.0, vec![]);
        b.problem_id = "p2".into();
        let tols = Tolerances::default();
        assert!(matches!(
            merge_pools(&[a.clone(), b], &tols, DedupKeyMode::default()),
            Err(MergeError::ProblemMismatch(..))
        ));
        let mut c = pool_of(4.0, vec![]);
        c.lang = Lang::Fr;
        assert!(matches!(
            merge_pools(&[a.clone(), c], &tols, DedupKeyMode::default()),
            Err(MergeError::LangMismatch(..))
        ));
        let d = pool_of(5.0, vec![]);
        assert!(matches!(
            merge_pools(&[a, d], &tols, DedupKeyMode::default()),
            Err(MergeError::GoldMismatch(..))
        ));
        assert!(matches!(
            merge_pools(&[], &tols, DedupKeyMode::default()),
            Err(MergeError::Empty)
        ));
    }

    #[test]
    fn stats_average_to_one_decimal() {
        let mut pools = Vec::new();
        // Ten En pools at k=50 with distinct counts summing to 38 -> 3.8.
        for (i, n) in [4, 4, 4, 4, 4, 4, 4, 4, 3, 3].into_iter().enumerate() {
            let paths = (0..n)
                .map(|j| {
                    path(
                        j as u64,
                        &format!("<<{i}+{j}={}>>x. The answer is 1", i + j),
                    )
                })
                .collect();
            let mut p = pool_of(1.0, paths);
            p.budget_k = 50;
            p.problem_id = format!("p{i}");
            pools.push(p);
        }
        // One Ja pool at k=50 with 2 distinct paths -> 2.0.
        let mut ja = pool_of(1.0, vec![path(0, "a"), path(1, "b")]);
        ja.budget_k = 50;
        ja.lang = Lang::Ja;
        pools.push(ja);
        // Rounding: counts 1, 2, 2 -> 5/3 -> 1.7.
        for (i, n) in [1usize, 2, 2].into_iter().enumerate() {
            let mut p = pool_of(1.0, (0..n).map(|j| path(j as u64, "t")).collect());
            p.budget_k = 10;
            p.problem_id = format!("q{i}");
            pools.push(p);
        }
        let stats = pool_stats(&pools);
        assert_eq!(stats.per_k[&50][&Lang::En], 3.8);
        assert_eq!(stats.per_k[&50][&Lang::Ja], 2.0);
        assert_eq!(stats.per_k[&10][&Lang::En], 1.7);

        let table = render_path_stats(&stats, &[Lang::En, Lang::Ja]);
        assert_eq!(table, "k\tEn\tJa\n10\t1.7\t-\n50\t3.8\t2.0");
    }

    #[test]
    fn dump_labels_every_path() {
        let pool = pool_of(
            4.0,
            vec![
                path(0, "<<2+2=4>>4. The answer is 4"),
                path(1, "<<2+2=4>>4 again. The answer is 4"),
                path(2, "<<2+2=4>>4. The answer is 5"),
                path(3, "<<2+2=5>>5. The answer is 4"),
            ],
        );
        let dump = pool_dump(&pool, &Tolerances::default(), DedupKeyMode::default());
        assert_eq!(dump.len(), 4);
        assert!(dump[0].kept && dump[0].drop_reason.is_none());
        assert_eq!(dump[1].drop_reason, Some(DropReason::Duplicate));
        assert_eq!(dump[2].drop_reason, Some(DropReason::WrongAnswer));
        assert_eq!(dump[3].drop_reason, Some(DropReason::BadAnnotation));
        let line = serde_json::to_string(&dump[1]).unwrap();
        assert!(line.contains("\"drop_reason\":\"duplicate\""));
        let kept_line = serde_json::to_string(&dump[0]).unwrap();
        assert!(!kept_line.contains("drop_reason"));
    }

    #[test]
    fn augmented_records_carry_problem_and_origin() {
        let problem = ProblemRecord::new("g1", Lang::Zh, "问题", "<<1+1=2>>2\n#### 2", 2.0);
        let mut p = path(3, "另一种解法 <<2*1=2>>2. 答案是 2");
        p.lang = Lang::Zh;
        let records = augmented_records(&problem, &[p]);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].id, "g1");
        assert_eq!(records[0].lang, Lang::Zh);
        assert_eq!(records[0].question, "问题");
        assert_eq!(records[0].gold, 2.0);
        assert_eq!(records[0].origin, Origin::Xrft);
        assert!(records[0].answer_text.contains("另一种解法"));
    }

    fn sampling_client(backend: Arc<ScriptedBackend>) -> Client {
        let mut retry = RetryConfig::default();
        retry.base_delay = std::time::Duration::from_millis(1);
        Client::new(backend, retry, 8)
    }

    #[tokio::test]
    async fn sampling_draws_k_per_model_with_distinct_seeds() {
        let backend = Arc::new(ScriptedBackend::new(|_, req| {
            assert_eq!(req.temperature, 0.9);
            assert_eq!(req.n, 1);
            assert!(req.messages[0]
                .content
                .starts_with("Below is an instruction that describes a task."));
            Ok(vec![format!(
                "path for seed {:?}. The answer is 7",
                req.seed
            )])
        }));
        let client = sampling_client(backend.clone());
        let problem = ProblemRecord::new("p1", Lang::De, "Frage?", "<<3+4=7>>7\n#### 7", 7.0);
        let cfg = SamplingConfig {
            per_model_k: 3,
            models: vec!["m1".into(), "m2".into()],
            ..SamplingConfig::default()
        };
        let pool = sample_paths(&client, &problem, &cfg, &PhraseConfig::default())
            .await
            .unwrap();
        assert_eq!(pool.budget_k, 6);
        assert_eq!(pool.paths.len(), 6);
        assert_eq!(backend.calls(), 6);
        for model in ["m1", "m2"] {
            let seeds: Vec<u64> = pool
                .paths
                .iter()
                .filter(|p| p.origin.model == model)
                .map(|p| p.origin.seed)
                .collect();
            assert_eq!(seeds, vec![0, 1, 2]);
        }
        assert!(pool.paths.iter().all(|p| p.final_answer == Some(7.0)));
        assert!(pool.paths.iter().all(|p| p.origin.temperature == 0.9));
    }

    #[tokio::test]
    async fn failed_draw_shrinks_pool_instead_of_aborting() {
        // Seed 1 always fails; other draws succeed.
        let backend = Arc::new(ScriptedBackend::new(|_, req| {
            if req.seed == Some(1) {
                Err(LlmError::Transport("socket reset".into()))
            } else {
                Ok(vec!["The answer is 7".into()])
            }
        }));
        let client = sampling_client(backend);
        let problem = ProblemRecord::new("p1", Lang::En, "Q?", "#### 7", 7.0);
        let cfg = SamplingConfig {
            per_model_k: 3,
            models: vec!["m1".into()],
            ..SamplingConfig::default()
        };
        let pool = sample_paths(&client, &problem, &cfg, &PhraseConfig::default())
            .await
            .unwrap();
        assert_eq!(pool.budget_k, 3);
        assert_eq!(pool.paths.len(), 2);
        let seeds: Vec<u64> = pool.paths.iter().map(|p| p.origin.seed).collect();
        assert_eq!(seeds, vec![0, 2]);
    }

    #[tokio::test]
    async fn explicit_seeds_are_forwarded() {
        let backend = Arc::new(ScriptedBackend::new(|_, _| {
            Ok(vec!["The answer is 1".into()])
        }));
        let client = sampling_client(backend);
        let problem = ProblemRecord::new("p1", Lang::En, "Q?", "#### 1", 1.0);
        let cfg = SamplingConfig {
            per_model_k: 3,
            seeds: vec![101, 202],
            models: vec!["m1".into()],
            ..SamplingConfig::default()
        };
        let pool = sample_paths(&client, &problem, &cfg, &PhraseConfig::default())
            .await
            .unwrap();
        let seeds: Vec<u64> = pool.paths.iter().map(|p| p.origin.seed).collect();
        assert_eq!(
            seeds,
            vec![101, 202, 2],
            "short seed list falls back to draw index"
        );
    }

    #[tokio::test]
    async fn invalid_config_is_rejected_before_any_call() {
        let backend = Arc::new(ScriptedBackend::new(|_, _| Ok(vec!["x".into()])));
        let client = sampling_client(backend.clone());
        let problem = ProblemRecord::new("p1", Lang::En, "Q?", "#### 1", 1.0);
        for cfg in [
            SamplingConfig {
                per_model_k: 0,
                ..SamplingConfig::default()
            },
            SamplingConfig {
                models: vec![],
                ..SamplingConfig::default()
            },
            SamplingConfig {
                temperature: f64::NAN,
                ..SamplingConfig::default()
            },
        ] {
            let err = sample_paths(&client, &problem, &cfg, &PhraseConfig::default()).await;
            assert!(matches!(err, Err(SamplingError::InvalidConfig(_))));
        }
        assert_eq!(backend.calls(), 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const ALPHABET: [&str; 5] = ["2+3=5", "4*5=20", "10-7=3", "8/2=4", "6+6=12"];

        fn path_from_formulas(indices: &[usize], seed: u64) -> ReasoningPath {
            let body: String = indices
                .iter()
                .map(|&i| format!("<<{}>>step ", ALPHABET[i]))
                .collect();
            path(seed, &format!("{body}The answer is 1"))
        }

        /// O(n²) pairwise oracle: count paths with no earlier key-equal path.
        fn brute_force_distinct(paths: &[ReasoningPath]) -> usize {
            let keys: Vec<Vec<String>> = paths
                .iter()
                .map(|p| formula_key(p, DedupKeyMode::ExprMultiset))
                .collect();
            (0..keys.len())
                .filter(|&i| (0..i).all(|j| keys[j] != keys[i]))
                .count()
        }

        proptest! {
            #[test]
            fn greedy_dedup_matches_pairwise_oracle(
                pool in prop::collection::vec(prop::collection::vec(0usize..5, 0..6), 0..12),
            ) {
                let paths: Vec<ReasoningPath> = pool
                    .iter()
                    .enumerate()
                    .map(|(i, f)| path_from_formulas(f, i as u64))
                    .collect();
                let greedy = dedup_paths(paths.clone(), DedupKeyMode::ExprMultiset).len();
                prop_assert_eq!(greedy, brute_force_distinct(&paths));
            }

            #[test]
            fn permuting_duplicates_preserves_count(
                pool in prop::collection::vec(prop::collection::vec(0usize..5, 0..4), 1..10),
                rotate in 0usize..10,
            ) {
                let paths: Vec<ReasoningPath> = pool
                    .iter()
                    .enumerate()
                    .map(|(i, f)| path_from_formulas(f, i as u64))
                    .collect();
                let mut rotated = paths.clone();
                rotated.rotate_left(rotate % paths.len().max(1));
                let a = dedup_paths(paths, DedupKeyMode::ExprMultiset).len();
                let b = dedup_paths(rotated, DedupKeyMode::ExprMultiset).len();
                prop_assert_eq!(a, b);
            }
        }
    }
}

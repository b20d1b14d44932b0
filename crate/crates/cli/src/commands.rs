//! Subcommand implementations.
//!
//! Conventions shared across commands: corpora and pools are read and
//! written as line-delimited JSON; `--out` redirects data that would
//! otherwise go to standard output; progress and summaries go to standard
//! error; `--dry-run` prints the plan after input validation and stops
//! before any backend call or output write.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use futures::StreamExt;
use serde::Serialize;

use mathling_core::answer::PhraseConfig;
use mathling_core::corpus::{CorpusError, ProblemRecord};
use mathling_core::dataset::{
    self, corpus_stats, problem_stats, render_stats_table, InstructionRecord, TrainStrategy,
};
use mathling_core::eval::{
    load_testset, render_report, run_eval, EvalConfig, EvalMode, Prompting, ReportFormat,
    TestFormat, TestItem, TestSetError,
};
use mathling_core::gate::{
    default_exemplars, Gate, GateStatus, TranslateSettings, TranslationOutcome,
};
use mathling_core::lang::parse_lang_list;
use mathling_core::rft::{
    augmented_records, merge_pools, pool_dump, pool_stats, render_path_stats, sample_paths,
    DedupKeyMode, PathPool,
};
use mathling_core::Lang;

use crate::{backend, CliError, Ctx};

// ---------------------------------------------------------------------------
// Shared plumbing

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn io_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

/// File-access trouble exits 2; a line that fails to parse is bad input
/// and exits 1.
fn corpus_err(e: CorpusError) -> CliError {
    match e {
        CorpusError::Io { .. } => CliError::Runtime(e.to_string()),
        CorpusError::Parse { .. } => CliError::Validation(e.to_string()),
    }
}

fn testset_err(e: TestSetError) -> CliError {
    match e {
        TestSetError::Corpus(inner) => corpus_err(inner),
        TestSetError::Io { .. } => CliError::Runtime(e.to_string()),
        TestSetError::Malformed { .. }
        | TestSetError::BadFileName { .. }
        | TestSetError::Empty { .. } => CliError::Validation(e.to_string()),
    }
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    mathling_core::corpus::read_jsonl(path).map_err(corpus_err)
}

/// Line sink: `--out` file when given, standard output otherwise.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(
            |e| CliError::Runtime(format!("cannot create {}: {e}", p.display())),
        )?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout())),
    })
}

fn write_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let line = serde_json::to_string(value).map_err(io_err)?;
    writeln!(out, "{line}").map_err(io_err)
}

/// Write rendered text (a table or report) to `--out` or standard output.
fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Languages from the flag when given (flags win), else the config list.
fn resolve_langs(flag: Option<&str>, ctx: &Ctx) -> Result<Vec<Lang>, CliError> {
    match flag {
        None => Ok(ctx.config.languages.clone()),
        Some(spec) => {
            let langs = parse_lang_list(spec).map_err(|e| validation(e.to_string()))?;
            if langs.is_empty() {
                return Err(validation("language list is empty"));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &lang in &langs {
                if !seen.insert(lang) {
                    return Err(validation(format!("duplicate language {lang}")));
                }
            }
            Ok(langs)
        }
    }
}

fn parse_flag<T: std::str::FromStr>(what: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| validation(format!("bad {what}: {e}")))
}

// ---------------------------------------------------------------------------
// translate

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// English source corpus (JSONL problem records).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Target languages: codes, comma separated, or "all".
    #[arg(long, value_name = "LANGS")]
    pub langs: Option<String>,

    /// Verified translations (JSONL); standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Discard log (JSONL), one entry per exhausted record.
    #[arg(long, value_name = "FILE")]
    pub discards: Option<PathBuf>,

    /// Offline prompt→response fixture backend (JSONL).
    #[arg(long, value_name = "FILE")]
    pub fixture: Option<PathBuf>,
}

pub async fn translate(ctx: &Ctx, args: TranslateArgs) -> Result<(), CliError> {
    let targets: Vec<Lang> = resolve_langs(args.langs.as_deref(), ctx)?
        .into_iter()
        .filter(|&l| l != Lang::En)
        .collect();
    if targets.is_empty() {
        return Err(validation("no non-English target languages"));
    }
    let records: Vec<ProblemRecord> = read_records(&args.input)?;
    let sources: Vec<&ProblemRecord> = records.iter().filter(|r| r.lang == Lang::En).collect();
    if sources.is_empty() {
        return Err(validation(format!(
            "{}: no English records to translate",
            args.input.display()
        )));
    }
    eprintln!(
        "[translate] {} English records x {} target languages = {} translation tasks",
        sources.len(),
        targets.len(),
        sources.len() * targets.len()
    );
    if ctx.dry_run {
        return Ok(());
    }

    let client = backend::client(&ctx.config.backend, args.fixture.as_deref(), ctx.jobs())?;
    let gate = Gate {
        tolerances: ctx.config.tolerances(),
        policy: ctx.config.retry_policy(),
        exemplars: default_exemplars(),
        ..Gate::default()
    };
    let settings = TranslateSettings::default();
    let mut out = sink(args.out.as_deref())?;
    let mut discard_sink = match args.discards.as_deref() {
        Some(p) => Some(sink(Some(p))?),
        None => None,
    };

    let pairs: Vec<(&ProblemRecord, Lang)> = sources
        .iter()
        .flat_map(|&src| targets.iter().map(move |&t| (src, t)))
        .collect();
    let gate_ref = &gate;
    let client_ref = &client;
    let settings_ref = &settings;
    let mut results = futures::stream::iter(pairs.into_iter().map(|(src, target)| async move {
        gate_ref
            .translate_with_retry(client_ref, src, target, settings_ref)
            .await
    }))
    .buffered(ctx.jobs());

    let (mut verified, mut discarded) = (0usize, 0usize);
    while let Some(result) = results.next().await {
        let outcome =
            result.map_err(|e| CliError::Runtime(format!("translation call failed: {e}")))?;
        match outcome {
            TranslationOutcome::Verified(record) => {
                verified += 1;
                write_line(out.as_mut(), &record)?;
            }
            TranslationOutcome::Discarded { entry, .. } => {
                discarded += 1;
                if let Some(d) = discard_sink.as_mut() {
                    write_line(d.as_mut(), &entry)?;
                }
            }
        }
    }
    out.flush().map_err(io_err)?;
    if let Some(mut d) = discard_sink {
        d.flush().map_err(io_err)?;
    }
    eprintln!("[translate] {verified} verified, {discarded} discarded");
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Multilingual corpus (JSONL problem records) holding the English
    /// sources alongside their translations.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Per-record reports (JSONL); standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Only check these languages.
    #[arg(long, value_name = "LANGS")]
    pub langs: Option<String>,
}

#[derive(Debug, Serialize)]
struct VerifyLine<'a> {
    id: &'a str,
    lang: Lang,
    status: GateStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    failing_index: Option<usize>,
}

fn status_name(status: GateStatus) -> &'static str {
    match status {
        GateStatus::Pass => "pass",
        GateStatus::Malformed => "malformed",
        GateStatus::ArithmeticError => "arithmetic_error",
        GateStatus::Inconsistent => "inconsistent",
        GateStatus::AnswerMismatch => "answer_mismatch",
    }
}

pub fn verify(ctx: &Ctx, args: VerifyArgs) -> Result<(), CliError> {
    let langs = resolve_langs(args.langs.as_deref(), ctx)?;
    let records: Vec<ProblemRecord> = read_records(&args.input)?;
    let english: BTreeMap<&str, &ProblemRecord> = records
        .iter()
        .filter(|r| r.lang == Lang::En && r.origin.is_base())
        .map(|r| (r.id.as_str(), r))
        .collect();
    let candidates: Vec<&ProblemRecord> = records
        .iter()
        .filter(|r| r.lang != Lang::En && langs.contains(&r.lang))
        .collect();
    eprintln!(
        "[verify] {} translations against {} English sources",
        candidates.len(),
        english.len()
    );
    if ctx.dry_run {
        return Ok(());
    }

    let gate = Gate {
        tolerances: ctx.config.tolerances(),
        policy: ctx.config.retry_policy(),
        ..Gate::default()
    };
    let mut out = sink(args.out.as_deref())?;
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for record in candidates {
        let Some(src) = english.get(record.id.as_str()) else {
            return Err(validation(format!(
                "{}: no English source for problem {}",
                args.input.display(),
                record.id
            )));
        };
        let report = gate.verify(src, record);
        *counts.entry(status_name(report.status)).or_default() += 1;
        write_line(
            out.as_mut(),
            &VerifyLine {
                id: &record.id,
                lang: record.lang,
                status: report.status,
                failing_index: report.failing_index,
            },
        )?;
    }
    out.flush().map_err(io_err)?;
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{v} {k}")).collect();
    eprintln!(
        "[verify] {}",
        if summary.is_empty() {
            "nothing to check".to_string()
        } else {
            summary.join(", ")
        }
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// build

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Verified corpus (JSONL problem records).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// parallel, cross, mix or mix-all; overrides the configured default.
    #[arg(long, value_name = "NAME")]
    pub strategy: Option<String>,

    /// Languages to draw from: codes, comma separated, or "all".
    #[arg(long, value_name = "LANGS")]
    pub langs: Option<String>,

    /// Instruction records (JSONL); standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// mix-all only: keep this many seeded-random ordered language pairs
    /// per problem instead of the full product.
    #[arg(long, value_name = "N")]
    pub pairs_per_problem: Option<usize>,
}

pub fn build(ctx: &Ctx, args: BuildArgs) -> Result<(), CliError> {
    let strategy = match (&args.strategy, ctx.config.strategy) {
        (Some(raw), _) => parse_strategy(raw)?,
        (None, Some(configured)) => configured,
        (None, None) => {
            return Err(validation(
                "no strategy: pass --strategy or set one in the config",
            ))
        }
    };
    if args.pairs_per_problem.is_some() && strategy != TrainStrategy::MixAll {
        return Err(validation(
            "--pairs-per-problem applies to --strategy mix-all only",
        ));
    }
    let langs = resolve_langs(args.langs.as_deref(), ctx)?;
    let records: Vec<ProblemRecord> = read_records(&args.input)?;
    eprintln!(
        "[build] {strategy} over {} records, {} languages",
        records.len(),
        langs.len()
    );
    if ctx.dry_run {
        return Ok(());
    }

    let instructions = match args.pairs_per_problem {
        Some(pairs) => dataset::build_mix_all_sampled(&records, &langs, pairs, ctx.seed()),
        None => {
            dataset::build(&records, &langs, strategy).map_err(|e| validation(e.to_string()))?
        }
    };
    let mut out = sink(args.out.as_deref())?;
    for record in &instructions {
        write_line(out.as_mut(), record)?;
    }
    out.flush().map_err(io_err)?;
    eprintln!("[build] {} instruction records", instructions.len());
    Ok(())
}

fn parse_strategy(raw: &str) -> Result<TrainStrategy, CliError> {
    parse_flag("strategy", raw)
}

// ---------------------------------------------------------------------------
// sample

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Problems to sample (JSONL problem records).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Only sample these languages.
    #[arg(long, value_name = "LANGS")]
    pub langs: Option<String>,

    /// Path pools (JSONL, one per problem); standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Offline prompt→response fixture backend (JSONL).
    #[arg(long, value_name = "FILE")]
    pub fixture: Option<PathBuf>,

    /// Override sampled draws per model.
    #[arg(long, value_name = "K")]
    pub per_model_k: Option<u32>,

    /// Override sampling temperature.
    #[arg(long, value_name = "T")]
    pub temperature: Option<f64>,
}

pub async fn sample(ctx: &Ctx, args: SampleArgs) -> Result<(), CliError> {
    let langs = resolve_langs(args.langs.as_deref(), ctx)?;
    let mut cfg = ctx.config.sampling.clone();
    if let Some(k) = args.per_model_k {
        cfg.per_model_k = k;
    }
    if let Some(t) = args.temperature {
        cfg.temperature = t;
    }
    // A command-line seed reseeds the draws unless the config pinned an
    // explicit seed list.
    if let Some(seed) = ctx.seed_override() {
        if cfg.seeds.is_empty() {
            cfg.seeds = (0..u64::from(cfg.per_model_k)).map(|j| seed + j).collect();
        }
    }
    let records: Vec<ProblemRecord> = read_records(&args.input)?;
    let problems: Vec<&ProblemRecord> =
        records.iter().filter(|r| langs.contains(&r.lang)).collect();
    let budget = cfg.per_model_k as usize * cfg.models.len().max(1);
    eprintln!(
        "[sample] {} problems x {} draws = {} completion calls",
        problems.len(),
        budget,
        problems.len() * budget
    );
    if ctx.dry_run {
        return Ok(());
    }

    let client = backend::client(&ctx.config.backend, args.fixture.as_deref(), ctx.jobs())?;
    let phrases = PhraseConfig::default();
    let mut out = sink(args.out.as_deref())?;
    let mut drawn = 0usize;
    for problem in problems {
        let pool = sample_paths(&client, problem, &cfg, &phrases)
            .await
            .map_err(|e| validation(e.to_string()))?;
        drawn += pool.paths.len();
        write_line(out.as_mut(), &pool)?;
    }
    out.flush().map_err(io_err)?;
    eprintln!("[sample] {drawn} paths kept across sampled pools");
    Ok(())
}

// ---------------------------------------------------------------------------
// rft-filter

#[derive(Debug, Args)]
pub struct RftFilterArgs {
    /// Sampled path pools (JSONL).
    #[arg(long, value_name = "FILE")]
    pub pools: PathBuf,

    /// Base corpus; when given, surviving paths are emitted as extra
    /// problem records (same ids, sampled origin) ready for `build`.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,

    /// Output (JSONL); standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Deduplicate by the ordered formula sequence instead of the
    /// order-insensitive multiset.
    #[arg(long)]
    pub sequence_key: bool,

    /// Write every sampled path with its keep/drop verdict instead of
    /// survivors only.
    #[arg(long)]
    pub audit: bool,
}

pub fn rft_filter(ctx: &Ctx, args: RftFilterArgs) -> Result<(), CliError> {
    if args.audit && args.corpus.is_some() {
        return Err(validation("--audit and --corpus are mutually exclusive"));
    }
    let pools: Vec<PathPool> = read_records(&args.pools)?;
    let mode = if args.sequence_key {
        DedupKeyMode::ExprSequence
    } else {
        DedupKeyMode::ExprMultiset
    };
    let tols = ctx.config.tolerances();
    eprintln!(
        "[rft-filter] {} pools, {} sampled paths",
        pools.len(),
        pools.iter().map(|p| p.paths.len()).sum::<usize>()
    );
    if ctx.dry_run {
        return Ok(());
    }

    let mut out = sink(args.out.as_deref())?;
    if args.audit {
        for pool in &pools {
            for line in pool_dump(pool, &tols, mode) {
                write_line(out.as_mut(), &line)?;
            }
        }
        out.flush().map_err(io_err)?;
        return Ok(());
    }

    // Group pools per (problem, language) in first-seen order so output
    // order follows input order.
    let mut order: Vec<(String, Lang)> = Vec::new();
    let mut groups: HashMap<(String, Lang), Vec<PathPool>> = HashMap::new();
    for pool in pools {
        let key = (pool.problem_id.clone(), pool.lang);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(pool);
    }

    let corpus: Option<Vec<ProblemRecord>> = match args.corpus.as_deref() {
        Some(p) => Some(read_records(p)?),
        None => None,
    };
    let base: HashMap<(&str, Lang), &ProblemRecord> = corpus
        .iter()
        .flatten()
        .filter(|r| r.origin.is_base())
        .map(|r| ((r.id.as_str(), r.lang), r))
        .collect();

    let mut kept = 0usize;
    for key in &order {
        let group = &groups[key];
        let merged = merge_pools(group, &tols, mode).map_err(|e| validation(e.to_string()))?;
        kept += merged.len();
        if corpus.is_some() {
            let Some(problem) = base.get(&(key.0.as_str(), key.1)) else {
                return Err(validation(format!(
                    "pool {} ({}) has no base corpus record",
                    key.0, key.1
                )));
            };
            for record in augmented_records(problem, &merged) {
                write_line(out.as_mut(), &record)?;
            }
        } else {
            let survivors = PathPool {
                problem_id: key.0.clone(),
                lang: key.1,
                gold: group[0].gold,
                budget_k: group.iter().map(|p| p.budget_k).sum(),
                paths: merged,
            };
            write_line(out.as_mut(), &survivors)?;
        }
    }
    out.flush().map_err(io_err)?;
    eprintln!("[rft-filter] {kept} distinct correct paths kept");
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Test set: a directory of per-language files (mgsm, msvamp) or a
    /// single JSONL file (generic).
    #[arg(long, value_name = "PATH")]
    pub testset: PathBuf,

    /// mgsm, msvamp or generic.
    #[arg(long, default_value = "mgsm", value_name = "NAME")]
    pub format: String,

    /// parallel-test (native questions) or cross-test (English questions,
    /// answers scored per language).
    #[arg(long, default_value = "parallel-test", value_name = "NAME")]
    pub mode: String,

    /// template, zero-shot or en-2shot.
    #[arg(long, default_value = "template", value_name = "NAME")]
    pub prompting: String,

    /// Only score these languages.
    #[arg(long, value_name = "LANGS")]
    pub langs: Option<String>,

    /// Rendered report destination; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// table or csv.
    #[arg(long, default_value = "table", value_name = "NAME")]
    pub report_format: String,

    /// Offline prompt→response fixture backend (JSONL).
    #[arg(long, value_name = "FILE")]
    pub fixture: Option<PathBuf>,

    /// Override the number of repeated runs.
    #[arg(long, value_name = "N")]
    pub repeats: Option<u32>,
}

fn parse_prompting(raw: &str) -> Result<Prompting, CliError> {
    match raw {
        "template" => Ok(Prompting::InstructTemplate),
        "zero-shot" => Ok(Prompting::ZeroShotCot),
        "en-2shot" => Ok(Prompting::En2ShotCot),
        other => parse_flag("prompting", &other.replace('-', "_")),
    }
}

pub async fn eval(ctx: &Ctx, args: EvalArgs) -> Result<(), CliError> {
    let format: TestFormat = parse_flag("test set format", &args.format)?;
    let mode: EvalMode = parse_flag("eval mode", &args.mode.replace('-', "_"))?;
    let prompting = parse_prompting(&args.prompting)?;
    let report_format: ReportFormat = parse_flag("report format", &args.report_format)?;
    let langs = resolve_langs(args.langs.as_deref(), ctx)?;

    let loaded = load_testset(&args.testset, format).map_err(testset_err)?;
    for warning in &loaded.warnings {
        eprintln!("[eval] warning: {warning}");
    }
    let items: Vec<TestItem> = loaded
        .items
        .into_iter()
        .filter(|item| langs.contains(&item.lang))
        .collect();
    if items.is_empty() {
        return Err(validation("no test items after language filtering"));
    }

    let mut cfg = EvalConfig {
        mode,
        prompting,
        ..EvalConfig::default()
    };
    if let Some(repeats) = args.repeats {
        cfg.repeats = repeats;
        cfg.seeds = (1..=u64::from(repeats)).collect();
    }
    if let Some(seed) = ctx.seed_override() {
        cfg.seeds = (0..u64::from(cfg.repeats)).map(|r| seed + r).collect();
    }
    eprintln!(
        "[eval] {} items x {} repeats = {} completion calls ({mode}, {prompting})",
        items.len(),
        cfg.repeats,
        items.len() * cfg.repeats as usize
    );
    if ctx.dry_run {
        return Ok(());
    }

    let client = backend::client(&ctx.config.backend, args.fixture.as_deref(), ctx.jobs())?;
    let phrases = PhraseConfig::default();
    let report = run_eval(
        &client,
        &items,
        &cfg,
        &phrases,
        ctx.config.tolerances().answer,
    )
    .await
    .map_err(|e| validation(e.to_string()))?;
    write_text(args.out.as_deref(), &render_report(&report, report_format))?;
    eprintln!(
        "[eval] macro average {:.1} over {} languages",
        report.macro_avg,
        report.per_lang.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// stats

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Problem corpus (JSONL): per-language record counts.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,

    /// Instruction dataset (JSONL): counts by answer language.
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,

    /// Path pools (JSONL): mean distinct correct paths per budget.
    #[arg(long, value_name = "FILE")]
    pub pools: Option<PathBuf>,

    /// Table columns: codes, comma separated, or "all".
    #[arg(long, value_name = "LANGS")]
    pub langs: Option<String>,

    /// Table destination; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn stats(ctx: &Ctx, args: StatsArgs) -> Result<(), CliError> {
    let chosen = [&args.corpus, &args.dataset, &args.pools];
    if chosen.iter().filter(|p| p.is_some()).count() != 1 {
        return Err(validation(
            "pass exactly one of --corpus, --dataset, --pools",
        ));
    }
    let langs = resolve_langs(args.langs.as_deref(), ctx)?;
    if ctx.dry_run {
        eprintln!(
            "[stats] would tabulate counts over {} languages",
            langs.len()
        );
        return Ok(());
    }

    let table = if let Some(path) = &args.corpus {
        let records: Vec<ProblemRecord> = read_records(path)?;
        render_stats_table(&problem_stats(&records), &langs)
    } else if let Some(path) = &args.dataset {
        let records: Vec<InstructionRecord> = read_records(path)?;
        render_stats_table(&corpus_stats(&records), &langs)
    } else {
        let pools: Vec<PathPool> = read_records(args.pools.as_ref().expect("checked above"))?;
        render_path_stats(&pool_stats(&pools), &langs)
    };
    write_text(args.out.as_deref(), &table)
}

//! Seeded synthetic data for benchmarks and self-checks: fully translated
//! corpora whose translations verify cleanly, targeted single-digit
//! corruptions that must be caught, and sampled path pools with known
//! formula alphabets.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calc::parse_annotations;
use crate::corpus::ProblemRecord;
use crate::lang::Lang;
use crate::rft::{PathOrigin, PathPool, ReasoningPath};

/// Format a float as its shortest decimal (integers without a point).
fn fmt_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// One synthetic solution: a chain of 2–4 correct annotation steps ending
/// in a `####` gold marker. Every language of a problem carries the same
/// formula sequence and gold, so each translation verifies against its
/// English source.
fn synthetic_solution(lang: Lang, index: usize, rng: &mut ChaCha8Rng) -> (String, f64) {
    let steps = rng.gen_range(2..=4);
    let mut value: i64 = rng.gen_range(2..100);
    let mut body = format!("[{}] solution {index}.", lang.code());
    for _ in 0..steps {
        let (op, operand, next) = loop {
            let operand: i64 = rng.gen_range(2..20);
            match rng.gen_range(0..3) {
                0 => break ('+', operand, value + operand),
                1 if value - operand >= 1 => break ('-', operand, value - operand),
                2 if value * operand < 1_000_000 => break ('*', operand, value * operand),
                _ => continue,
            }
        };
        body.push_str(&format!(
            " Then {value}{op}{operand} = <<{value}{op}{operand}={next}>>{next}."
        ));
        value = next;
    }
    body.push_str(&format!("\n#### {value}"));
    (body, value as f64)
}

/// Fully translated corpus: `problems` ids, one record per language, all
/// translations of a problem sharing its formula chain and gold answer.
/// Deterministic for a given seed.
pub fn synthetic_corpus(problems: usize, langs: &[Lang], seed: u64) -> Vec<ProblemRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(problems * langs.len());
    for i in 0..problems {
        // One chain per problem; per-language texts differ only in prose.
        let (en_body, gold) = synthetic_solution(Lang::En, i, &mut rng);
        let chain = &en_body[en_body.find(" Then").unwrap_or(0)..];
        for &lang in langs {
            let body = if lang == Lang::En {
                en_body.clone()
            } else {
                format!("[{}] solution {i}.{chain}", lang.code())
            };
            out.push(ProblemRecord::new(
                format!("syn{i:05}"),
                lang,
                format!("[{}] question {i}?", lang.code()),
                body,
                gold,
            ));
        }
    }
    out
}

/// Replace one random digit inside a random `<<...>>` annotation (operand
/// or claimed result) with a different digit. Returns `None` when the
/// text has no annotation digits. The mutation changes exactly one byte.
pub fn mutate_annotation_digit<R: Rng>(text: &str, rng: &mut R) -> Option<String> {
    let mut positions: Vec<(usize, u8)> = Vec::new();
    for a in parse_annotations(text) {
        // Strictly inside the delimiters.
        let inner = a.span.start + 2..a.span.end - 2;
        for (off, b) in text[inner.clone()].bytes().enumerate() {
            if b.is_ascii_digit() {
                positions.push((inner.start + off, b));
            }
        }
    }
    if positions.is_empty() {
        return None;
    }
    let (pos, old) = positions[rng.gen_range(0..positions.len())];
    let replacement = loop {
        let d = b'0' + rng.gen_range(0..10u8);
        if d != old {
            break d;
        }
    };
    let mut bytes = text.as_bytes().to_vec();
    bytes[pos] = replacement;
    Some(String::from_utf8(bytes).expect("digit swap preserves utf-8"))
}

/// Correct formula alphabet used by [`synthetic_pool`]; up to 8 entries.
pub const FORMULA_ALPHABET: [(&str, &str); 8] = [
    ("2+3", "5"),
    ("4*5", "20"),
    ("10-7", "3"),
    ("8/2", "4"),
    ("6+6", "12"),
    ("9-4", "5"),
    ("3*3", "9"),
    ("7+8", "15"),
];

/// Pool of `n_paths` sampled paths, each carrying 0–4 formulas drawn from
/// the first `alphabet_size` entries of [`FORMULA_ALPHABET`]. All paths
/// state the gold answer and check arithmetically, so the filter keeps
/// them and only deduplication discriminates.
pub fn synthetic_pool(
    problem_id: &str,
    lang: Lang,
    gold: f64,
    n_paths: usize,
    alphabet_size: usize,
    seed: u64,
) -> PathPool {
    let alphabet = &FORMULA_ALPHABET[..alphabet_size.min(FORMULA_ALPHABET.len())];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut paths = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        let formulas = rng.gen_range(0..=4usize);
        let mut text = String::new();
        for _ in 0..formulas {
            let (expr, result) = alphabet[rng.gen_range(0..alphabet.len())];
            text.push_str(&format!("Compute <<{expr}={result}>>{result}. "));
        }
        text.push_str(&format!("The answer is {}", fmt_number(gold)));
        paths.push(ReasoningPath {
            lang,
            text,
            final_answer: Some(gold),
            origin: PathOrigin {
                model: "synthetic".into(),
                seed: p as u64,
                temperature: 0.9,
            },
        });
    }
    PathPool {
        problem_id: problem_id.to_string(),
        lang,
        gold,
        budget_k: n_paths as u32,
        paths,
    }
}

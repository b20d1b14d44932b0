//! Problem records and the line-delimited JSON corpus format.
//!
//! A corpus file holds one JSON object per line. Readers report the file and
//! line number on the first malformed line; blank lines are allowed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::lang::Lang;

/// Where a record's solution text came from: the base corpus, or a
/// rejection-sampled reasoning path added as augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Base,
    Xrft,
}

impl Origin {
    pub fn is_base(&self) -> bool {
        *self == Origin::Base
    }
}

/// One math problem with its reference chain-of-thought solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub id: String,
    pub lang: Lang,
    pub question: String,
    /// Reference solution text, typically carrying `<<expr=result>>`
    /// calculator annotations.
    pub answer_text: String,
    /// Gold numeric answer.
    pub gold: f64,
    /// Multiple-choice options. Empty for grade-school word problems; housed
    /// so option-bearing datasets round-trip.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<String>,
    /// Translation attempts consumed to produce this record (0 for source
    /// material).
    #[serde(default)]
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Origin::is_base")]
    pub origin: Origin,
}

impl ProblemRecord {
    pub fn new(
        id: impl Into<String>,
        lang: Lang,
        question: impl Into<String>,
        answer_text: impl Into<String>,
        gold: f64,
    ) -> Self {
        ProblemRecord {
            id: id.into(),
            lang,
            question: question.into(),
            answer_text: answer_text.into(),
            gold,
            options: Vec::new(),
            attempts: 0,
            origin: Origin::Base,
        }
    }
}

/// Group records by language, preserving input order within each group.
pub fn by_lang(records: &[ProblemRecord]) -> BTreeMap<Lang, Vec<&ProblemRecord>> {
    let mut map: BTreeMap<Lang, Vec<&ProblemRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.lang).or_default().push(r);
    }
    map
}

/// Distinct record ids, sorted.
pub fn id_set(records: &[ProblemRecord]) -> BTreeSet<&str> {
    records.iter().map(|r| r.id.as_str()).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Read a line-delimited JSON file into typed records.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            source: e,
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Write records as line-delimited JSON, one compact object per line.
pub fn write_jsonl<T: Serialize>(
    path: impl AsRef<Path>,
    items: impl IntoIterator<Item = T>,
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(&item).map_err(|e| CorpusError::Parse {
            path: path.to_path_buf(),
            line: 0,
            source: e,
        })?;
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| CorpusError::io(path, e))?;
    }
    w.flush().map_err(|e| CorpusError::io(path, e))
}

/// Parse records out of an in-memory reader; used by stdin-driven tools.
pub fn read_jsonl_from<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, CorpusError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(Path::new("<input>"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            path: PathBuf::from("<input>"),
            line: idx + 1,
            source: e,
        })?;
        out.push(item);
    }
    Ok(out)
}

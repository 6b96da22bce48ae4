//! Corpus ingestion and the syntactic evaluation harness.
//!
//! Corpora are JSONL (`{"id","english","sanskrit"}` per line) or
//! three-column TSV (`id`, `english`, `sanskrit`; an optional header row is
//! skipped). Text is NFC-normalized and a leading byte-order mark dropped.
//! Structural problems stop ingestion with the first offending line; a
//! record whose Sanskrit does not parse is kept and flagged.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decode::{Generation, Partial};
use crate::meter::{classify_weights, pct, scan, MeterSpec, Verdict, VerdictCounts};
use crate::script::nfc;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error("unknown corpus format {0:?} (expected jsonl or tsv)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Tsv,
}

impl Format {
    /// Guesses from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "jsonl" | "json" | "ndjson" => Some(Format::Jsonl),
            "tsv" | "tab" => Some(Format::Tsv),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "tsv" => Ok(Format::Tsv),
            other => Err(EvalError::UnknownFormat(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusRecord {
    pub id: String,
    pub english: String,
    pub sanskrit: String,
    /// 1-based source line.
    pub line: usize,
    /// Why the Sanskrit failed to parse, if it did.
    pub unparseable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub records: Vec<CorpusRecord>,
    /// Hex SHA-256 of the source bytes.
    pub sha256: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    id: serde_json::Value,
    #[serde(default)]
    english: String,
    sanskrit: String,
}

/// Reads a corpus file.
pub fn ingest(path: &Path, format: Format) -> Result<Corpus, EvalError> {
    let bytes = std::fs::read(path).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|e| EvalError::Format {
        line: 1 + e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        message: "invalid UTF-8".into(),
    })?;
    parse_corpus(&text, format)
}

/// Parses corpus text.
pub fn parse_corpus(text: &str, format: Format) -> Result<Corpus, EvalError> {
    let sha256 = hex::encode(Sha256::digest(text.as_bytes()));
    let body = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut records = Vec::new();
    for (i, raw) in body.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let (id, english, sanskrit) = match format {
            Format::Tsv => {
                let cols: Vec<&str> = raw.split('\t').collect();
                if cols.len() != 3 {
                    return Err(EvalError::Format {
                        line,
                        message: format!("expected 3 tab-separated columns, found {}", cols.len()),
                    });
                }
                if records.is_empty() && cols == ["id", "english", "sanskrit"] {
                    continue;
                }
                (cols[0].to_string(), cols[1].to_string(), cols[2].to_string())
            }
            Format::Jsonl => {
                let r: JsonRecord = serde_json::from_str(raw).map_err(|e| EvalError::Format {
                    line,
                    message: e.to_string(),
                })?;
                let id = match r.id {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Number(n) => n.to_string(),
                    other => {
                        return Err(EvalError::Format {
                            line,
                            message: format!("id must be a string or number, got {other}"),
                        })
                    }
                };
                (id, r.english, r.sanskrit)
            }
        };
        let sanskrit = nfc(sanskrit.trim()).into_owned();
        let unparseable = scan(&sanskrit).err().map(|e| e.to_string());
        records.push(CorpusRecord {
            id: nfc(&id).into_owned(),
            english: nfc(&english).into_owned(),
            sanskrit,
            line,
            unparseable,
        });
    }
    if records.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    Ok(Corpus { records, sha256 })
}

/// Verdict for one record or generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordVerdict {
    pub id: String,
    pub english: String,
    pub sanskrit: String,
    pub verdict: &'static str,
    pub syllables: Option<usize>,
    pub first_violation: Option<usize>,
    pub weights: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub meter: String,
    pub pattern: String,
    pub corpus_sha256: Option<String>,
    pub records: usize,
    pub full_pct: f64,
    pub partial_pct: f64,
    pub invalid_pct: f64,
    pub unparseable: usize,
    /// Share of generation runs that hit a dead end; absent for corpora.
    pub dead_end_rate: Option<f64>,
    pub counts: VerdictCounts,
    pub verdicts: Vec<RecordVerdict>,
}

fn judge(spec: &MeterSpec, id: &str, english: &str, sanskrit: &str) -> (RecordVerdict, Option<Verdict>) {
    match scan(sanskrit) {
        Ok(w) => {
            let v = classify_weights(spec, &w);
            let first_violation = match v {
                Verdict::Partial { first_violation } => Some(first_violation),
                _ => None,
            };
            (
                RecordVerdict {
                    id: id.into(),
                    english: english.into(),
                    sanskrit: sanskrit.into(),
                    verdict: v.label(),
                    syllables: Some(w.len()),
                    first_violation,
                    weights: Some(w.to_string()),
                    error: None,
                },
                Some(v),
            )
        }
        Err(e) => (
            RecordVerdict {
                id: id.into(),
                english: english.into(),
                sanskrit: sanskrit.into(),
                verdict: "invalid",
                syllables: None,
                first_violation: None,
                weights: None,
                error: Some(e.to_string()),
            },
            None,
        ),
    }
}

fn assemble(
    spec: &MeterSpec,
    sha: Option<String>,
    judged: Vec<(RecordVerdict, Option<Verdict>)>,
    dead_end_rate: Option<f64>,
) -> EvalReport {
    let mut counts = VerdictCounts::default();
    let mut verdicts = Vec::with_capacity(judged.len());
    for (rv, v) in judged {
        counts.add(v);
        verdicts.push(rv);
    }
    EvalReport {
        meter: spec.name().to_string(),
        pattern: spec.pattern(),
        corpus_sha256: sha,
        records: counts.total(),
        full_pct: counts.full_pct(),
        partial_pct: counts.partial_pct(),
        invalid_pct: counts.invalid_pct(),
        unparseable: counts.unparseable,
        dead_end_rate,
        counts,
        verdicts,
    }
}

/// Classifies every record of a corpus.
pub fn evaluate(corpus: &Corpus, spec: &MeterSpec) -> Result<EvalReport, EvalError> {
    if corpus.records.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let judged = corpus
        .records
        .iter()
        .map(|r| judge(spec, &r.id, &r.english, &r.sanskrit))
        .collect();
    Ok(assemble(spec, Some(corpus.sha256.clone()), judged, None))
}

/// Evaluates a batch of generation runs. Verdict percentages cover the
/// completed runs; dead ends only enter `dead_end_rate`.
pub fn evaluate_generations(
    outcomes: &[Result<Generation, Box<Partial>>],
    spec: &MeterSpec,
) -> Result<EvalReport, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let judged = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.as_ref().ok().map(|g| judge(spec, &format!("gen-{i}"), "", &g.text)))
        .collect();
    let dead = outcomes.iter().filter(|o| o.is_err()).count();
    Ok(assemble(spec, None, judged, Some(pct(dead, outcomes.len()))))
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-record verdicts as CSV.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "verdict", "syllables", "first_violation", "weights", "error"])
            .expect("in-memory write");
        let opt = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
        for v in &self.verdicts {
            w.write_record([
                v.id.as_str(),
                v.verdict,
                &opt(v.syllables),
                &opt(v.first_violation),
                v.weights.as_deref().unwrap_or(""),
                v.error.as_deref().unwrap_or(""),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8 input")
    }
}

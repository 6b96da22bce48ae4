//! Meter specifications, their precompiled prefix filters, and verse
//! classification.

mod filter;
mod spec;

use serde::Serialize;
use thiserror::Error;

use crate::prosody::{weigh, Mode, WeightString};
use crate::script::{parse_auto, syllabify, ScriptError};

pub use filter::{compile, FilterSet};
pub use spec::{MeterSpec, PositionConstraint, ANUSTUBH_CONSTRAINTS, ANUSTUBH_FILE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeterError {
    #[error("weight string of length {len} exceeds the meter's {max} positions")]
    TooLong { len: usize, max: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid meter spec: {0}")]
    InvalidSpec(String),
    #[error("unknown meter {0:?}")]
    UnknownMeter(String),
    #[error("{0}")]
    Io(String),
}

/// Outcome of checking a complete text against a meter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    /// Right length and every position satisfied.
    Full,
    /// Right length, but position `first_violation` (1-based) is wrong.
    Partial { first_violation: usize },
    /// Wrong number of syllables.
    Invalid { syllables: usize },
}

impl Verdict {
    pub fn is_full(self) -> bool {
        self == Verdict::Full
    }

    /// Full or Partial: the verse has the required length.
    pub fn has_length(self) -> bool {
        !matches!(self, Verdict::Invalid { .. })
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Full => "full",
            Verdict::Partial { .. } => "partial",
            Verdict::Invalid { .. } => "invalid",
        }
    }
}

/// Checks finished weights position by position.
pub fn classify_weights(spec: &MeterSpec, w: &WeightString) -> Verdict {
    if w.len() != spec.total_len() {
        return Verdict::Invalid {
            syllables: w.len(),
        };
    }
    match spec
        .constraints()
        .iter()
        .zip(&w.weights)
        .position(|(c, &wt)| !c.admits(wt))
    {
        None => Verdict::Full,
        Some(i) => Verdict::Partial {
            first_violation: i + 1,
        },
    }
}

/// Scans a complete text (script detected automatically) and returns its
/// final weights.
pub fn scan(text: &str) -> Result<WeightString, ScriptError> {
    Ok(weigh(&syllabify(&parse_auto(text)?), Mode::Final))
}

/// Scans a complete text and classifies it. Separators do not count.
pub fn classify(spec: &MeterSpec, text: &str) -> Result<Verdict, ScriptError> {
    Ok(classify_weights(spec, &scan(text)?))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub full: usize,
    pub partial: usize,
    /// Wrong length, including unparseable entries.
    pub invalid: usize,
    pub unparseable: usize,
}

impl VerdictCounts {
    pub fn total(&self) -> usize {
        self.full + self.partial + self.invalid
    }

    pub fn add(&mut self, verdict: Option<Verdict>) {
        match verdict {
            Some(Verdict::Full) => self.full += 1,
            Some(Verdict::Partial { .. }) => self.partial += 1,
            Some(Verdict::Invalid { .. }) => self.invalid += 1,
            None => {
                self.invalid += 1;
                self.unparseable += 1;
            }
        }
    }

    /// Share of entries that conform fully.
    pub fn full_pct(&self) -> f64 {
        pct(self.full, self.total())
    }

    /// Share of entries with the required length; always at least
    /// [`full_pct`](Self::full_pct).
    pub fn partial_pct(&self) -> f64 {
        pct(self.full + self.partial, self.total())
    }

    pub fn invalid_pct(&self) -> f64 {
        pct(self.invalid, self.total())
    }
}

pub(crate) fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeterReport {
    pub full_pct: f64,
    pub partial_pct: f64,
    pub counts: VerdictCounts,
}

/// Classifies every text of a corpus and aggregates the percentages.
pub fn report<S: AsRef<str>>(spec: &MeterSpec, corpus: &[S]) -> Result<MeterReport, MeterError> {
    if corpus.is_empty() {
        return Err(MeterError::EmptyCorpus);
    }
    let mut counts = VerdictCounts::default();
    for text in corpus {
        counts.add(classify(spec, text.as_ref()).ok());
    }
    Ok(MeterReport {
        full_pct: counts.full_pct(),
        partial_pct: counts.partial_pct(),
        counts,
    })
}

//! Token-probability sources for decoding: the trainable n-gram reference
//! model and a line-delimited JSON protocol for models hosted elsewhere.

mod ngram;
pub mod protocol;
mod vocab;

use std::sync::Arc;

use thiserror::Error;

pub use ngram::{LocalLm, NgramModel, DEFAULT_ORDER, DEFAULT_SMOOTHING};
pub use protocol::RemoteLm;
pub use vocab::{aksharas, token_kind, TokenId, TokenKind, Vocab, BOS, EOS, SEP};

#[derive(Debug, Error)]
pub enum LmError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("token id {0} is outside the vocabulary")]
    UnknownId(TokenId),
    #[error("cannot tokenize {ch:?} at byte {offset}")]
    Untokenizable { ch: char, offset: usize },
    #[error("bad model: {0}")]
    BadModel(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("timed out waiting for the model server")]
    Timeout,
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for LmError {
    fn from(e: std::io::Error) -> Self {
        match e.kind() {
            std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut => LmError::Timeout,
            _ => LmError::Io(e.to_string()),
        }
    }
}

/// Probabilities for the next token, one per vocabulary id.
#[derive(Debug, Clone)]
pub struct NextDistribution {
    pub probs: Vec<f64>,
    pub reps: Option<Arc<RepTable>>,
}

impl NextDistribution {
    /// `(id, prob)` pairs by descending probability, ties by ascending id.
    pub fn sorted(&self) -> Vec<(TokenId, f64)> {
        let mut v: Vec<(TokenId, f64)> = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (i as TokenId, p))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// Sparse unit-length representation vectors, indexed by token id.
#[derive(Debug, Clone, Default)]
pub struct RepTable {
    rows: Vec<Vec<(TokenId, f32)>>,
}

impl RepTable {
    /// Rows must be sorted by id.
    pub fn new(rows: Vec<Vec<(TokenId, f32)>>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Cosine similarity of two tokens; zero when either is unknown.
    pub fn similarity(&self, a: TokenId, b: TokenId) -> f64 {
        let (Some(x), Some(y)) = (self.rows.get(a as usize), self.rows.get(b as usize)) else {
            return 0.0;
        };
        let (mut i, mut j, mut dot) = (0, 0, 0.0f64);
        while i < x.len() && j < y.len() {
            match x[i].0.cmp(&y[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += x[i].1 as f64 * y[j].1 as f64;
                    i += 1;
                    j += 1;
                }
            }
        }
        dot
    }
}

/// Anything that can rank next-token candidates.
pub trait LanguageModel {
    fn vocab(&self) -> &Vocab;

    /// The `m` most probable next tokens, best first. May return fewer when
    /// the source cannot supply more.
    fn top(&mut self, context: &[TokenId], m: usize) -> Result<Vec<(TokenId, f64)>, LmError>;

    /// Representation vectors for contrastive search, if the model has any.
    fn representations(&self) -> Option<&RepTable> {
        None
    }
}

impl<L: LanguageModel + ?Sized> LanguageModel for &mut L {
    fn vocab(&self) -> &Vocab {
        (**self).vocab()
    }

    fn top(&mut self, context: &[TokenId], m: usize) -> Result<Vec<(TokenId, f64)>, LmError> {
        (**self).top(context, m)
    }

    fn representations(&self) -> Option<&RepTable> {
        (**self).representations()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn similarity_is_cosine_of_unit_rows() {
        let t = RepTable::new(vec![
            vec![(0, 1.0)],
            vec![(0, 0.6), (1, 0.8)],
            vec![(2, 1.0)],
        ]);
        assert!((t.similarity(0, 1) - 0.6).abs() < 1e-6);
        assert!((t.similarity(1, 1) - 1.0).abs() < 1e-6);
        assert_eq!(t.similarity(0, 2), 0.0);
        assert_eq!(t.similarity(0, 9), 0.0);
    }

    #[test]
    fn sorted_breaks_ties_by_id() {
        let d = NextDistribution {
            probs: vec![0.0, 0.4, 0.2, 0.4],
            reps: None,
        };
        assert_eq!(d.sorted(), [(1, 0.4), (3, 0.4), (2, 0.2), (0, 0.0)]);
    }
}

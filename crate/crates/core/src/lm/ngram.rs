use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::vocab::{TokenId, Vocab, BOS, EOS};
use super::{LanguageModel, LmError, NextDistribution, RepTable};

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_SMOOTHING: f64 = 0.01;

const FORMAT: &str = "chandas-ngram";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct ContextCounts {
    total: u64,
    /// Sorted by token id.
    next: Vec<(TokenId, u64)>,
}

/// Akṣara-level n-gram model with interpolated add-k smoothing.
///
/// For a context `h` of length `m`, with `V` the number of predictable tokens
/// (everything but `<bos>`) and `k` the smoothing constant:
///
/// ```text
/// P_m(w | h) = (c(h, w) + k·V·P_{m-1}(w | h')) / (c(h) + k·V)
/// ```
///
/// where `h'` drops the oldest token of `h` and `P_{-1}` is uniform. Unseen
/// contexts back off to the shorter one unchanged.
#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    smoothing: f64,
    vocab: Vocab,
    /// `tables[m]` maps contexts of length `m` to their continuations.
    tables: Vec<HashMap<Vec<TokenId>, ContextCounts>>,
    reps: Arc<RepTable>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    order: usize,
    smoothing: f64,
    vocab: Vec<String>,
    counts: Vec<CountRow>,
}

#[derive(Serialize, Deserialize)]
struct CountRow {
    context: Vec<TokenId>,
    next: Vec<(TokenId, u64)>,
}

impl NgramModel {
    pub fn train<S: AsRef<str>>(corpus: &[S], order: usize) -> Result<NgramModel, LmError> {
        Self::train_with(corpus, order, DEFAULT_SMOOTHING)
    }

    pub fn train_with<S: AsRef<str>>(
        corpus: &[S],
        order: usize,
        smoothing: f64,
    ) -> Result<NgramModel, LmError> {
        if corpus.is_empty() {
            return Err(LmError::EmptyCorpus);
        }
        if order == 0 || !(smoothing > 0.0) {
            return Err(LmError::BadModel(format!(
                "order {order} / smoothing {smoothing} out of range"
            )));
        }
        let vocab = Vocab::build(corpus);
        let mut raw: Vec<HashMap<Vec<TokenId>, BTreeMap<TokenId, u64>>> =
            vec![HashMap::new(); order];
        for text in corpus {
            let mut stream = vec![BOS; order - 1];
            stream.extend(vocab.tokenize(text.as_ref())?);
            stream.push(EOS);
            for j in order - 1..stream.len() {
                for (m, table) in raw.iter_mut().enumerate() {
                    let ctx = stream[j - m..j].to_vec();
                    *table.entry(ctx).or_default().entry(stream[j]).or_default() += 1;
                }
            }
        }
        let tables = raw
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|(ctx, next)| {
                        let total = next.values().sum();
                        (
                            ctx,
                            ContextCounts {
                                total,
                                next: next.into_iter().collect(),
                            },
                        )
                    })
                    .collect()
            })
            .collect();
        Ok(Self::assemble(order, smoothing, vocab, tables))
    }

    fn assemble(
        order: usize,
        smoothing: f64,
        vocab: Vocab,
        tables: Vec<HashMap<Vec<TokenId>, ContextCounts>>,
    ) -> NgramModel {
        let reps = Arc::new(cooccurrence_reps(&vocab, tables.get(1)));
        NgramModel {
            order,
            smoothing,
            vocab,
            tables,
            reps,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn representations(&self) -> &Arc<RepTable> {
        &self.reps
    }

    /// Conditional distribution over the whole vocabulary. Only the last
    /// `order - 1` context tokens matter; shorter contexts are padded with
    /// `<bos>`.
    pub fn next(&self, context: &[TokenId]) -> Result<NextDistribution, LmError> {
        self.vocab.check(context)?;
        let history = self.history(context);
        let v = self.vocab.len();
        let predictable = (v - 1) as f64;
        let mut probs = vec![1.0 / predictable; v];
        probs[BOS as usize] = 0.0;
        let kv = self.smoothing * predictable;
        for m in 0..self.order {
            let ctx = &history[history.len() - m..];
            let Some(counts) = self.tables[m].get(ctx) else {
                continue;
            };
            let denom = counts.total as f64 + kv;
            let scale = kv / denom;
            for p in probs.iter_mut() {
                *p *= scale;
            }
            for &(w, c) in &counts.next {
                probs[w as usize] += c as f64 / denom;
            }
        }
        Ok(NextDistribution {
            probs,
            reps: Some(self.reps.clone()),
        })
    }

    fn history(&self, context: &[TokenId]) -> Vec<TokenId> {
        let want = self.order - 1;
        let tail = &context[context.len().saturating_sub(want)..];
        let mut h = vec![BOS; want - tail.len()];
        h.extend_from_slice(tail);
        h
    }

    /// Per-token perplexity of held-out texts, counting the end-of-text token.
    pub fn perplexity<S: AsRef<str>>(&self, texts: &[S]) -> Result<f64, LmError> {
        let mut log_sum = 0.0;
        let mut n = 0usize;
        for text in texts {
            let mut ctx = Vec::new();
            let mut ids = self.vocab.tokenize(text.as_ref())?;
            ids.push(EOS);
            for id in ids {
                let p = self.next(&ctx)?.probs[id as usize];
                log_sum += p.ln();
                n += 1;
                ctx.push(id);
            }
        }
        if n == 0 {
            return Err(LmError::EmptyCorpus);
        }
        Ok((-log_sum / n as f64).exp())
    }

    pub fn to_json(&self) -> String {
        let mut counts: Vec<CountRow> = self
            .tables
            .iter()
            .flat_map(|t| {
                t.iter().map(|(ctx, c)| CountRow {
                    context: ctx.clone(),
                    next: c.next.clone(),
                })
            })
            .collect();
        counts.sort_by(|a, b| {
            (a.context.len(), &a.context).cmp(&(b.context.len(), &b.context))
        });
        let file = ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            order: self.order,
            smoothing: self.smoothing,
            vocab: self.vocab.tokens().to_vec(),
            counts,
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<NgramModel, LmError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| LmError::BadModel(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(LmError::BadModel(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        if file.order == 0 {
            return Err(LmError::BadModel("order must be positive".into()));
        }
        let vocab = Vocab::from_tokens(file.vocab)?;
        let mut tables = vec![HashMap::new(); file.order];
        for row in file.counts {
            let m = row.context.len();
            if m >= file.order {
                return Err(LmError::BadModel(format!("context of length {m}")));
            }
            vocab.check(&row.context)?;
            vocab.check(&row.next.iter().map(|&(w, _)| w).collect::<Vec<_>>())?;
            let total = row.next.iter().map(|&(_, c)| c).sum();
            tables[m].insert(
                row.context,
                ContextCounts {
                    total,
                    next: row.next,
                },
            );
        }
        Ok(Self::assemble(file.order, file.smoothing, vocab, tables))
    }

    pub fn save(&self, path: &Path) -> Result<(), LmError> {
        std::fs::write(path, self.to_json()).map_err(|e| LmError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<NgramModel, LmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LmError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Representation of token `v`: its L2-normalized row of bigram
/// continuation counts, plus a small one-hot component so that tokens with
/// no recorded continuations are still distinguishable.
fn cooccurrence_reps(
    vocab: &Vocab,
    bigrams: Option<&HashMap<Vec<TokenId>, ContextCounts>>,
) -> RepTable {
    const ONE_HOT: f64 = 0.5;
    let rows = (0..vocab.len() as TokenId)
        .map(|v| {
            let mut row: BTreeMap<TokenId, f64> = BTreeMap::new();
            if let Some(counts) = bigrams.and_then(|b| b.get(&vec![v])) {
                for &(w, c) in &counts.next {
                    row.insert(w, c as f64 / counts.total as f64);
                }
            }
            *row.entry(v).or_default() += ONE_HOT;
            let norm = row.values().map(|x| x * x).sum::<f64>().sqrt();
            row.into_iter().map(|(w, x)| (w, (x / norm) as f32)).collect()
        })
        .collect();
    RepTable::new(rows)
}

/// An [`NgramModel`] seen through the [`LanguageModel`] interface. Keeps the
/// last sorted distribution so that widening `m` for the same context does
/// not recompute it.
pub struct LocalLm<'a> {
    model: &'a NgramModel,
    last: Option<(Vec<TokenId>, Vec<(TokenId, f64)>)>,
}

impl<'a> LocalLm<'a> {
    pub fn new(model: &'a NgramModel) -> Self {
        Self { model, last: None }
    }
}

impl LanguageModel for LocalLm<'_> {
    fn vocab(&self) -> &Vocab {
        &self.model.vocab
    }

    fn top(&mut self, context: &[TokenId], m: usize) -> Result<Vec<(TokenId, f64)>, LmError> {
        let key = self.model.history(context);
        let fresh = !matches!(&self.last, Some((k, _)) if *k == key);
        if fresh {
            let dist = self.model.next(context)?;
            self.last = Some((key, dist.sorted()));
        }
        let sorted = &self.last.as_ref().expect("just filled").1;
        Ok(sorted[..m.min(sorted.len())].to_vec())
    }

    fn representations(&self) -> Option<&RepTable> {
        Some(&self.model.reps)
    }
}

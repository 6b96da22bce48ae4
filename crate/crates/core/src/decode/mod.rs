//! Metrically constrained decoding.
//!
//! At every step the engine asks the model for its `k` best next tokens,
//! appends each one tentatively to the verse so far, re-scans, and masks the
//! ones whose weights no longer fit the meter's prefix filter. If nothing
//! survives, `k` grows until it reaches `k_max`; past that the session ends
//! in [`DecodeError::DeadEnd`]. Survivors are renormalized and handed to the
//! configured [`SamplerSpec`]. Decoding stops as soon as the verse has all
//! its syllables.

mod bench;
pub mod mask_service;
mod sampler;
mod scanner;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lm::{LanguageModel, LmError, RepTable, TokenId, TokenKind, EOS};
use crate::meter::{MeterSpec, Verdict};
use crate::script::{transliterate, Phoneme, Script};

pub use bench::{bench, run_batch, BenchReport};
pub use sampler::SamplerSpec;
pub use scanner::{Rejection, Scanner, Tentative};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("dead end after {} syllables: no admissible token among the top {}", .0.syllables, .0.k_max)]
    DeadEnd(Box<Partial>),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("forced prefix rejected: {0}")]
    Prefix(String),
    #[error("finished verse failed validation: {0}")]
    Unsound(String),
}

/// What was generated before a dead end.
#[derive(Debug, Clone)]
pub struct Partial {
    pub text: String,
    pub tokens: Vec<TokenId>,
    pub syllables: usize,
    pub k_max: usize,
    pub steps: Vec<StepStats>,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeConfig {
    /// Candidates examined first at every step.
    pub k_init: usize,
    /// Upper bound for escalation; `None` means the whole vocabulary.
    pub k_max: Option<usize>,
    /// Factor by which `k` grows when nothing survives.
    pub k_growth: f64,
    pub sampler: SamplerSpec,
    /// Entries in the scansion cache; 0 re-scans the whole verse for every
    /// candidate.
    pub cache_capacity: usize,
    pub seed: u64,
    /// When false the meter is not enforced: candidates are only checked for
    /// well-formed script, the model may end the text, and the verdict is
    /// whatever the result scans to.
    pub mask: bool,
    /// Hard cap on generated tokens.
    pub max_tokens: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            k_init: 25,
            k_max: None,
            k_growth: 2.0,
            sampler: SamplerSpec::Greedy,
            cache_capacity: 1000,
            seed: 0,
            mask: true,
            max_tokens: 512,
        }
    }
}

impl DecodeConfig {
    /// Effective `(k_init, k_max)` for a vocabulary of `vocab_len` tokens.
    pub fn bounds(&self, vocab_len: usize) -> Result<(usize, usize), DecodeError> {
        if self.k_init == 0 {
            return Err(DecodeError::Config("k_init must be at least 1".into()));
        }
        if !(self.k_growth > 1.0) {
            return Err(DecodeError::Config("k_growth must exceed 1".into()));
        }
        if let Some(max) = self.k_max {
            if max < self.k_init {
                return Err(DecodeError::Config(format!(
                    "k_max {max} is below k_init {}",
                    self.k_init
                )));
            }
        }
        self.sampler.validate()?;
        let k_max = self.k_max.unwrap_or(vocab_len).min(vocab_len).max(1);
        Ok((self.k_init.min(k_max), k_max))
    }
}

/// Per-generation inputs besides the configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerateRequest {
    /// Conditioning tokens seen by the model but not part of the verse.
    pub prompt_context: Vec<TokenId>,
    /// Text the verse must start with; it is checked like generated text.
    pub prefix: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub token: TokenId,
    /// `k` at which the token was found.
    pub k: usize,
    pub examined: usize,
    pub survived: usize,
    pub escalations: usize,
    pub cache_hits: u64,
    pub cache_misses: u64,
    #[serde(skip)]
    pub latency: Duration,
    #[serde(skip)]
    pub model_time: Duration,
    #[serde(skip)]
    pub scansion_time: Duration,
}

/// A finished verse.
#[derive(Debug, Clone)]
pub struct Generation {
    /// Devanagari with daṇḍa decoration.
    pub text: String,
    pub tokens: Vec<TokenId>,
    pub weights: String,
    pub verdict: Verdict,
    pub syllables: usize,
    pub steps: Vec<StepStats>,
    /// Contrastive search fell back to greedy for lack of representations.
    pub degraded: bool,
    pub wall: Duration,
}

/// Aggregate statistics of one generation. Timing fields are `None` when
/// left out for reproducible output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub tokens: usize,
    pub examined: usize,
    pub survived: usize,
    pub escalations: usize,
    pub cache_hit_rate: f64,
    pub dead_end: bool,
    pub degraded: bool,
    pub latency_mean_s: Option<f64>,
    pub throughput_tok_s: Option<f64>,
}

/// JSON record of a generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub text_devanagari: String,
    pub text_iast: String,
    pub weights: String,
    pub verdict: &'static str,
    pub syllables: usize,
    pub stats: GenerationStats,
}

pub(crate) fn step_stats(steps: &[StepStats], wall: Duration, dead_end: bool, degraded: bool, timing: bool) -> GenerationStats {
    let (hits, misses) = steps
        .iter()
        .fold((0, 0), |(h, m), s| (h + s.cache_hits, m + s.cache_misses));
    let n = steps.len();
    let latency: Duration = steps.iter().map(|s| s.latency).sum();
    GenerationStats {
        tokens: n,
        examined: steps.iter().map(|s| s.examined).sum(),
        survived: steps.iter().map(|s| s.survived).sum(),
        escalations: steps.iter().map(|s| s.escalations).sum(),
        cache_hit_rate: ratio(hits as f64, (hits + misses) as f64),
        dead_end,
        degraded,
        latency_mean_s: timing.then(|| ratio(latency.as_secs_f64(), n as f64)),
        throughput_tok_s: timing.then(|| ratio(n as f64, wall.as_secs_f64())),
    }
}

pub(crate) fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

impl Generation {
    pub fn stats(&self, timing: bool) -> GenerationStats {
        step_stats(&self.steps, self.wall, false, self.degraded, timing)
    }

    pub fn record(&self, timing: bool) -> GenerationRecord {
        GenerationRecord {
            text_devanagari: self.text.clone(),
            text_iast: transliterate(&self.text, Script::Devanagari, Script::Iast)
                .expect("generated text is well formed"),
            weights: self.weights.clone(),
            verdict: self.verdict.label(),
            syllables: self.syllables,
            stats: self.stats(timing),
        }
    }
}

impl Partial {
    pub fn stats(&self, timing: bool) -> GenerationStats {
        step_stats(&self.steps, self.wall, true, false, timing)
    }
}

/// Generates one verse.
pub fn generate(
    lm: &mut dyn LanguageModel,
    spec: &MeterSpec,
    config: &DecodeConfig,
    request: &GenerateRequest,
) -> Result<Generation, DecodeError> {
    let started = Instant::now();
    let vocab = lm.vocab().clone();
    let (k_init, k_max) = config.bounds(vocab.len())?;
    vocab.check(&request.prompt_context)?;
    let reps: Option<RepTable> = match config.sampler {
        SamplerSpec::Contrastive { .. } => lm.representations().cloned(),
        _ => None,
    };
    let mut scanner = if config.mask {
        Scanner::new(spec, config.cache_capacity)
    } else {
        Scanner::unconstrained(spec, config.cache_capacity)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut context = request.prompt_context.clone();
    let mut tokens: Vec<TokenId> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut steps: Vec<StepStats> = Vec::new();
    let mut degraded = false;

    for id in vocab.tokenize(&request.prefix)? {
        let text = vocab.text(id).expect("tokenizer yields known ids");
        scanner
            .accept(text)
            .map_err(|r| DecodeError::Prefix(format!("{text:?}: {r:?}")))?;
        context.push(id);
        tokens.push(id);
        counts.push(scanner.syllables());
    }

    while !scanner.is_complete() && tokens.len() < config.max_tokens {
        let step_start = Instant::now();
        let mut stats = StepStats::default();
        let (hits0, misses0) = scanner.cache_counts();
        let mut k = if config.mask { k_init } else { k_max.min(k_init) };
        let mut survivors: Vec<(TokenId, f64)> = Vec::new();
        loop {
            let t = Instant::now();
            let top = lm.top(&context, k)?;
            stats.model_time += t.elapsed();
            let t = Instant::now();
            for &(id, p) in top.iter().skip(stats.examined) {
                stats.examined += 1;
                if p <= 0.0 {
                    continue;
                }
                let ok = match (id, config.mask) {
                    (EOS, false) => true,
                    _ if vocab.is_special(id) => false,
                    _ => scanner.check(vocab.text(id).unwrap_or_default()).is_ok(),
                };
                if ok {
                    survivors.push((id, p));
                }
            }
            stats.scansion_time += t.elapsed();
            if !survivors.is_empty() || !config.mask {
                break;
            }
            if k >= k_max {
                stats.k = k;
                stats.latency = step_start.elapsed();
                steps.push(stats);
                return Err(DecodeError::DeadEnd(Box::new(Partial {
                    text: scanner.text().to_string(),
                    tokens,
                    syllables: scanner.syllables(),
                    k_max,
                    steps,
                    wall: started.elapsed(),
                })));
            }
            k = ((k as f64 * config.k_growth).ceil() as usize).clamp(k + 1, k_max);
            stats.escalations += 1;
        }
        if survivors.is_empty() {
            break;
        }
        let total: f64 = survivors.iter().map(|&(_, p)| p).sum();
        for s in &mut survivors {
            s.1 /= total;
        }
        let (id, fell_back) = config.sampler.pick(&survivors, &context, reps.as_ref(), &mut rng);
        degraded |= fell_back;
        stats.k = k;
        stats.survived = survivors.len();
        if id == EOS {
            break;
        }
        let t = Instant::now();
        scanner
            .accept(vocab.text(id).expect("known id"))
            .expect("survivor is admissible");
        stats.scansion_time += t.elapsed();
        let (hits, misses) = scanner.cache_counts();
        stats.cache_hits = hits - hits0;
        stats.cache_misses = misses - misses0;
        stats.token = id;
        stats.latency = step_start.elapsed();
        context.push(id);
        tokens.push(id);
        counts.push(scanner.syllables());
        steps.push(stats);
    }

    if config.mask && !scanner.is_complete() {
        return Err(DecodeError::DeadEnd(Box::new(Partial {
            text: scanner.text().to_string(),
            tokens,
            syllables: scanner.syllables(),
            k_max,
            steps,
            wall: started.elapsed(),
        })));
    }
    let pieces: Vec<&str> = tokens
        .iter()
        .map(|&id| vocab.text(id).expect("known id"))
        .collect();
    let text = decorate(&pieces, &counts, spec);
    let (verdict, weights) = match crate::meter::scan(&text) {
        Ok(w) => (crate::meter::classify_weights(spec, &w), w.to_string()),
        Err(_) => (
            Verdict::Invalid {
                syllables: scanner.syllables(),
            },
            String::new(),
        ),
    };
    if config.mask && !verdict.is_full() {
        return Err(DecodeError::Unsound(format!("{text:?} scans as {verdict:?}")));
    }
    Ok(Generation {
        text,
        tokens,
        weights,
        verdict,
        syllables: scanner.syllables(),
        steps,
        degraded,
        wall: started.elapsed(),
    })
}

/// Joins token texts and adds punctuation: a daṇḍa after the first half
/// verse, at a token boundary where it cannot disturb the script, and a
/// double daṇḍa at the end. Separators never count as syllables, so the
/// weights are unchanged.
fn decorate(pieces: &[&str], counts: &[usize], spec: &MeterSpec) -> String {
    let half = (spec.pada_count() >= 2 && spec.pada_count().is_multiple_of(2))
        .then(|| spec.total_len() / 2);
    let starts_letter = |s: &str| {
        s.chars().next().and_then(Phoneme::from_devanagari_letter).is_some()
    };
    let starts_separator = |s: &str| crate::lm::token_kind(s) == TokenKind::Separator;
    let mut cut: Option<(usize, &str)> = None;
    if let Some(half) = half {
        let boundaries = (1..pieces.len()).filter(|&j| counts[j - 1] == half);
        for j in boundaries.clone() {
            if starts_separator(pieces[j]) {
                cut = Some((j, " ।"));
                break;
            }
        }
        if cut.is_none() {
            cut = boundaries
                .filter(|&j| starts_letter(pieces[j]) && !pieces[j - 1].ends_with('्'))
                .map(|j| {
                    let mark = if pieces[j - 1].ends_with(' ') { "। " } else { " । " };
                    (j, mark)
                })
                .next();
        }
    }
    let mut out = String::new();
    for (j, piece) in pieces.iter().enumerate() {
        if let Some((at, mark)) = cut {
            if at == j {
                out.push_str(mark);
            }
        }
        out.push_str(piece);
    }
    let trimmed = out.trim_end().len();
    out.truncate(trimmed);
    if !out.is_empty() {
        out.push_str(" ॥");
    }
    out
}

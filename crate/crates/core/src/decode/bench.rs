use std::time::Duration;

use serde::Serialize;

use super::{generate, ratio, DecodeConfig, DecodeError, GenerateRequest, Generation, Partial, StepStats};
use crate::lm::LanguageModel;
use crate::meter::{pct, MeterSpec, VerdictCounts};

/// Runs one generation per request. Request `i` uses seed `config.seed + i`.
/// Dead ends are outcomes, not errors; model failures abort the batch.
pub fn run_batch(
    lm: &mut dyn LanguageModel,
    spec: &MeterSpec,
    config: &DecodeConfig,
    requests: &[GenerateRequest],
) -> Result<Vec<Result<Generation, Box<Partial>>>, DecodeError> {
    let mut out = Vec::with_capacity(requests.len());
    for (i, request) in requests.iter().enumerate() {
        let config = DecodeConfig {
            seed: config.seed.wrapping_add(i as u64),
            ..config.clone()
        };
        match generate(lm, spec, &config, request) {
            Ok(g) => out.push(Ok(g)),
            Err(DecodeError::DeadEnd(p)) => out.push(Err(p)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Aggregates over a batch of generations. Timing fields are `None` when
/// left out for reproducible output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub generations: usize,
    pub completed: usize,
    pub dead_ends: usize,
    pub dead_end_rate: f64,
    /// Verdicts of completed generations.
    pub full_pct: f64,
    pub partial_pct: f64,
    pub tokens: usize,
    pub examined_per_token: f64,
    pub cache_hit_rate: f64,
    /// Escalations per generated token.
    pub escalation_rate: f64,
    pub latency_mean_s: Option<f64>,
    pub throughput_tok_s: Option<f64>,
    /// Share of step time spent scanning candidates.
    pub scansion_fraction: Option<f64>,
    /// Share of step time spent waiting for the model.
    pub model_fraction: Option<f64>,
}

impl BenchReport {
    pub fn from_outcomes(outcomes: &[Result<Generation, Box<Partial>>], timing: bool) -> Self {
        let mut counts = VerdictCounts::default();
        let mut steps: Vec<&StepStats> = Vec::new();
        let mut wall = Duration::ZERO;
        for o in outcomes {
            match o {
                Ok(g) => {
                    counts.add(Some(g.verdict));
                    steps.extend(&g.steps);
                    wall += g.wall;
                }
                Err(p) => {
                    steps.extend(&p.steps);
                    wall += p.wall;
                }
            }
        }
        let n = outcomes.len();
        let completed = counts.total();
        let tokens = steps.len();
        let hits: u64 = steps.iter().map(|s| s.cache_hits).sum();
        let misses: u64 = steps.iter().map(|s| s.cache_misses).sum();
        let latency: Duration = steps.iter().map(|s| s.latency).sum();
        let scansion: Duration = steps.iter().map(|s| s.scansion_time).sum();
        let model: Duration = steps.iter().map(|s| s.model_time).sum();
        let secs = |d: Duration| d.as_secs_f64();
        BenchReport {
            generations: n,
            completed,
            dead_ends: n - completed,
            dead_end_rate: pct(n - completed, n),
            full_pct: counts.full_pct(),
            partial_pct: counts.partial_pct(),
            tokens,
            examined_per_token: ratio(
                steps.iter().map(|s| s.examined).sum::<usize>() as f64,
                tokens as f64,
            ),
            cache_hit_rate: ratio(hits as f64, (hits + misses) as f64),
            escalation_rate: ratio(
                steps.iter().map(|s| s.escalations).sum::<usize>() as f64,
                tokens as f64,
            ),
            latency_mean_s: timing.then(|| ratio(secs(latency), tokens as f64)),
            throughput_tok_s: timing.then(|| ratio(tokens as f64, secs(wall))),
            scansion_fraction: timing.then(|| ratio(secs(scansion), secs(latency))),
            model_fraction: timing.then(|| ratio(secs(model), secs(latency))),
        }
    }
}

/// Runs a batch and reports on it.
pub fn bench(
    lm: &mut dyn LanguageModel,
    spec: &MeterSpec,
    config: &DecodeConfig,
    requests: &[GenerateRequest],
    timing: bool,
) -> Result<BenchReport, DecodeError> {
    let outcomes = run_batch(lm, spec, config, requests)?;
    Ok(BenchReport::from_outcomes(&outcomes, timing))
}

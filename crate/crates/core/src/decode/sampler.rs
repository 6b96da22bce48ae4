use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DecodeError;
use crate::lm::{RepTable, TokenId};

/// How to pick a token from the surviving candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SamplerSpec {
    Greedy,
    Multinomial { temperature: f64 },
    Nucleus { p: f64 },
    TopK { k: usize },
    /// Look-ahead-free contrastive search: among the `k` best candidates,
    /// maximize `(1 - alpha) * p - alpha * (max similarity to the context)`.
    Contrastive { alpha: f64, k: usize },
}

impl SamplerSpec {
    pub const TEMPERATURE: f64 = 0.7;
    pub const TOP_P: f64 = 0.9;
    pub const TOP_K: usize = 10;
    pub const ALPHA: f64 = 0.6;
    pub const CONTRASTIVE_K: usize = 4;

    pub fn multinomial() -> Self {
        Self::Multinomial {
            temperature: Self::TEMPERATURE,
        }
    }

    pub fn nucleus() -> Self {
        Self::Nucleus { p: Self::TOP_P }
    }

    pub fn top_k() -> Self {
        Self::TopK { k: Self::TOP_K }
    }

    pub fn contrastive() -> Self {
        Self::Contrastive {
            alpha: Self::ALPHA,
            k: Self::CONTRASTIVE_K,
        }
    }

    /// The five shipped samplers with their default settings.
    pub fn all() -> [SamplerSpec; 5] {
        [
            Self::Greedy,
            Self::multinomial(),
            Self::nucleus(),
            Self::top_k(),
            Self::contrastive(),
        ]
    }

    /// Builds a sampler by name; unset parameters take their defaults.
    pub fn from_name(
        name: &str,
        temperature: Option<f64>,
        p: Option<f64>,
        k: Option<usize>,
        alpha: Option<f64>,
    ) -> Result<Self, DecodeError> {
        let spec = match name {
            "greedy" => Self::Greedy,
            "multinomial" => Self::Multinomial {
                temperature: temperature.unwrap_or(Self::TEMPERATURE),
            },
            "nucleus" | "top-p" => Self::Nucleus {
                p: p.unwrap_or(Self::TOP_P),
            },
            "topk" | "top-k" => Self::TopK {
                k: k.unwrap_or(Self::TOP_K),
            },
            "contrastive" => Self::Contrastive {
                alpha: alpha.unwrap_or(Self::ALPHA),
                k: k.unwrap_or(Self::CONTRASTIVE_K),
            },
            other => return Err(DecodeError::Config(format!("unknown sampler {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Greedy => "greedy",
            Self::Multinomial { .. } => "multinomial",
            Self::Nucleus { .. } => "nucleus",
            Self::TopK { .. } => "topk",
            Self::Contrastive { .. } => "contrastive",
        }
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        let ok = match *self {
            Self::Greedy => true,
            Self::Multinomial { temperature } => temperature > 0.0 && temperature.is_finite(),
            Self::Nucleus { p } => p > 0.0 && p <= 1.0,
            Self::TopK { k } => k >= 1,
            Self::Contrastive { alpha, k } => (0.0..=1.0).contains(&alpha) && k >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(DecodeError::Config(format!("invalid sampler settings {self:?}")))
        }
    }

    /// Picks one of `candidates`, which must be nonempty, sorted by
    /// descending probability and normalized. Returns the choice and whether
    /// contrastive search had to fall back to greedy for lack of
    /// representations.
    pub fn pick(
        &self,
        candidates: &[(TokenId, f64)],
        history: &[TokenId],
        reps: Option<&RepTable>,
        rng: &mut impl Rng,
    ) -> (TokenId, bool) {
        assert!(!candidates.is_empty(), "nothing to sample from");
        match *self {
            Self::Greedy => (candidates[0].0, false),
            Self::Multinomial { temperature } => {
                let weights: Vec<f64> = candidates
                    .iter()
                    .map(|&(_, p)| p.powf(1.0 / temperature))
                    .collect();
                (draw(candidates, &weights, rng), false)
            }
            Self::Nucleus { p } => {
                let mut mass = 0.0;
                let mut cut = candidates.len();
                for (i, &(_, q)) in candidates.iter().enumerate() {
                    mass += q;
                    if mass >= p {
                        cut = i + 1;
                        break;
                    }
                }
                let kept = &candidates[..cut];
                let weights: Vec<f64> = kept.iter().map(|&(_, q)| q).collect();
                (draw(kept, &weights, rng), false)
            }
            Self::TopK { k } => {
                let kept = &candidates[..k.min(candidates.len())];
                let weights: Vec<f64> = kept.iter().map(|&(_, q)| q).collect();
                (draw(kept, &weights, rng), false)
            }
            Self::Contrastive { alpha, k } => {
                let Some(reps) = reps else {
                    return (candidates[0].0, true);
                };
                let mut best = (candidates[0].0, f64::NEG_INFINITY);
                for &(id, p) in &candidates[..k.min(candidates.len())] {
                    let penalty = history
                        .iter()
                        .map(|&h| reps.similarity(id, h))
                        .fold(0.0, f64::max);
                    let score = (1.0 - alpha) * p - alpha * penalty;
                    if score > best.1 {
                        best = (id, score);
                    }
                }
                (best.0, false)
            }
        }
    }
}

/// Draws an index proportionally to `weights` (which need not sum to one).
fn draw(candidates: &[(TokenId, f64)], weights: &[f64], rng: &mut impl Rng) -> TokenId {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return candidates[0].0;
    }
    let mut target = rng.random::<f64>() * total;
    for (&(id, _), &w) in candidates.iter().zip(weights) {
        if target < w {
            return id;
        }
        target -= w;
    }
    candidates[candidates.len() - 1].0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn greedy_takes_the_argmax() {
        let c = [(5, 0.6), (9, 0.4)];
        assert_eq!(SamplerSpec::Greedy.pick(&c, &[], None, &mut rng()), (5, false));
    }

    #[test]
    fn top_k_one_is_greedy() {
        let c = [(5, 0.3), (9, 0.3), (2, 0.4)];
        for _ in 0..20 {
            assert_eq!(SamplerSpec::TopK { k: 1 }.pick(&c, &[], None, &mut rng()).0, 5);
        }
    }

    #[test]
    fn nucleus_stays_inside_the_mass() {
        let c = [(1, 0.5), (2, 0.45), (3, 0.05)];
        let mut r = rng();
        for _ in 0..500 {
            let (id, _) = SamplerSpec::Nucleus { p: 0.9 }.pick(&c, &[], None, &mut r);
            assert_ne!(id, 3);
        }
    }

    #[test]
    fn multinomial_frequencies_follow_tempered_weights() {
        let c = [(1, 0.75), (2, 0.25)];
        let spec = SamplerSpec::Multinomial { temperature: 1.0 };
        let mut r = rng();
        let n = 20_000;
        let ones = (0..n).filter(|_| spec.pick(&c, &[], None, &mut r).0 == 1).count();
        let share = ones as f64 / n as f64;
        assert!((share - 0.75).abs() < 0.02, "{share}");
    }

    #[test]
    fn contrastive_penalizes_repeats() {
        let reps = RepTable::new(vec![vec![(0, 1.0)], vec![(1, 1.0)]]);
        let c = [(0, 0.55), (1, 0.45)];
        let spec = SamplerSpec::contrastive();
        assert_eq!(spec.pick(&c, &[0], Some(&reps), &mut rng()), (1, false));
        assert_eq!(spec.pick(&c, &[], Some(&reps), &mut rng()), (0, false));
        assert_eq!(spec.pick(&c, &[0], None, &mut rng()), (0, true));
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(SamplerSpec::Nucleus { p: 0.0 }.validate().is_err());
        assert!(SamplerSpec::Multinomial { temperature: 0.0 }.validate().is_err());
        assert!(SamplerSpec::TopK { k: 0 }.validate().is_err());
        assert!(SamplerSpec::from_name("beam", None, None, None, None).is_err());
    }
}

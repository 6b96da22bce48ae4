#![allow(dead_code)]

use std::sync::OnceLock;

use chandas::eval::{parse_corpus, Format};
use chandas::lm::{LanguageModel, LmError, NgramModel, RepTable, TokenId, Vocab};
use chandas::meter::{MeterSpec, PositionConstraint};
use chandas::script::{parse, syllabify, PhonemeClass, Script};

pub const SYNTHETIC: &str = include_str!("../../../../data/anustubh_synthetic.tsv");
pub const VALMIKI: &str = include_str!("../../../../data/valmiki_samples.tsv");

pub fn verses(tsv: &str) -> Vec<String> {
    parse_corpus(tsv, Format::Tsv)
        .unwrap()
        .records
        .into_iter()
        .map(|r| r.sanskrit)
        .collect()
}

pub fn model() -> &'static NgramModel {
    static MODEL: OnceLock<NgramModel> = OnceLock::new();
    MODEL.get_or_init(|| NgramModel::train(&verses(SYNTHETIC), 4).unwrap())
}

/// A model that always proposes the same ranked list, whatever the context.
pub struct FixedLm {
    pub vocab: Vocab,
    pub ranked: Vec<(TokenId, f64)>,
    pub reps: Option<RepTable>,
}

impl FixedLm {
    /// Ranks the given token strings first, in order, with geometric
    /// weights; every other token follows with a small equal share.
    pub fn new(vocab: Vocab, preferred: &[&str], include_rest: bool) -> Self {
        let mut ranked: Vec<(TokenId, f64)> = Vec::new();
        let mut w = 1.0;
        for t in preferred {
            ranked.push((vocab.id(t).unwrap_or_else(|| panic!("{t:?} not in vocab")), w));
            w *= 0.9;
        }
        if include_rest {
            for id in 3..vocab.len() as TokenId {
                if !ranked.iter().any(|&(r, _)| r == id) {
                    ranked.push((id, 1e-4));
                }
            }
        }
        let total: f64 = ranked.iter().map(|&(_, p)| p).sum();
        for r in &mut ranked {
            r.1 /= total;
        }
        Self {
            vocab,
            ranked,
            reps: None,
        }
    }
}

impl LanguageModel for FixedLm {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn top(&mut self, _context: &[TokenId], m: usize) -> Result<Vec<(TokenId, f64)>, LmError> {
        Ok(self.ranked[..m.min(self.ranked.len())].to_vec())
    }

    fn representations(&self) -> Option<&RepTable> {
        self.reps.as_ref()
    }
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c, '।' | '॥' | '|' | 'ऽ')
}

fn is_modifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| {
            matches!(c, '्' | 'ं' | 'ः' | 'ँ')
                || ('\u{093e}'..='\u{094c}').contains(&c)
                || matches!(c, '\u{0962}' | '\u{0963}')
        })
}

/// Independent reference for the decoder's mask: full re-parse of the
/// joined text and a position-by-position comparison against the spec.
pub fn admissible(spec: &MeterSpec, text: &str, last_token: Option<&str>, candidate: &str) -> bool {
    if candidate.is_empty() {
        return false;
    }
    if is_modifier(candidate) && last_token == Some(candidate) {
        return false;
    }
    if candidate.starts_with(is_separator)
        && (text.chars().all(is_separator) || text.ends_with(is_separator))
    {
        return false;
    }
    let joined = format!("{text}{candidate}");
    let Ok(seq) = parse(&joined, Script::Devanagari) else {
        return false;
    };
    let syl = syllabify(&seq);
    let n = syl.syllables.len();
    if n > spec.total_len() || n == spec.total_len() && !closed_fits(spec, &syl) {
        return false;
    }
    let mut ok = true;
    for (i, s) in syl.syllables.iter().enumerate() {
        let long = s.nucleus.class() == PhonemeClass::LongVowel || !s.coda_marks.is_empty();
        let heavy = long || s.following_cluster_size >= 2;
        let last = i + 1 == n;
        let settled = !last || heavy;
        let c = spec.constraints()[i];
        let fits = |guru: bool| match c {
            PositionConstraint::Any => true,
            PositionConstraint::MustGuru => guru,
            PositionConstraint::MustLaghu => !guru,
        };
        ok &= if settled { fits(heavy) } else { fits(true) || fits(false) };
    }
    ok
}

fn closed_fits(spec: &MeterSpec, syl: &chandas::script::Syllabification) -> bool {
    let n = syl.syllables.len();
    syl.syllables.iter().enumerate().all(|(i, s)| {
        let heavy = s.nucleus.class() == PhonemeClass::LongVowel
            || !s.coda_marks.is_empty()
            || s.following_cluster_size >= 2
            || (i + 1 == n && s.following_cluster_size >= 1);
        match spec.constraints()[i] {
            PositionConstraint::Any => true,
            PositionConstraint::MustGuru => heavy,
            PositionConstraint::MustLaghu => !heavy,
        }
    })
}

/// Words of phonemes in which coda marks only follow vowels.
pub fn words() -> impl proptest::strategy::Strategy<Value = Vec<Vec<chandas::script::Phoneme>>> {
    use chandas::script::Phoneme;
    use proptest::prelude::*;
    let non_coda: Vec<Phoneme> = Phoneme::ALL.iter().copied().filter(|p| !p.is_coda()).collect();
    let codas: Vec<Phoneme> = Phoneme::ALL.iter().copied().filter(|p| p.is_coda()).collect();
    let word = prop::collection::vec(
        (prop::sample::select(non_coda), prop::option::weighted(0.15, prop::sample::select(codas))),
        1..8,
    )
    .prop_map(|pairs| {
        let mut out = Vec::new();
        for (p, coda) in pairs {
            out.push(p);
            if let (true, Some(c)) = (p.is_vowel(), coda) {
                out.push(c);
            }
        }
        out
    });
    prop::collection::vec(word, 1..5)
}

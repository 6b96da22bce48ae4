use std::num::NonZeroUsize;
use std::sync::Arc;

use lru::LruCache;
use serde::Serialize;

use crate::lm::{token_kind, TokenKind};
use crate::meter::{classify_weights, compile, FilterSet, MeterSpec};
use crate::prosody::{weigh, Mode, Weight, WeightString};
use crate::script::{nfc, parse, syllabify, Phoneme, PhonemeClass, Script, Syllabification};

/// Why a candidate token was masked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// Control tokens carry no text and never enter the verse.
    Special,
    /// A separator cannot open the verse.
    LeadingSeparator,
    /// A second separator in a row.
    RepeatedSeparator,
    /// The same mātrā or mark twice in a row.
    RepeatedModifier,
    /// The joined text does not parse.
    Malformed,
    /// More syllables than the meter holds.
    TooLong,
    /// The weights break a positional constraint.
    Meter,
    /// The verse is already complete.
    Complete,
}

/// Scansion of accepted text plus a candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tentative {
    pub syllables: usize,
    pub weights: WeightString,
}

/// What a tail scan contributes, independent of the text before it.
#[derive(Debug, Clone)]
struct TailScan {
    /// Consonants before the tail's first vowel.
    lead: usize,
    syllables: usize,
    streaming: WeightString,
    last_final: Option<Weight>,
}

/// Incremental scansion state for one verse in progress.
///
/// Holds the accepted text and answers "would this token keep the verse on
/// meter?". Appending text can only change the last accepted syllable and
/// what follows it, so with a cache the scanner re-parses just that tail and
/// memoizes the result under the tail's shape: the sequence of character
/// classes (consonant, virāma, short or long vowel, mark) that the scansion
/// depends on. With no cache it re-scans the whole text for every candidate.
pub struct Scanner {
    spec: MeterSpec,
    filters: Arc<FilterSet>,
    text: String,
    last_token: Option<String>,
    current: Tentative,
    split: usize,
    fixed: Vec<Weight>,
    pivot: Option<bool>,
    cache: Option<LruCache<String, Option<TailScan>>>,
    hits: u64,
    misses: u64,
    metrical: bool,
}

impl Scanner {
    pub fn new(spec: &MeterSpec, cache_capacity: usize) -> Self {
        Self {
            spec: spec.clone(),
            filters: compile(spec),
            text: String::new(),
            last_token: None,
            current: Tentative {
                syllables: 0,
                weights: WeightString {
                    weights: Vec::new(),
                    last_determinate: true,
                },
            },
            split: 0,
            fixed: Vec::new(),
            pivot: None,
            cache: NonZeroUsize::new(cache_capacity).map(LruCache::new),
            hits: 0,
            misses: 0,
            metrical: true,
        }
    }

    /// A scanner that only enforces well-formed script and the admissibility
    /// rules, not the meter.
    pub fn unconstrained(spec: &MeterSpec, cache_capacity: usize) -> Self {
        Self {
            metrical: false,
            ..Self::new(spec, cache_capacity)
        }
    }

    pub fn spec(&self) -> &MeterSpec {
        &self.spec
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn syllables(&self) -> usize {
        self.current.syllables
    }

    pub fn weights(&self) -> &WeightString {
        &self.current.weights
    }

    pub fn is_complete(&self) -> bool {
        self.current.syllables == self.spec.total_len()
    }

    /// Cache hits and misses so far.
    pub fn cache_counts(&self) -> (u64, u64) {
        (self.hits, self.misses)
    }

    /// Checks a candidate without accepting it.
    pub fn check(&mut self, candidate: &str) -> Result<Tentative, Rejection> {
        if self.is_complete() {
            return Err(Rejection::Complete);
        }
        let kind = token_kind(candidate);
        match kind {
            TokenKind::Special => return Err(Rejection::Special),
            TokenKind::Modifier if self.last_token.as_deref() == Some(candidate) => {
                return Err(Rejection::RepeatedModifier)
            }
            _ => {}
        }
        if candidate.chars().next().is_some_and(is_separator) {
            if self.text.chars().all(is_separator) {
                return Err(Rejection::LeadingSeparator);
            }
            if self.text.chars().next_back().is_some_and(is_separator) {
                return Err(Rejection::RepeatedSeparator);
            }
        }
        let (tentative, last_final) = match self.cache.is_some() {
            true => self.scan_tail(candidate)?,
            false => self.scan_full(candidate)?,
        };
        let max = self.spec.total_len();
        if !self.metrical {
            return Ok(tentative);
        }
        if tentative.syllables > max {
            return Err(Rejection::TooLong);
        }
        if !self
            .filters
            .prefix_ok(&tentative.weights)
            .expect("length checked against the meter")
        {
            return Err(Rejection::Meter);
        }
        if tentative.syllables == max {
            let mut closed = tentative.weights.clone();
            if let Some(w) = last_final {
                *closed.weights.last_mut().expect("nonempty") = w;
            }
            closed.last_determinate = true;
            if !classify_weights(&self.spec, &closed).is_full() {
                return Err(Rejection::Meter);
            }
        }
        Ok(tentative)
    }

    /// Checks and appends a token.
    pub fn accept(&mut self, token: &str) -> Result<Tentative, Rejection> {
        let tentative = self.check(token)?;
        self.text = nfc(&format!("{}{token}", self.text)).into_owned();
        self.last_token = Some(token.to_string());
        let syl = syllabify(&parse(&self.text, Script::Devanagari).expect("checked text parses"));
        self.rebase(&syl);
        debug_assert_eq!(self.current, tentative);
        debug_assert!(
            !self.metrical || self.filters.prefix_ok(&self.current.weights).unwrap_or(false)
        );
        Ok(tentative)
    }

    fn rebase(&mut self, syl: &Syllabification) {
        let n = syl.syllables.len();
        let streaming = weigh(syl, Mode::Streaming);
        self.current = Tentative {
            syllables: n,
            weights: streaming.clone(),
        };
        if n == 0 {
            self.split = 0;
            self.fixed.clear();
            self.pivot = None;
            return;
        }
        self.split = syl.syllables[n - 1].span.start;
        self.fixed = streaming.weights[..n.saturating_sub(2)].to_vec();
        self.pivot = (n >= 2).then(|| {
            let s = &syl.syllables[n - 2];
            s.nucleus.class() == PhonemeClass::LongVowel || !s.coda_marks.is_empty()
        });
    }

    /// The reference path: parse and weigh the whole tentative text.
    fn scan_full(&self, candidate: &str) -> Result<(Tentative, Option<Weight>), Rejection> {
        let text = format!("{}{candidate}", self.text);
        let seq = parse(&text, Script::Devanagari).map_err(|_| Rejection::Malformed)?;
        let syl = syllabify(&seq);
        let last_final = weigh(&syl, Mode::Final).weights.last().copied();
        Ok((
            Tentative {
                syllables: syl.syllables.len(),
                weights: weigh(&syl, Mode::Streaming),
            },
            last_final,
        ))
    }

    fn scan_tail(&mut self, candidate: &str) -> Result<(Tentative, Option<Weight>), Rejection> {
        let tail = format!("{}{candidate}", &self.text[self.split..]);
        let key = shape(&tail);
        let cache = self.cache.as_mut().expect("cached path");
        let scan = match cache.get(&key) {
            Some(hit) => {
                self.hits += 1;
                hit.clone()
            }
            None => {
                self.misses += 1;
                let scan = scan_piece(&tail);
                cache.put(key, scan.clone());
                scan
            }
        };
        let scan = scan.ok_or(Rejection::Malformed)?;
        Ok(self.join(&scan))
    }

    /// Splices a tail scan onto the fixed weights of the accepted text.
    fn join(&self, tail: &TailScan) -> (Tentative, Option<Weight>) {
        let Some(intrinsic) = self.pivot else {
            return (
                Tentative {
                    syllables: tail.syllables,
                    weights: tail.streaming.clone(),
                },
                tail.last_final,
            );
        };
        let mut weights = self.fixed.clone();
        let heavy = intrinsic || tail.lead >= 2;
        weights.push(if heavy { Weight::Guru } else { Weight::Laghu });
        weights.extend_from_slice(&tail.streaming.weights);
        let (last_determinate, last_final) = if tail.syllables == 0 {
            let closed = intrinsic || tail.lead >= 1;
            (heavy, Some(if closed { Weight::Guru } else { Weight::Laghu }))
        } else {
            (tail.streaming.last_determinate, tail.last_final)
        };
        (
            Tentative {
                syllables: self.fixed.len() + 1 + tail.syllables,
                weights: WeightString {
                    weights,
                    last_determinate,
                },
            },
            last_final,
        )
    }
}

fn scan_piece(text: &str) -> Option<TailScan> {
    let syl = syllabify(&parse(text, Script::Devanagari).ok()?);
    let lead = syl
        .syllables
        .first()
        .map_or(syl.pending.len(), |s| s.onset.len());
    Some(TailScan {
        lead,
        syllables: syl.syllables.len(),
        streaming: weigh(&syl, Mode::Streaming),
        last_final: weigh(&syl, Mode::Final).weights.last().copied(),
    })
}

fn is_separator(c: char) -> bool {
    token_kind(c.encode_utf8(&mut [0; 4])) == TokenKind::Separator
}

/// Cache key: each character replaced by the class the parser and the weight
/// rules care about. Characters with no class are kept verbatim behind a
/// backslash so they cannot collide with a class letter.
fn shape(text: &str) -> String {
    let mut key = String::with_capacity(text.len());
    for c in text.chars() {
        let class = if c == '्' {
            Some('_')
        } else if let Some(p) = Phoneme::from_vowel_sign(c) {
            Some(if p.class() == PhonemeClass::LongVowel { 'M' } else { 'm' })
        } else if Phoneme::from_coda_mark(c).is_some() {
            Some('H')
        } else if let Some(p) = Phoneme::from_devanagari_letter(c) {
            Some(match p.class() {
                PhonemeClass::Consonant => 'C',
                PhonemeClass::LongVowel => 'V',
                _ => 'v',
            })
        } else {
            None
        };
        match class {
            Some(k) => key.push(k),
            None => {
                key.push('\\');
                key.push(c);
            }
        }
    }
    key
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scanner(cache: usize) -> Scanner {
        Scanner::new(&MeterSpec::anustubh(), cache)
    }

    #[test]
    fn empty_verse_admits_any_syllable() {
        for cache in [0, 16] {
            let mut s = scanner(cache);
            for t in ["क", "का", "क्ष्मा", "अ", "रां"] {
                assert!(s.check(t).is_ok(), "{t}");
            }
        }
    }

    #[test]
    fn guru_at_fifth_position_is_masked() {
        for cache in [0, 16] {
            let mut s = scanner(cache);
            for t in ["क", "क", "क", "क"] {
                s.accept(t).unwrap();
            }
            assert_eq!(s.check("का"), Err(Rejection::Meter));
            assert!(s.check("क").is_ok());
        }
    }

    #[test]
    fn lone_matra_after_separator_is_malformed() {
        for cache in [0, 16] {
            let mut s = scanner(cache);
            s.accept("क").unwrap();
            s.accept(" ").unwrap();
            assert_eq!(s.check("ा"), Err(Rejection::Malformed));
        }
    }

    #[test]
    fn admissibility_rules() {
        let mut s = scanner(16);
        assert_eq!(s.check(" "), Err(Rejection::LeadingSeparator));
        assert_eq!(s.check(""), Err(Rejection::Special));
        s.accept("क").unwrap();
        s.accept(" ").unwrap();
        assert_eq!(s.check("।"), Err(Rejection::RepeatedSeparator));
        s.accept("क").unwrap();
        s.accept("ं").unwrap();
        assert_eq!(s.check("ं"), Err(Rejection::RepeatedModifier));
    }

    #[test]
    fn virama_can_retract_the_last_syllable() {
        for cache in [0, 16] {
            let mut s = scanner(cache);
            s.accept("रा").unwrap();
            s.accept("म").unwrap();
            let t = s.check("्").unwrap();
            assert_eq!(t.syllables, 1);
            assert_eq!(t.weights.to_string(), "g");
        }
    }

    #[test]
    fn completion_checks_the_closed_reading() {
        let spec = MeterSpec::from_pattern("p", 1, 2, "lg").unwrap();
        for cache in [0, 16] {
            let mut s = Scanner::new(&spec, cache);
            s.accept("क").unwrap();
            assert_eq!(s.check("क").unwrap_err(), Rejection::Meter);
            assert!(s.check("का").is_ok());
            s.accept("का").unwrap();
            assert!(s.is_complete());
            assert_eq!(s.check("क"), Err(Rejection::Complete));
        }
    }

    #[test]
    fn shapes_distinguish_classes_not_letters() {
        assert_eq!(shape("क्षा"), shape("स्मी"));
        assert_ne!(shape("का"), shape("कि"));
        assert_ne!(shape("क "), shape("क।"));
        assert_ne!(shape("\\C"), shape("क"));
    }

    #[test]
    fn cache_hits_on_repeated_shapes() {
        let mut s = scanner(16);
        s.accept("क").unwrap();
        s.check("म").unwrap();
        s.check("त").unwrap();
        // The accepted token was checked once too.
        assert_eq!(s.cache_counts(), (1, 2));
    }
}

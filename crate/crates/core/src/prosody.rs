//! Syllable weights (laghu / guru) and the eight gaṇas.

use std::fmt;

use thiserror::Error;

use crate::script::{PhonemeClass, Syllabification};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weight {
    Laghu,
    Guru,
}

impl Weight {
    pub fn as_char(self) -> char {
        match self {
            Weight::Laghu => 'l',
            Weight::Guru => 'g',
        }
    }

    pub fn from_char(c: char) -> Option<Weight> {
        match c {
            'l' => Some(Weight::Laghu),
            'g' => Some(Weight::Guru),
            _ => None,
        }
    }
}

/// Whether the text is complete or may still grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The text is finished; a closing consonant makes the last syllable guru.
    Final,
    /// More text may follow, so the last syllable may still turn guru.
    Streaming,
}

/// Per-syllable weights.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightString {
    pub weights: Vec<Weight>,
    /// False when the final weight could still change as more text arrives.
    pub last_determinate: bool,
}

impl WeightString {
    /// Fully determinate weights parsed from an `l`/`g` string.
    pub fn parse(s: &str) -> Option<WeightString> {
        Some(WeightString {
            weights: s.chars().map(Weight::from_char).collect::<Option<_>>()?,
            last_determinate: true,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl fmt::Display for WeightString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.weights {
            write!(f, "{}", w.as_char())?;
        }
        Ok(())
    }
}

/// Assigns weights. A syllable is guru when its vowel is long, it carries an
/// anusvāra or visarga, or two or more consonants follow it. In
/// [`Mode::Final`] a last syllable closed by a consonant is also guru.
pub fn weigh(s: &Syllabification, mode: Mode) -> WeightString {
    let n = s.syllables.len();
    let weights = s
        .syllables
        .iter()
        .enumerate()
        .map(|(i, syl)| {
            let heavy = syl.nucleus.class() == PhonemeClass::LongVowel
                || !syl.coda_marks.is_empty()
                || syl.following_cluster_size >= 2
                || (mode == Mode::Final && i + 1 == n && syl.following_cluster_size >= 1);
            if heavy {
                Weight::Guru
            } else {
                Weight::Laghu
            }
        })
        .collect();
    let last_determinate = match (mode, s.syllables.last()) {
        (Mode::Final, _) | (_, None) => true,
        (Mode::Streaming, Some(last)) => {
            last.nucleus.class() == PhonemeClass::LongVowel
                || !last.coda_marks.is_empty()
                || last.following_cluster_size >= 2
        }
    };
    WeightString {
        weights,
        last_determinate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gana {
    Ya,
    Ra,
    Ta,
    Bha,
    Ja,
    Sa,
    Ma,
    Na,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProsodyError {
    #[error("a gaṇa spans exactly three syllables, got {0}")]
    WrongArity(usize),
}

impl Gana {
    pub const ALL: [Gana; 8] = [
        Gana::Ya,
        Gana::Ra,
        Gana::Ta,
        Gana::Bha,
        Gana::Ja,
        Gana::Sa,
        Gana::Ma,
        Gana::Na,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gana::Ya => "ya",
            Gana::Ra => "ra",
            Gana::Ta => "ta",
            Gana::Bha => "bha",
            Gana::Ja => "ja",
            Gana::Sa => "sa",
            Gana::Ma => "ma",
            Gana::Na => "na",
        }
    }

    pub fn pattern(self) -> [Weight; 3] {
        use Weight::{Guru as G, Laghu as L};
        match self {
            Gana::Ya => [L, G, G],
            Gana::Ra => [G, L, G],
            Gana::Ta => [G, G, L],
            Gana::Bha => [G, L, L],
            Gana::Ja => [L, G, L],
            Gana::Sa => [L, L, G],
            Gana::Ma => [G, G, G],
            Gana::Na => [L, L, L],
        }
    }
}

impl fmt::Display for Gana {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn gana_of(triple: &[Weight]) -> Result<Gana, ProsodyError> {
    let triple: [Weight; 3] = triple
        .try_into()
        .map_err(|_| ProsodyError::WrongArity(triple.len()))?;
    Ok(Gana::ALL
        .into_iter()
        .find(|g| g.pattern() == triple)
        .expect("the eight gaṇas cover every triple"))
}

/// Splits a weight sequence into gaṇas, leaving up to two trailing weights.
pub fn ganas(weights: &[Weight]) -> (Vec<Gana>, &[Weight]) {
    let chunks = weights.chunks_exact(3);
    let rest = chunks.remainder();
    let ganas = chunks
        .map(|c| gana_of(c).expect("chunks_exact yields triples"))
        .collect();
    (ganas, rest)
}

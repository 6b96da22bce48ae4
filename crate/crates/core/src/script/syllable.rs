use std::ops::Range;

use super::parse::{parse, PhonemeSequence, Script, ScriptError, Unit};
use super::phoneme::Phoneme;

/// A syllable built around exactly one vowel nucleus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syllable {
    pub onset: Vec<Phoneme>,
    pub nucleus: Phoneme,
    /// Anusvāra, candrabindu or visarga directly after the nucleus.
    pub coda_marks: Vec<Phoneme>,
    /// Consonants between this nucleus and the next one, or the end of text.
    pub following_cluster_size: usize,
    /// Byte range of the syllable (onset through coda marks) in the normalized
    /// source text. Unit indices for sequences built without text.
    pub span: Range<usize>,
}

impl Syllable {
    pub fn phonemes(&self) -> impl Iterator<Item = Phoneme> + '_ {
        self.onset
            .iter()
            .copied()
            .chain(std::iter::once(self.nucleus))
            .chain(self.coda_marks.iter().copied())
    }

    /// IAST spelling of the syllable's own phonemes.
    pub fn to_iast(&self) -> String {
        self.phonemes().map(Phoneme::iast).collect()
    }
}

/// Syllables of a text plus the consonants after the last nucleus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Syllabification {
    pub syllables: Vec<Syllable>,
    /// Trailing consonants with no vowel yet.
    pub pending: Vec<Phoneme>,
}

impl Syllabification {
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// All phonemes in order: every syllable, then the pending cluster.
    pub fn phonemes(&self) -> impl Iterator<Item = Phoneme> + '_ {
        self.syllables
            .iter()
            .flat_map(Syllable::phonemes)
            .chain(self.pending.iter().copied())
    }
}

/// Groups phonemes into syllables, left to right. Separators are skipped, so
/// consonant clusters spanning a word boundary still count as clusters.
pub fn syllabify(seq: &PhonemeSequence) -> Syllabification {
    let mut syllables: Vec<Syllable> = Vec::new();
    let mut onset: Vec<Phoneme> = Vec::new();
    let mut onset_start: Option<usize> = None;

    for (unit, &offset) in seq.units().iter().zip(seq.offsets()) {
        let Unit::Phoneme(p) = *unit else { continue };
        let end = offset + unit_width(p, seq.script());
        if p.is_consonant() {
            onset_start.get_or_insert(offset);
            onset.push(p);
            if let Some(last) = syllables.last_mut() {
                last.following_cluster_size += 1;
            }
        } else if p.is_vowel() {
            let start = onset_start.take().unwrap_or(offset);
            syllables.push(Syllable {
                onset: std::mem::take(&mut onset),
                nucleus: p,
                coda_marks: Vec::new(),
                following_cluster_size: 0,
                span: start..end.max(start),
            });
        } else if let Some(last) = syllables.last_mut() {
            // Parsing guarantees a coda mark directly follows a vowel.
            last.coda_marks.push(p);
            last.span.end = end.max(last.span.end);
        }
    }

    Syllabification {
        syllables,
        pending: onset,
    }
}

fn unit_width(p: Phoneme, script: Script) -> usize {
    match script {
        Script::Iast => p.iast().len(),
        // Inherent `a` has no glyph of its own.
        Script::Devanagari if p == Phoneme::A => 0,
        Script::Devanagari => p
            .vowel_sign()
            .unwrap_or_else(|| p.devanagari())
            .len_utf8(),
    }
}

/// Parses and syllabifies in one go.
pub fn syllabify_text(text: &str, script: Script) -> Result<Syllabification, ScriptError> {
    Ok(syllabify(&parse(text, script)?))
}

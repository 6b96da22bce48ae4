use std::borrow::Cow;
use std::fmt;

use thiserror::Error;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use super::phoneme::{Phoneme, Separator};

/// Writing system of a piece of text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Devanagari,
    Iast,
}

impl Script {
    /// Devanagari if the text contains any character from the Devanagari
    /// block, IAST otherwise.
    pub fn detect(text: &str) -> Script {
        if text.chars().any(|c| ('\u{900}'..='\u{97F}').contains(&c)) {
            Script::Devanagari
        } else {
            Script::Iast
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Script::Devanagari => "devanagari",
            Script::Iast => "iast",
        })
    }
}

impl std::str::FromStr for Script {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "devanagari" | "deva" => Ok(Script::Devanagari),
            "iast" => Ok(Script::Iast),
            other => Err(format!("unknown script {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MalformedReason {
    DoubleVowelSign,
    StrayVirama,
    OrphanVowelSign,
    OrphanCodaMark,
    MisplacedBreak,
}

impl fmt::Display for MalformedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MalformedReason::DoubleVowelSign => "two dependent vowel signs in a row",
            MalformedReason::StrayVirama => "virāma without a preceding consonant",
            MalformedReason::OrphanVowelSign => "vowel sign without a base consonant",
            MalformedReason::OrphanCodaMark => "anusvāra or visarga not following a vowel",
            MalformedReason::MisplacedBreak => "':' break outside a:i, a:u or stop:h",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("unsupported codepoint {ch:?} (U+{code:04X}) at byte {offset}", code = *ch as u32)]
    UnsupportedCodepoint { ch: char, offset: usize },
    #[error("malformed cluster at byte {offset}: {reason}")]
    MalformedCluster { offset: usize, reason: MalformedReason },
}

/// One element of a parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Phoneme(Phoneme),
    Separator(Separator),
}

/// Parsed text: phonemes interleaved with separators, plus the script it was
/// written in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeSequence {
    units: Vec<Unit>,
    offsets: Vec<usize>,
    script: Script,
}

impl PhonemeSequence {
    /// Builds a sequence directly from phonemes, checking that every coda mark
    /// follows a vowel.
    pub fn from_phonemes(
        phonemes: impl IntoIterator<Item = Phoneme>,
        script: Script,
    ) -> Result<Self, ScriptError> {
        let units: Vec<Unit> = phonemes.into_iter().map(Unit::Phoneme).collect();
        let mut prev: Option<Phoneme> = None;
        for (i, unit) in units.iter().enumerate() {
            let Unit::Phoneme(p) = *unit else { continue };
            if p.is_coda() && !prev.is_some_and(|q| q.is_vowel()) {
                return Err(ScriptError::MalformedCluster {
                    offset: i,
                    reason: MalformedReason::OrphanCodaMark,
                });
            }
            prev = Some(p);
        }
        let offsets = (0..units.len()).collect();
        Ok(Self {
            units,
            offsets,
            script,
        })
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    /// Byte offset of each unit in the normalized source text.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn script(&self) -> Script {
        self.script
    }

    pub fn phonemes(&self) -> impl Iterator<Item = Phoneme> + '_ {
        self.units.iter().filter_map(|u| match u {
            Unit::Phoneme(p) => Some(*p),
            Unit::Separator(_) => None,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

/// NFC form of `text`, borrowed when it is already normalized.
pub fn nfc(text: &str) -> Cow<'_, str> {
    match is_nfc_quick(text.chars()) {
        IsNormalized::Yes => Cow::Borrowed(text),
        _ => Cow::Owned(text.nfc().collect()),
    }
}

/// Zero-width formatting characters carry no sound and are skipped.
fn is_ignorable(c: char) -> bool {
    matches!(c, '\u{200B}' | '\u{200C}' | '\u{200D}')
}

/// Parses text in the given script. The text is NFC-normalized first; offsets
/// in the result refer to the normalized form.
pub fn parse(text: &str, script: Script) -> Result<PhonemeSequence, ScriptError> {
    let text = nfc(text);
    let mut out = Builder::new(script);
    match script {
        Script::Devanagari => parse_devanagari(&text, &mut out)?,
        Script::Iast => parse_iast(&text, &mut out)?,
    }
    Ok(out.finish())
}

/// Parses text after guessing its script with [`Script::detect`].
pub fn parse_auto(text: &str) -> Result<PhonemeSequence, ScriptError> {
    parse(text, Script::detect(text))
}

struct Builder {
    units: Vec<Unit>,
    offsets: Vec<usize>,
    script: Script,
}

impl Builder {
    fn new(script: Script) -> Self {
        Self {
            units: Vec::new(),
            offsets: Vec::new(),
            script,
        }
    }

    fn push(&mut self, unit: Unit, offset: usize) {
        self.units.push(unit);
        self.offsets.push(offset);
    }

    fn last_phoneme(&self) -> Option<Phoneme> {
        match self.units.last() {
            Some(Unit::Phoneme(p)) => Some(*p),
            _ => None,
        }
    }

    fn finish(self) -> PhonemeSequence {
        PhonemeSequence {
            units: self.units,
            offsets: self.offsets,
            script: self.script,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Prev {
    Start,
    /// A consonant letter whose inherent vowel is still undecided; the value is
    /// the byte offset just past the letter.
    Consonant(usize),
    /// A consonant killed by a virāma.
    Dead,
    VowelSign,
    Vowel,
    Coda,
    Separator,
}

fn parse_devanagari(text: &str, out: &mut Builder) -> Result<(), ScriptError> {
    let mut prev = Prev::Start;
    for (offset, c) in text.char_indices() {
        if is_ignorable(c) {
            continue;
        }
        let flush = |out: &mut Builder, prev: Prev| {
            if let Prev::Consonant(end) = prev {
                out.push(Unit::Phoneme(Phoneme::A), end);
            }
        };
        if c == '्' {
            if !matches!(prev, Prev::Consonant(_)) {
                return Err(ScriptError::MalformedCluster {
                    offset,
                    reason: MalformedReason::StrayVirama,
                });
            }
            prev = Prev::Dead;
        } else if let Some(v) = Phoneme::from_vowel_sign(c) {
            match prev {
                Prev::Consonant(_) => {
                    out.push(Unit::Phoneme(v), offset);
                    prev = Prev::VowelSign;
                }
                Prev::VowelSign => {
                    return Err(ScriptError::MalformedCluster {
                        offset,
                        reason: MalformedReason::DoubleVowelSign,
                    })
                }
                _ => {
                    return Err(ScriptError::MalformedCluster {
                        offset,
                        reason: MalformedReason::OrphanVowelSign,
                    })
                }
            }
        } else if let Some(mark) = Phoneme::from_coda_mark(c) {
            flush(out, prev);
            if !matches!(prev, Prev::Consonant(_) | Prev::Vowel | Prev::VowelSign) {
                return Err(ScriptError::MalformedCluster {
                    offset,
                    reason: MalformedReason::OrphanCodaMark,
                });
            }
            out.push(Unit::Phoneme(mark), offset);
            prev = Prev::Coda;
        } else if let Some(p) = Phoneme::from_devanagari_letter(c) {
            flush(out, prev);
            out.push(Unit::Phoneme(p), offset);
            prev = if p.is_consonant() {
                Prev::Consonant(offset + c.len_utf8())
            } else {
                Prev::Vowel
            };
        } else if let Some(sep) = Separator::from_char(c, Script::Devanagari) {
            flush(out, prev);
            out.push(Unit::Separator(sep), offset);
            prev = Prev::Separator;
        } else {
            return Err(ScriptError::UnsupportedCodepoint { ch: c, offset });
        }
    }
    if let Prev::Consonant(end) = prev {
        out.push(Unit::Phoneme(Phoneme::A), end);
    }
    Ok(())
}

fn iast_letter(c: char) -> Option<Phoneme> {
    Some(match c {
        'a' => Phoneme::A,
        'ā' => Phoneme::Aa,
        'i' => Phoneme::I,
        'ī' => Phoneme::Ii,
        'u' => Phoneme::U,
        'ū' => Phoneme::Uu,
        'ṛ' => Phoneme::VocalicR,
        'ṝ' => Phoneme::VocalicRr,
        'ḷ' => Phoneme::VocalicL,
        'e' => Phoneme::E,
        'o' => Phoneme::O,
        'ṃ' => Phoneme::Anusvara,
        'ḥ' => Phoneme::Visarga,
        'k' => Phoneme::Ka,
        'g' => Phoneme::Ga,
        'ṅ' => Phoneme::Nga,
        'c' => Phoneme::Ca,
        'j' => Phoneme::Ja,
        'ñ' => Phoneme::Nya,
        'ṭ' => Phoneme::Tta,
        'ḍ' => Phoneme::Dda,
        'ṇ' => Phoneme::Nna,
        't' => Phoneme::Ta,
        'd' => Phoneme::Da,
        'n' => Phoneme::Na,
        'p' => Phoneme::Pa,
        'b' => Phoneme::Ba,
        'm' => Phoneme::Ma,
        'y' => Phoneme::Ya,
        'r' => Phoneme::Ra,
        'l' => Phoneme::La,
        'v' => Phoneme::Va,
        'ś' => Phoneme::Sha,
        'ṣ' => Phoneme::Ssa,
        's' => Phoneme::Sa,
        'h' => Phoneme::Ha,
        _ => return None,
    })
}

fn parse_iast(text: &str, out: &mut Builder) -> Result<(), ScriptError> {
    let chars: Vec<(usize, char)> = text
        .char_indices()
        .filter(|(_, c)| !is_ignorable(*c))
        .collect();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);

        if c == ':' {
            let before = out.last_phoneme();
            let ok = match (before, next) {
                (Some(Phoneme::A), Some('i' | 'u')) => chars[i - 1].1 == 'a',
                (Some(p), Some('h')) => p.takes_aspirate_break(),
                _ => false,
            };
            if !ok {
                return Err(ScriptError::MalformedCluster {
                    offset,
                    reason: MalformedReason::MisplacedBreak,
                });
            }
            i += 1;
            continue;
        }

        if let Some(sep) = Separator::from_char(c, Script::Iast) {
            out.push(Unit::Separator(sep), offset);
            i += 1;
            continue;
        }

        let Some(mut p) = iast_letter(c) else {
            return Err(ScriptError::UnsupportedCodepoint { ch: c, offset });
        };
        let mut width = 1;
        match (p, next) {
            (Phoneme::A, Some('i')) => {
                p = Phoneme::Ai;
                width = 2;
            }
            (Phoneme::A, Some('u')) => {
                p = Phoneme::Au;
                width = 2;
            }
            (Phoneme::Ma, Some('\u{310}')) => {
                p = Phoneme::Candrabindu;
                width = 2;
            }
            (q, Some('h')) if q.takes_aspirate_break() => {
                p = q.aspirate().expect("stop has an aspirate");
                width = 2;
            }
            _ => {}
        }
        if p.is_coda() && !out.last_phoneme().is_some_and(|q| q.is_vowel()) {
            return Err(ScriptError::MalformedCluster {
                offset,
                reason: MalformedReason::OrphanCodaMark,
            });
        }
        out.push(Unit::Phoneme(p), offset);
        i += width;
    }
    Ok(())
}

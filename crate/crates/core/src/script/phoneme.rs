//! The canonical sound inventory shared by every script frontend.

use std::fmt;

/// Broad class of a phoneme, as far as scansion is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhonemeClass {
    Consonant,
    ShortVowel,
    LongVowel,
    Anusvara,
    Visarga,
}

impl PhonemeClass {
    pub fn is_vowel(self) -> bool {
        matches!(self, PhonemeClass::ShortVowel | PhonemeClass::LongVowel)
    }

    /// Anusvāra and visarga, the two marks that close a syllable.
    pub fn is_coda(self) -> bool {
        matches!(self, PhonemeClass::Anusvara | PhonemeClass::Visarga)
    }
}

macro_rules! phonemes {
    ($( $name:ident => $class:ident, $iast:literal, $deva:literal, $sign:expr; )*) => {
        /// A single sound of the supported classical Sanskrit inventory.
        ///
        /// Candrabindu is kept as its own identifier so that text survives a
        /// round trip, but it scans exactly like the anusvāra.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Phoneme {
            $( $name, )*
        }

        impl Phoneme {
            pub const ALL: &'static [Phoneme] = &[$( Phoneme::$name, )*];

            pub fn class(self) -> PhonemeClass {
                match self {
                    $( Phoneme::$name => PhonemeClass::$class, )*
                }
            }

            /// IAST spelling.
            pub fn iast(self) -> &'static str {
                match self {
                    $( Phoneme::$name => $iast, )*
                }
            }

            /// Independent Devanagari form: the consonant letter (with its
            /// inherent vowel), the initial vowel letter, or the mark.
            pub fn devanagari(self) -> char {
                match self {
                    $( Phoneme::$name => $deva, )*
                }
            }

            /// Dependent vowel sign (mātrā). `None` for everything that is not a
            /// vowel, and for `a`, which is inherent.
            pub fn vowel_sign(self) -> Option<char> {
                match self {
                    $( Phoneme::$name => $sign, )*
                }
            }
        }
    };
}

phonemes! {
    A => ShortVowel, "a", 'अ', None;
    Aa => LongVowel, "ā", 'आ', Some('ा');
    I => ShortVowel, "i", 'इ', Some('ि');
    Ii => LongVowel, "ī", 'ई', Some('ी');
    U => ShortVowel, "u", 'उ', Some('ु');
    Uu => LongVowel, "ū", 'ऊ', Some('ू');
    VocalicR => ShortVowel, "ṛ", 'ऋ', Some('ृ');
    VocalicRr => LongVowel, "ṝ", 'ॠ', Some('ॄ');
    VocalicL => ShortVowel, "ḷ", 'ऌ', Some('ॢ');
    E => LongVowel, "e", 'ए', Some('े');
    Ai => LongVowel, "ai", 'ऐ', Some('ै');
    O => LongVowel, "o", 'ओ', Some('ो');
    Au => LongVowel, "au", 'औ', Some('ौ');
    Anusvara => Anusvara, "ṃ", 'ं', None;
    Candrabindu => Anusvara, "m\u{310}", 'ँ', None;
    Visarga => Visarga, "ḥ", 'ः', None;
    Ka => Consonant, "k", 'क', None;
    Kha => Consonant, "kh", 'ख', None;
    Ga => Consonant, "g", 'ग', None;
    Gha => Consonant, "gh", 'घ', None;
    Nga => Consonant, "ṅ", 'ङ', None;
    Ca => Consonant, "c", 'च', None;
    Cha => Consonant, "ch", 'छ', None;
    Ja => Consonant, "j", 'ज', None;
    Jha => Consonant, "jh", 'झ', None;
    Nya => Consonant, "ñ", 'ञ', None;
    Tta => Consonant, "ṭ", 'ट', None;
    Ttha => Consonant, "ṭh", 'ठ', None;
    Dda => Consonant, "ḍ", 'ड', None;
    Ddha => Consonant, "ḍh", 'ढ', None;
    Nna => Consonant, "ṇ", 'ण', None;
    Ta => Consonant, "t", 'त', None;
    Tha => Consonant, "th", 'थ', None;
    Da => Consonant, "d", 'द', None;
    Dha => Consonant, "dh", 'ध', None;
    Na => Consonant, "n", 'न', None;
    Pa => Consonant, "p", 'प', None;
    Pha => Consonant, "ph", 'फ', None;
    Ba => Consonant, "b", 'ब', None;
    Bha => Consonant, "bh", 'भ', None;
    Ma => Consonant, "m", 'म', None;
    Ya => Consonant, "y", 'य', None;
    Ra => Consonant, "r", 'र', None;
    La => Consonant, "l", 'ल', None;
    Va => Consonant, "v", 'व', None;
    Sha => Consonant, "ś", 'श', None;
    Ssa => Consonant, "ṣ", 'ष', None;
    Sa => Consonant, "s", 'स', None;
    Ha => Consonant, "h", 'ह', None;
}

impl Phoneme {
    pub fn is_vowel(self) -> bool {
        self.class().is_vowel()
    }

    pub fn is_consonant(self) -> bool {
        self.class() == PhonemeClass::Consonant
    }

    pub fn is_coda(self) -> bool {
        self.class().is_coda()
    }

    /// Unaspirated stops whose IAST spelling followed by `h` would read as the
    /// aspirate. Such pairs are written with a `:` break in IAST.
    pub(crate) fn takes_aspirate_break(self) -> bool {
        matches!(
            self,
            Phoneme::Ka
                | Phoneme::Ga
                | Phoneme::Ca
                | Phoneme::Ja
                | Phoneme::Tta
                | Phoneme::Dda
                | Phoneme::Ta
                | Phoneme::Da
                | Phoneme::Pa
                | Phoneme::Ba
        )
    }

    pub(crate) fn aspirate(self) -> Option<Phoneme> {
        Some(match self {
            Phoneme::Ka => Phoneme::Kha,
            Phoneme::Ga => Phoneme::Gha,
            Phoneme::Ca => Phoneme::Cha,
            Phoneme::Ja => Phoneme::Jha,
            Phoneme::Tta => Phoneme::Ttha,
            Phoneme::Dda => Phoneme::Ddha,
            Phoneme::Ta => Phoneme::Tha,
            Phoneme::Da => Phoneme::Dha,
            Phoneme::Pa => Phoneme::Pha,
            Phoneme::Ba => Phoneme::Bha,
            _ => return None,
        })
    }

    pub(crate) fn from_devanagari_letter(c: char) -> Option<Phoneme> {
        Phoneme::ALL
            .iter()
            .copied()
            .find(|p| !p.is_coda() && p.devanagari() == c)
    }

    pub(crate) fn from_vowel_sign(c: char) -> Option<Phoneme> {
        Phoneme::ALL
            .iter()
            .copied()
            .find(|p| p.vowel_sign() == Some(c))
    }

    pub(crate) fn from_coda_mark(c: char) -> Option<Phoneme> {
        match c {
            'ं' => Some(Phoneme::Anusvara),
            'ँ' => Some(Phoneme::Candrabindu),
            'ः' => Some(Phoneme::Visarga),
            _ => None,
        }
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.iast())
    }
}

/// Non-phonemic material kept in the unit stream so text can be rebuilt, but
/// ignored by scansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Separator {
    Whitespace(char),
    /// `।`
    Danda,
    /// `॥`
    DoubleDanda,
    /// ASCII `|`, common as a daṇḍa substitute in romanized text.
    Bar,
    /// `ऽ`, written `'` in IAST.
    Avagraha,
}

impl Separator {
    pub fn render(self, script: super::Script) -> char {
        match self {
            Separator::Whitespace(c) => c,
            Separator::Danda => '।',
            Separator::DoubleDanda => '॥',
            Separator::Bar => '|',
            Separator::Avagraha => match script {
                super::Script::Devanagari => 'ऽ',
                super::Script::Iast => '\'',
            },
        }
    }

    pub(crate) fn from_char(c: char, script: super::Script) -> Option<Separator> {
        match c {
            '।' => Some(Separator::Danda),
            '॥' => Some(Separator::DoubleDanda),
            '|' => Some(Separator::Bar),
            'ऽ' if script == super::Script::Devanagari => Some(Separator::Avagraha),
            '\'' if script == super::Script::Iast => Some(Separator::Avagraha),
            c if c.is_whitespace() => Some(Separator::Whitespace(c)),
            _ => None,
        }
    }
}

//! Devanagari and IAST frontends over a script-independent phoneme stream,
//! and syllabification of that stream.
//!
//! ```
//! use chandas::script::{syllabify_text, Script};
//!
//! let s = syllabify_text("धर्मक्षेत्रे", Script::Devanagari).unwrap();
//! let syllables: Vec<_> = s.syllables.iter().map(|x| x.to_iast()).collect();
//! assert_eq!(syllables, ["dha", "rma", "kṣe", "tre"]);
//! ```

mod parse;
mod phoneme;
mod render;
mod syllable;

pub use parse::{
    parse, parse_auto, MalformedReason, PhonemeSequence, Script, ScriptError, Unit,
};
pub use parse::nfc;
pub use phoneme::{Phoneme, PhonemeClass, Separator};
pub use render::{render, transliterate};
pub use syllable::{syllabify, syllabify_text, Syllabification, Syllable};

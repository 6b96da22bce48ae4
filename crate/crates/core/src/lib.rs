//! Sanskrit prosody: scansion of Devanagari and IAST text, validation
//! against fixed-length meters, and metrically constrained decoding over any
//! source of next-token probabilities.
//!
//! ```
//! use chandas::meter::{scan, MeterSpec};
//!
//! assert_eq!(scan("mā viṣādaṃ mahābāho").unwrap().to_string(), "glgglggg");
//! assert_eq!(MeterSpec::anustubh().total_len(), 32);
//! ```

pub mod decode;
pub mod eval;
pub mod lm;
pub mod meter;
pub mod prosody;
pub mod script;

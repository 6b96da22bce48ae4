use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use regex::Regex;

use super::spec::{MeterSpec, PositionConstraint};
use super::MeterError;
use crate::prosody::{Weight, WeightString};

/// Anchored regular expressions over `l`/`g` weight strings, one per prefix
/// length `1..=N`.
#[derive(Debug)]
pub struct FilterSet {
    patterns: Vec<String>,
    regexes: Vec<Regex>,
}

impl FilterSet {
    fn build(spec: &MeterSpec) -> Self {
        let patterns: Vec<String> = (1..=spec.total_len())
            .map(|len| prefix_pattern(spec, len))
            .collect();
        let regexes = patterns
            .iter()
            .map(|p| Regex::new(p).expect("generated filter is a valid regex"))
            .collect();
        Self { patterns, regexes }
    }

    /// Longest weight string the filters cover.
    pub fn max_len(&self) -> usize {
        self.patterns.len()
    }

    /// Source of the filter for weight strings of length `len`.
    pub fn pattern(&self, len: usize) -> Option<&str> {
        len.checked_sub(1)
            .and_then(|i| self.patterns.get(i))
            .map(String::as_str)
    }

    /// Whether `w` can still be the start of a conforming verse. An
    /// indeterminate last weight passes if either reading matches.
    pub fn prefix_ok(&self, w: &WeightString) -> Result<bool, MeterError> {
        let len = w.len();
        if len > self.max_len() {
            return Err(MeterError::TooLong {
                len,
                max: self.max_len(),
            });
        }
        if len == 0 {
            return Ok(true);
        }
        let regex = &self.regexes[len - 1];
        let mut buf = w.to_string().into_bytes();
        if regex.is_match(std::str::from_utf8(&buf).expect("ascii")) {
            return Ok(true);
        }
        if w.last_determinate {
            return Ok(false);
        }
        let flipped = match Weight::from_char(buf[len - 1] as char) {
            Some(Weight::Laghu) => b'g',
            _ => b'l',
        };
        buf[len - 1] = flipped;
        Ok(regex.is_match(std::str::from_utf8(&buf).expect("ascii")))
    }
}

/// Renders the anchored filter for the first `len` positions of a spec. Runs
/// of unconstrained positions inside a pāda collapse to `.{n}`, so the first
/// anuṣṭubh pāda reads `^.{4}lgg.$`.
fn prefix_pattern(spec: &MeterSpec, len: usize) -> String {
    let mut out = String::from("^");
    for pada in spec.constraints()[..len].chunks(spec.pada_len()) {
        let mut run = 0;
        let flush = |out: &mut String, run: &mut usize| {
            match *run {
                0 => {}
                1 => out.push('.'),
                n => out.push_str(&format!(".{{{n}}}")),
            }
            *run = 0;
        };
        for c in pada {
            match c {
                PositionConstraint::Any => run += 1,
                other => {
                    flush(&mut out, &mut run);
                    out.push(other.as_char());
                }
            }
        }
        flush(&mut out, &mut run);
    }
    out.push('$');
    out
}

/// Compiles the filters for a spec, reusing an earlier compilation of an
/// identical spec.
pub fn compile(spec: &MeterSpec) -> Arc<FilterSet> {
    static CACHE: OnceLock<Mutex<HashMap<MeterSpec, Arc<FilterSet>>>> = OnceLock::new();
    let mut cache = CACHE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    cache
        .entry(spec.clone())
        .or_insert_with(|| Arc::new(FilterSet::build(spec)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anustubh() -> Arc<FilterSet> {
        compile(&MeterSpec::anustubh())
    }

    #[test]
    fn first_pada_filter() {
        assert_eq!(anustubh().pattern(8), Some("^.{4}lgg.$"));
    }

    #[test]
    fn single_position_filter() {
        assert_eq!(anustubh().pattern(1), Some("^.$"));
        assert_eq!(anustubh().pattern(0), None);
    }

    #[test]
    fn full_verse_filter() {
        assert_eq!(
            anustubh().pattern(32),
            Some("^.{4}lgg..{4}lgl..{4}lgg..{4}lgl.$")
        );
        assert_eq!(anustubh().pattern(12), Some("^.{4}lgg..{4}$"));
    }

    #[test]
    fn compile_is_cached() {
        assert!(Arc::ptr_eq(&anustubh(), &anustubh()));
    }

    #[test]
    fn indeterminate_last_position() {
        let mut w = WeightString::parse("glggl").unwrap();
        w.last_determinate = false;
        assert!(anustubh().prefix_ok(&w).unwrap());
        // Indeterminate laghu at position 6 may still become guru.
        let mut w = WeightString::parse("glggll").unwrap();
        w.last_determinate = false;
        assert!(anustubh().prefix_ok(&w).unwrap());
        w.last_determinate = true;
        assert!(!anustubh().prefix_ok(&w).unwrap());
    }

    #[test]
    fn determinate_violation() {
        let w = WeightString::parse("llllg").unwrap();
        assert!(!anustubh().prefix_ok(&w).unwrap());
    }

    #[test]
    fn worked_example_pada_passes() {
        let w = WeightString::parse("glgglggg").unwrap();
        assert!(anustubh().prefix_ok(&w).unwrap());
    }

    #[test]
    fn too_long() {
        let w = WeightString::parse(&"g".repeat(33)).unwrap();
        assert_eq!(
            anustubh().prefix_ok(&w),
            Err(MeterError::TooLong { len: 33, max: 32 })
        );
    }
}

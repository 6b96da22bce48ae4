use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::MeterError;
use crate::prosody::Weight;

/// What a single syllable position demands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PositionConstraint {
    Any,
    MustLaghu,
    MustGuru,
}

impl PositionConstraint {
    pub fn as_char(self) -> char {
        match self {
            PositionConstraint::Any => '.',
            PositionConstraint::MustLaghu => 'l',
            PositionConstraint::MustGuru => 'g',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '.' => Some(PositionConstraint::Any),
            'l' => Some(PositionConstraint::MustLaghu),
            'g' => Some(PositionConstraint::MustGuru),
            _ => None,
        }
    }

    pub fn admits(self, w: Weight) -> bool {
        match self {
            PositionConstraint::Any => true,
            PositionConstraint::MustLaghu => w == Weight::Laghu,
            PositionConstraint::MustGuru => w == Weight::Guru,
        }
    }
}

/// A fixed-length syllabic meter: `pada_count` quarters of `pada_len`
/// syllables, with one constraint per position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeterSpec {
    name: String,
    pada_count: usize,
    pada_len: usize,
    constraints: Vec<PositionConstraint>,
}

/// On-disk form of a meter spec.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    name: String,
    pada_count: usize,
    pada_len: usize,
    constraints: String,
}

pub const ANUSTUBH_CONSTRAINTS: &str = "....lgg.....lgl.....lgg.....lgl.";

/// The shipped anuṣṭubh spec file, verbatim.
pub const ANUSTUBH_FILE: &str = include_str!("../../meters/anustubh.toml");

impl MeterSpec {
    pub fn new(
        name: impl Into<String>,
        pada_count: usize,
        pada_len: usize,
        constraints: Vec<PositionConstraint>,
    ) -> Result<Self, MeterError> {
        let name = name.into();
        if pada_count == 0 || pada_len == 0 {
            return Err(MeterError::InvalidSpec(format!(
                "{name}: pada_count and pada_len must be positive"
            )));
        }
        if constraints.len() != pada_count * pada_len {
            return Err(MeterError::InvalidSpec(format!(
                "{name}: {} constraints for {pada_count} × {pada_len} positions",
                constraints.len()
            )));
        }
        Ok(Self {
            name,
            pada_count,
            pada_len,
            constraints,
        })
    }

    /// Builds a spec from a constraint string over `.`, `l`, `g`.
    pub fn from_pattern(
        name: impl Into<String>,
        pada_count: usize,
        pada_len: usize,
        pattern: &str,
    ) -> Result<Self, MeterError> {
        let constraints = pattern
            .chars()
            .map(|c| {
                PositionConstraint::from_char(c).ok_or_else(|| {
                    MeterError::InvalidSpec(format!("bad constraint character {c:?}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, pada_count, pada_len, constraints)
    }

    /// Anuṣṭubh (śloka): four pādas of eight; the fifth syllable laghu, the
    /// sixth guru, the seventh guru in odd pādas and laghu in even ones.
    pub fn anustubh() -> Self {
        Self::from_toml(ANUSTUBH_FILE).expect("shipped anustubh spec is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, MeterError> {
        let file: SpecFile =
            toml::from_str(text).map_err(|e| MeterError::InvalidSpec(e.to_string()))?;
        Self::from_pattern(file.name, file.pada_count, file.pada_len, &file.constraints)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&SpecFile {
            name: self.name.clone(),
            pada_count: self.pada_count,
            pada_len: self.pada_len,
            constraints: self.pattern(),
        })
        .expect("spec serializes")
    }

    pub fn load(path: &Path) -> Result<Self, MeterError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MeterError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Resolves a meter argument: an existing file path, a built-in name, or
    /// `<name>.toml` in one of the directories listed in `search_path`
    /// (colon separated, as in `CHANDAS_METER_PATH`).
    pub fn resolve(name_or_path: &str, search_path: Option<&str>) -> Result<Self, MeterError> {
        let as_path = Path::new(name_or_path);
        if as_path.is_file() {
            return Self::load(as_path);
        }
        if let Some(dirs) = search_path {
            for dir in std::env::split_paths(dirs) {
                let candidate: PathBuf = dir.join(format!("{name_or_path}.toml"));
                if candidate.is_file() {
                    return Self::load(&candidate);
                }
            }
        }
        match name_or_path.to_ascii_lowercase().as_str() {
            "anustubh" | "anushtubh" | "anuṣṭubh" | "sloka" | "shloka" => Ok(Self::anustubh()),
            _ => Err(MeterError::UnknownMeter(name_or_path.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pada_count(&self) -> usize {
        self.pada_count
    }

    pub fn pada_len(&self) -> usize {
        self.pada_len
    }

    /// Total number of syllables in a complete verse.
    pub fn total_len(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[PositionConstraint] {
        &self.constraints
    }

    pub fn pattern(&self) -> String {
        self.constraints.iter().map(|c| c.as_char()).collect()
    }
}

impl fmt::Display for MeterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}×{}: {})",
            self.name,
            self.pada_count,
            self.pada_len,
            self.pattern()
        )
    }
}

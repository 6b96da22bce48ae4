use std::collections::{BTreeSet, HashMap};

use sha2::{Digest, Sha256};

use super::LmError;
use crate::script::{nfc, Phoneme};

pub type TokenId = u32;

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
pub const SEP: TokenId = 2;

const SPECIALS: [&str; 3] = ["<bos>", "<eos>", "<sep>"];

/// Token inventory: the three specials, every single codepoint of the
/// supported Devanagari inventory, and whole akṣaras seen in training text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    max_chars: usize,
}

/// Kind of a token, as far as decoding rules care.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Special,
    /// Only whitespace or punctuation.
    Separator,
    /// Only dependent signs: mātrās, virāma, anusvāra, visarga.
    Modifier,
    Text,
}

fn is_sign(c: char) -> bool {
    c == '्' || Phoneme::from_vowel_sign(c).is_some() || Phoneme::from_coda_mark(c).is_some()
}

fn is_separator_char(c: char) -> bool {
    c.is_whitespace() || matches!(c, '।' | '॥' | '|' | 'ऽ')
}

/// Classifies a token string.
pub fn token_kind(text: &str) -> TokenKind {
    if text.is_empty() {
        TokenKind::Special
    } else if text.chars().all(is_separator_char) {
        TokenKind::Separator
    } else if text.chars().all(is_sign) {
        TokenKind::Modifier
    } else {
        TokenKind::Text
    }
}

/// Every codepoint a Devanagari text over the supported inventory can use.
fn base_codepoints() -> BTreeSet<String> {
    let mut set = BTreeSet::new();
    for p in Phoneme::ALL {
        set.insert(p.devanagari().to_string());
        if let Some(sign) = p.vowel_sign() {
            set.insert(sign.to_string());
        }
    }
    for c in ['्', ' ', '\n', '।', '॥', '|', 'ऽ'] {
        set.insert(c.to_string());
    }
    set
}

/// Splits Devanagari text into orthographic syllables: a consonant cluster
/// joined by virāmas with its vowel sign and marks, or an initial vowel with
/// its marks. Separators stand alone.
pub fn aksharas(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut joined = false;
    for c in text.chars() {
        let consonant = Phoneme::from_devanagari_letter(c).is_some_and(|p| p.is_consonant());
        let attaches = is_sign(c) || (consonant && joined);
        match out.last_mut() {
            Some(cur) if attaches && token_kind(cur) != TokenKind::Separator => cur.push(c),
            _ => out.push(c.to_string()),
        }
        joined = c == '्';
    }
    out
}

impl Vocab {
    /// Builds a vocabulary from training text.
    pub fn build<S: AsRef<str>>(corpus: &[S]) -> Vocab {
        let mut singles = base_codepoints();
        let mut multi = BTreeSet::new();
        for text in corpus {
            let text = nfc(text.as_ref());
            for c in text.chars() {
                singles.insert(c.to_string());
            }
            for a in aksharas(&text) {
                if a.chars().count() > 1 {
                    multi.insert(a);
                }
            }
        }
        let tokens = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(singles)
            .chain(multi)
            .collect();
        Vocab::from_tokens(tokens).expect("built vocabulary has unique tokens")
    }

    /// Rebuilds a vocabulary from its token list, which must start with the
    /// three specials and contain no duplicates.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocab, LmError> {
        if tokens.len() < SPECIALS.len() || tokens[..3] != SPECIALS {
            return Err(LmError::BadModel("vocabulary must start with <bos> <eos> <sep>".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(LmError::BadModel(format!("duplicate token {t:?}")));
            }
        }
        let max_chars = tokens[3..].iter().map(|t| t.chars().count()).max().unwrap_or(1);
        Ok(Vocab {
            tokens,
            index,
            max_chars,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Surface text of a token; specials have none.
    pub fn text(&self, id: TokenId) -> Option<&str> {
        match id {
            BOS | EOS | SEP => Some(""),
            _ => self.tokens.get(id as usize).map(String::as_str),
        }
    }

    pub fn kind(&self, id: TokenId) -> TokenKind {
        self.text(id).map(token_kind).unwrap_or(TokenKind::Special)
    }

    pub fn is_special(&self, id: TokenId) -> bool {
        id < SPECIALS.len() as TokenId
    }

    /// Greedy longest match over the vocabulary, falling back to single
    /// codepoints.
    pub fn tokenize(&self, text: &str) -> Result<Vec<TokenId>, LmError> {
        let text = nfc(text);
        let bounds: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(text.len()))
            .collect();
        let n = bounds.len() - 1;
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let longest = self.max_chars.min(n - i);
            let found = (1..=longest).rev().find_map(|len| {
                let piece = &text[bounds[i]..bounds[i + len]];
                self.index
                    .get(piece)
                    .filter(|&&id| !self.is_special(id))
                    .map(|&id| (id, len))
            });
            let Some((id, len)) = found else {
                return Err(LmError::Untokenizable {
                    ch: text[bounds[i]..].chars().next().expect("in bounds"),
                    offset: bounds[i],
                });
            };
            out.push(id);
            i += len;
        }
        Ok(out)
    }

    pub fn detokenize(&self, ids: &[TokenId]) -> Result<String, LmError> {
        let mut out = String::new();
        for &id in ids {
            out.push_str(self.text(id).ok_or(LmError::UnknownId(id))?);
        }
        Ok(out)
    }

    /// Hex SHA-256 over the newline-joined token list.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn check(&self, ids: &[TokenId]) -> Result<(), LmError> {
        match ids.iter().find(|&&id| id as usize >= self.len()) {
            Some(&id) => Err(LmError::UnknownId(id)),
            None => Ok(()),
        }
    }
}

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{compose_jamo, decompose_jamo, TextError};

pub const PAD_ID: u32 = 0;
pub const SOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const UNK_ID: u32 = 3;
pub const SPECIAL_TOKENS: [&str; 4] = ["<pad>", "<sos>", "<eos>", "<unk>"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Unit {
    #[default]
    Character,
    Jamo,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::Character => "char",
            Unit::Jamo => "jamo",
        }
    }

    /// Splits text into unit symbols.
    pub fn split(self, text: &str) -> Vec<char> {
        match self {
            Unit::Character => text.chars().collect(),
            Unit::Jamo => decompose_jamo(text),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" | "character" => Ok(Unit::Character),
            "jamo" => Ok(Unit::Jamo),
            _ => Err(alloc::format!("unknown unit {s:?} (expected char or jamo)")),
        }
    }
}

/// Label set: four specials at ids 0..=3, then one symbol per id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    unit: Unit,
    symbols: Vec<char>,
    ids: BTreeMap<char, u32>,
}

impl Vocabulary {
    /// Builds from ordered symbols (ids start at 4).
    pub fn from_symbols(unit: Unit, symbols: Vec<char>) -> Result<Self, TextError> {
        let mut ids = BTreeMap::new();
        for (i, &c) in symbols.iter().enumerate() {
            if ids.insert(c, i as u32 + 4).is_some() {
                return Err(TextError::BadVocabulary {
                    line: i + 4,
                    reason: "duplicate token",
                });
            }
        }
        Ok(Self { unit, symbols, ids })
    }

    /// Parses the token-per-line listing written by [`Vocabulary::tokens`].
    pub fn from_tokens<S: AsRef<str>>(unit: Unit, tokens: &[S]) -> Result<Self, TextError> {
        for (i, special) in SPECIAL_TOKENS.iter().enumerate() {
            if tokens.get(i).map(AsRef::as_ref) != Some(*special) {
                return Err(TextError::BadVocabulary {
                    line: i,
                    reason: "expected special token",
                });
            }
        }
        let mut symbols = Vec::with_capacity(tokens.len().saturating_sub(4));
        for (i, t) in tokens.iter().enumerate().skip(4) {
            let mut it = t.as_ref().chars();
            match (it.next(), it.next()) {
                (Some(c), None) => symbols.push(c),
                _ => {
                    return Err(TextError::BadVocabulary {
                        line: i,
                        reason: "token must be a single character",
                    })
                }
            }
        }
        Self::from_symbols(unit, symbols)
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    /// Total size including specials.
    pub fn len(&self) -> usize {
        self.symbols.len() + SPECIAL_TOKENS.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id_of(&self, c: char) -> Option<u32> {
        self.ids.get(&c).copied()
    }

    pub fn token(&self, id: u32) -> Option<String> {
        match id {
            0..=3 => Some(SPECIAL_TOKENS[id as usize].to_string()),
            _ => self.symbols.get(id as usize - 4).map(|c| c.to_string()),
        }
    }

    /// All tokens in id order.
    pub fn tokens(&self) -> Vec<String> {
        SPECIAL_TOKENS
            .iter()
            .map(|s| s.to_string())
            .chain(self.symbols.iter().map(|c| c.to_string()))
            .collect()
    }

    /// Maps unknown symbols to `<unk>`.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        self.unit
            .split(text)
            .into_iter()
            .map(|c| self.id_of(c).unwrap_or(UNK_ID))
            .collect()
    }

    /// Inverse of [`Vocabulary::encode`]. Padding, start and end ids are
    /// skipped; `<unk>` and out-of-range ids render as U+FFFD. Jamo output is
    /// recomposed into syllables where the sequence allows it.
    pub fn decode(&self, ids: &[u32]) -> String {
        let symbols: Vec<char> = ids
            .iter()
            .filter(|&&id| !matches!(id, PAD_ID | SOS_ID | EOS_ID))
            .map(|&id| {
                (id as usize)
                    .checked_sub(4)
                    .and_then(|i| self.symbols.get(i).copied())
                    .unwrap_or(char::REPLACEMENT_CHARACTER)
            })
            .collect();
        match self.unit {
            Unit::Character => symbols.into_iter().collect(),
            Unit::Jamo => compose_jamo(&symbols).unwrap_or_else(|_| symbols.into_iter().collect()),
        }
    }
}

/// Symbols ordered by descending count, ties by ascending code point.
pub fn build_vocab<S: AsRef<str>>(corpus: &[S], unit: Unit) -> Result<Vocabulary, TextError> {
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut counts: BTreeMap<char, usize> = BTreeMap::new();
    for line in corpus {
        for c in unit.split(line.as_ref()) {
            *counts.entry(c).or_default() += 1;
        }
    }
    let mut ranked: Vec<(char, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Vocabulary::from_symbols(unit, ranked.into_iter().map(|(c, _)| c).collect())
}

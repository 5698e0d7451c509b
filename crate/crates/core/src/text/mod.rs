//! Transcript cleanup, character and jamo tokenization, vocabularies and
//! corpus length statistics.

mod clean;
mod jamo;
mod stats;
mod vocab;

pub use clean::{clean_transcript, CleanupRules, Transcription};
pub use jamo::{compose_jamo, decompose_jamo, FINALS, INITIALS, MEDIALS};
pub use stats::{corpus_length_stats, within_length, LengthStats, DEFAULT_MAX_LEN};
pub use vocab::{build_vocab, Unit, Vocabulary, EOS_ID, PAD_ID, SOS_ID, SPECIAL_TOKENS, UNK_ID};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("unbalanced or malformed dual transcription at character {position}")]
    UnbalancedParens { position: usize },
    #[error("jamo sequence cannot be composed at position {position}")]
    InvalidSequence { position: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no lengths to summarize")]
    EmptyInput,
    #[error("vocabulary entry {line}: {reason}")]
    BadVocabulary { line: usize, reason: &'static str },
}

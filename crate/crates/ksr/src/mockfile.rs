//! Text format for table-driven mock posteriors.
//!
//! One record per line, `prefix_ids -> p_0 p_1 ... p_{V-1}`, where the prefix
//! is a space-separated list of token ids matched against the tail of the
//! decoding prefix. `#` starts a comment. Every record must list the same
//! number of probabilities, which fixes the vocabulary size.

use ksr_core::decode::{mock_from_table, DecodeError, MockModel};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MockFileError {
    #[error("line {line}: expected `prefix_ids -> p_0 ... p_(V-1)`")]
    BadRecord { line: usize },
    #[error("line {line}: {what} {token:?} is not a number")]
    BadNumber {
        line: usize,
        what: &'static str,
        token: String,
    },
    #[error("line {line}: {found} probabilities, earlier records have {expected}")]
    RaggedRecord {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("mock model has no records, so its vocabulary size is unknown")]
    Empty,
    #[error(transparent)]
    Model(#[from] DecodeError),
}

pub fn parse(text: &str, max_len: usize) -> Result<MockModel, MockFileError> {
    let mut entries = Vec::new();
    let mut vocab = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or_default().trim();
        if body.is_empty() {
            continue;
        }
        let (prefix, probs) = body.split_once("->").ok_or(MockFileError::BadRecord { line })?;
        let key = prefix
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>().map_err(|_| MockFileError::BadNumber {
                    line,
                    what: "token id",
                    token: t.to_owned(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let probs = probs
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| MockFileError::BadNumber {
                    line,
                    what: "probability",
                    token: t.to_owned(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if key.is_empty() || probs.is_empty() {
            return Err(MockFileError::BadRecord { line });
        }
        match vocab {
            None => vocab = Some(probs.len()),
            Some(v) if v != probs.len() => {
                return Err(MockFileError::RaggedRecord {
                    line,
                    expected: v,
                    found: probs.len(),
                })
            }
            _ => {}
        }
        entries.push((key, probs));
    }
    let vocab = vocab.ok_or(MockFileError::Empty)?;
    Ok(mock_from_table(vocab, max_len, entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ksr_core::decode::PosteriorSource;

    #[test]
    fn parses_and_normalizes() {
        let m = parse("# chain\n1 -> 0 0 0 0 2 2\n1 4 -> 0 0 1 0 0 0  # then eos\n", 7).unwrap();
        assert_eq!(m.vocab_size(), 6);
        assert_eq!(m.max_len(), 7);
        assert_eq!(m.probs(&[1]), vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5]);
        assert_eq!(m.probs(&[1, 4])[2], 1.0);
        assert_eq!(m.probs(&[3]), vec![1.0 / 6.0; 6]);
    }

    #[test]
    fn errors() {
        assert_eq!(parse("1 0.5 0.5", 3), Err(MockFileError::BadRecord { line: 1 }));
        assert!(matches!(parse("x -> 1 1 1 1", 3), Err(MockFileError::BadNumber { .. })));
        assert_eq!(
            parse("1 -> 1 1 1 1\n2 -> 1 1 1\n", 3),
            Err(MockFileError::RaggedRecord { line: 2, expected: 4, found: 3 })
        );
        assert_eq!(parse("# nothing\n", 3), Err(MockFileError::Empty));
        assert!(matches!(
            parse("1 -> 1 -1 1 1", 3),
            Err(MockFileError::Model(DecodeError::NegativeProbability { entry: 0 }))
        ));
    }
}

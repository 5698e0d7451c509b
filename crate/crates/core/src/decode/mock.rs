use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{DecodeError, PosteriorSource};
use crate::text::EOS_ID;

/// Table-driven posterior source. A query uses the longest stored key that
/// is a suffix of the prefix; prefixes with no matching key get the uniform
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MockModel {
    vocab_size: usize,
    max_len: usize,
    table: BTreeMap<Vec<u32>, Vec<f64>>,
    longest_key: usize,
}

/// Normalizes each vector to sum 1. Later entries replace earlier ones with
/// the same key.
pub fn mock_from_table<I>(vocab_size: usize, max_len: usize, entries: I) -> Result<MockModel, DecodeError>
where
    I: IntoIterator<Item = (Vec<u32>, Vec<f64>)>,
{
    if vocab_size <= EOS_ID as usize {
        return Err(DecodeError::VocabTooSmall);
    }
    let mut table = BTreeMap::new();
    let mut longest_key = 0;
    for (entry, (key, probs)) in entries.into_iter().enumerate() {
        if probs.len() != vocab_size {
            return Err(DecodeError::WrongLength {
                entry,
                expected: vocab_size,
                found: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(DecodeError::NegativeProbability { entry });
        }
        let sum: f64 = probs.iter().sum();
        if sum <= 0.0 {
            return Err(DecodeError::ZeroMass { entry });
        }
        longest_key = longest_key.max(key.len());
        table.insert(key, probs.into_iter().map(|p| p / sum).collect());
    }
    Ok(MockModel {
        vocab_size,
        max_len,
        table,
        longest_key,
    })
}

impl MockModel {
    /// Probability vector used for `prefix`.
    pub fn probs(&self, prefix: &[u32]) -> Vec<f64> {
        let longest = self.longest_key.min(prefix.len());
        for len in (1..=longest).rev() {
            if let Some(p) = self.table.get(&prefix[prefix.len() - len..]) {
                return p.clone();
            }
        }
        vec![1.0 / self.vocab_size as f64; self.vocab_size]
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u32], &[f64])> {
        self.table.iter().map(|(k, v)| (k.as_slice(), v.as_slice()))
    }
}

impl PosteriorSource for MockModel {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn max_len(&self) -> usize {
        self.max_len
    }

    fn log_probs(&self, prefix: &[u32]) -> Result<Vec<f64>, DecodeError> {
        Ok(self.probs(prefix).into_iter().map(libm::log).collect())
    }
}

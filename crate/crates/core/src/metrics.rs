//! Edit distance and character error rate.

use alloc::vec::Vec;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::text::Unit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("reference {index} is empty")]
    EmptyReference { index: usize },
    #[error("no utterance pairs to score")]
    EmptyCorpus,
}

/// Unit-cost edit distance, keeping one DP row over the shorter sequence.
pub fn levenshtein<T: PartialEq>(x: &[T], y: &[T]) -> usize {
    let (long, short) = if x.len() >= y.len() { (x, y) } else { (y, x) };
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, a) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, b) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = (diag + usize::from(a != b)).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CerResult {
    pub distance: usize,
    pub ref_len: usize,
    /// `100 * distance / ref_len`; may exceed 100.
    pub cer_percent: f64,
}

impl CerResult {
    fn new(distance: usize, ref_len: usize) -> Self {
        Self {
            distance,
            ref_len,
            cer_percent: 100.0 * distance as f64 / ref_len as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CerOptions {
    pub unit: Unit,
    /// Drop whitespace from both sides before comparing.
    pub ignore_spaces: bool,
}

/// NFC-normalizes, then splits into unit symbols.
pub fn tokenize(text: &str, opts: &CerOptions) -> Vec<char> {
    let nfc: alloc::string::String = text.nfc().collect();
    let mut symbols = opts.unit.split(&nfc);
    if opts.ignore_spaces {
        symbols.retain(|c| !c.is_whitespace());
    }
    symbols
}

fn pair(hyp: &str, reference: &str, opts: &CerOptions, index: usize) -> Result<(usize, usize), MetricsError> {
    let r = tokenize(reference, opts);
    if r.is_empty() {
        return Err(MetricsError::EmptyReference { index });
    }
    let h = tokenize(hyp, opts);
    Ok((levenshtein(&h, &r), r.len()))
}

pub fn cer(hyp: &str, reference: &str, opts: &CerOptions) -> Result<CerResult, MetricsError> {
    let (d, l) = pair(hyp, reference, opts, 0)?;
    Ok(CerResult::new(d, l))
}

/// Pooled CER: `100 * sum D / sum L`.
pub fn corpus_cer<H: AsRef<str>, R: AsRef<str>>(
    pairs: &[(H, R)],
    opts: &CerOptions,
) -> Result<CerResult, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let (mut d, mut l) = (0, 0);
    for (i, (h, r)) in pairs.iter().enumerate() {
        let (di, li) = pair(h.as_ref(), r.as_ref(), opts, i)?;
        d += di;
        l += li;
    }
    Ok(CerResult::new(d, l))
}

/// Pools already-computed per-utterance counts.
pub fn pool(results: &[CerResult]) -> Result<CerResult, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let d = results.iter().map(|r| r.distance).sum();
    let l = results.iter().map(|r| r.ref_len).sum();
    Ok(CerResult::new(d, l))
}

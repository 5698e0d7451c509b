use alloc::vec::Vec;

use super::TextError;

/// Transcripts longer than this many characters are dropped by default.
pub const DEFAULT_MAX_LEN: usize = 100;

/// Five-number summary of transcript lengths. Quartiles are medians of the
/// lower and upper halves (the middle element is excluded from both when the
/// count is odd), so they may fall halfway between two lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthStats {
    pub count: usize,
    pub min: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: usize,
    /// `q3 + 1.5 (q3 - q1)`
    pub iqr_outlier_threshold: f64,
}

fn median_sorted(v: &[usize]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

pub fn corpus_length_stats(lengths: &[usize]) -> Result<LengthStats, TextError> {
    if lengths.is_empty() {
        return Err(TextError::EmptyInput);
    }
    let mut v: Vec<usize> = lengths.to_vec();
    v.sort_unstable();
    let n = v.len();
    let median = median_sorted(&v);
    let (q1, q3) = if n == 1 {
        (median, median)
    } else {
        (median_sorted(&v[..n / 2]), median_sorted(&v[n.div_ceil(2)..]))
    };
    Ok(LengthStats {
        count: n,
        min: v[0],
        q1,
        median,
        q3,
        max: v[n - 1],
        iqr_outlier_threshold: q3 + 1.5 * (q3 - q1),
    })
}

/// Whether a transcript of `text` fits under the length cap (in characters).
pub fn within_length(text: &str, max_len: usize) -> bool {
    text.chars().count() <= max_len
}

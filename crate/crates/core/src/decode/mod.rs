//! Greedy and beam-search decoding over a token posterior source.
//!
//! Hypotheses start with `<sos>` (id 1) and finish on `<eos>` (id 2). Scores
//! are natural-log probabilities. Ranking is by score, then by token sequence
//! in lexicographic order, so results are fully deterministic.

mod mock;

pub use mock::{mock_from_table, MockModel};

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use thiserror::Error;

use crate::text::{EOS_ID, SOS_ID};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("posterior source failed: {0}")]
    SourceFailure(String),
    #[error("beam width must be at least 1")]
    ZeroBeam,
    #[error("entry {entry}: negative probability")]
    NegativeProbability { entry: usize },
    #[error("entry {entry}: expected {expected} probabilities, found {found}")]
    WrongLength {
        entry: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry {entry}: probabilities sum to zero")]
    ZeroMass { entry: usize },
    #[error("vocabulary must contain the special ids")]
    VocabTooSmall,
}

/// Supplies next-token log-probabilities for a prefix that begins with `<sos>`.
pub trait PosteriorSource {
    fn vocab_size(&self) -> usize;
    /// Maximum number of tokens generated after `<sos>`.
    fn max_len(&self) -> usize;
    fn log_probs(&self, prefix: &[u32]) -> Result<Vec<f64>, DecodeError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<u32>,
    pub log_prob: f64,
    pub finished: bool,
}

impl Hypothesis {
    fn start() -> Self {
        Self {
            tokens: alloc::vec![SOS_ID],
            log_prob: 0.0,
            finished: false,
        }
    }

    /// Tokens after `<sos>`, up to but excluding `<eos>`.
    pub fn output_tokens(&self) -> &[u32] {
        let body = &self.tokens[1..];
        match body.last() {
            Some(&EOS_ID) if self.finished => &body[..body.len() - 1],
            _ => body,
        }
    }

    fn score(&self, length_norm: bool) -> f64 {
        if length_norm {
            // length counts generated tokens
            self.log_prob / (self.tokens.len() - 1).max(1) as f64
        } else {
            self.log_prob
        }
    }
}

fn rank(a: &Hypothesis, b: &Hypothesis, length_norm: bool) -> Ordering {
    b.score(length_norm)
        .total_cmp(&a.score(length_norm))
        .then_with(|| a.tokens.cmp(&b.tokens))
}

fn step(src: &(impl PosteriorSource + ?Sized), prefix: &[u32]) -> Result<Vec<f64>, DecodeError> {
    let lp = src.log_probs(prefix)?;
    if lp.len() != src.vocab_size() {
        return Err(DecodeError::SourceFailure(alloc::format!(
            "returned {} log-probabilities for a vocabulary of {}",
            lp.len(),
            src.vocab_size()
        )));
    }
    if lp.iter().any(|x| x.is_nan() || *x > 0.0) {
        return Err(DecodeError::SourceFailure("log-probability is NaN or positive".into()));
    }
    Ok(lp)
}

/// Appends the most probable token (lowest id on ties) until `<eos>` or the
/// length cap.
pub fn greedy_decode(src: &(impl PosteriorSource + ?Sized)) -> Result<Hypothesis, DecodeError> {
    let mut hyp = Hypothesis::start();
    for _ in 0..src.max_len() {
        let lp = step(src, &hyp.tokens)?;
        let mut best = 0;
        for (i, &x) in lp.iter().enumerate() {
            if x > lp[best] {
                best = i;
            }
        }
        hyp.tokens.push(best as u32);
        hyp.log_prob += lp[best];
        if best as u32 == EOS_ID {
            hyp.finished = true;
            break;
        }
    }
    Ok(hyp)
}

/// Beam search of width `k`.
///
/// Each step expands every live hypothesis by every token and keeps the `k`
/// best candidates; those ending in `<eos>` move to the finished pool. Search
/// stops at the length cap, or once `k` hypotheses have finished and no live
/// one can still overtake the k-th best of them (only checked without length
/// normalization, since normalized scores can rise as a hypothesis grows).
/// Returns the finished pool, or the live beam if nothing finished, ranked
/// and truncated to `k`.
pub fn beam_decode(
    src: &(impl PosteriorSource + ?Sized),
    k: usize,
    length_norm: bool,
) -> Result<Vec<Hypothesis>, DecodeError> {
    if k == 0 {
        return Err(DecodeError::ZeroBeam);
    }
    let mut live = alloc::vec![Hypothesis::start()];
    let mut finished: Vec<Hypothesis> = Vec::new();
    for _ in 0..src.max_len() {
        if live.is_empty() {
            break;
        }
        let mut candidates = Vec::with_capacity(live.len() * src.vocab_size());
        for h in &live {
            let lp = step(src, &h.tokens)?;
            for (t, &x) in lp.iter().enumerate() {
                let mut tokens = h.tokens.clone();
                tokens.push(t as u32);
                candidates.push(Hypothesis {
                    tokens,
                    log_prob: h.log_prob + x,
                    finished: t as u32 == EOS_ID,
                });
            }
        }
        candidates.sort_by(|a, b| rank(a, b, length_norm));
        candidates.truncate(k);
        live.clear();
        for c in candidates {
            if c.finished {
                finished.push(c);
            } else {
                live.push(c);
            }
        }
        if finished.len() >= k {
            if length_norm || live.is_empty() {
                break;
            }
            finished.sort_by(|a, b| rank(a, b, false));
            let worst_kept = finished[k - 1].log_prob;
            if live.iter().all(|h| h.log_prob <= worst_kept) {
                break;
            }
        }
    }
    let mut out = if finished.is_empty() { live } else { finished };
    out.sort_by(|a, b| rank(a, b, length_norm));
    out.truncate(k);
    Ok(out)
}

/// Sum of the source's log-probabilities along `tokens` (which start with `<sos>`).
pub fn rescore(src: &(impl PosteriorSource + ?Sized), tokens: &[u32]) -> Result<f64, DecodeError> {
    let mut total = 0.0;
    for i in 1..tokens.len() {
        total += step(src, &tokens[..i])?[tokens[i] as usize];
    }
    Ok(total)
}

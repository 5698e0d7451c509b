//! Attention kernels (dot, scaled dot, additive, location-aware, multi-head),
//! the scaled dot-product gradient, and convolutional front-end geometry.

mod backward;
mod extractor;
mod matrix;

pub use backward::{scaled_dot_backward, AttentionGrads};
pub use extractor::{
    extractor_output_shape, ExtractorKind, ExtractorSpec, Layer, LayerKind, LISTENER_LAYERS,
    LISTENER_UNITS, SPELLER_LAYERS, SPELLER_UNITS,
};
pub use matrix::Matrix;

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttentionError {
    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("attention needs at least one key")]
    NoKeys,
    #[error("previous alignment invalid: {0}")]
    BadAlignment(&'static str),
    #[error("model width {d_model} is not divisible by {heads} heads")]
    IndivisibleHeads { d_model: usize, heads: usize },
    #[error("convolution kernel width must be odd, got {0}")]
    EvenKernel(usize),
    #[error("layer {layer}: {axis} size {size} (padded) is smaller than kernel {kernel}")]
    InputTooSmall {
        layer: usize,
        axis: &'static str,
        size: usize,
        kernel: usize,
    },
    #[error("layer {0} has a zero dimension")]
    ZeroDimension(usize),
}

/// Queries `n_q x d_k`, keys `n_k x d_k`, values `n_k x d_v`.
///
/// Additive and location-aware attention allow the query width to differ
/// from the key width; the dot-product mechanisms require them equal.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionInput {
    pub q: Matrix,
    pub k: Matrix,
    pub v: Matrix,
}

impl AttentionInput {
    pub fn new(q: Matrix, k: Matrix, v: Matrix) -> Result<Self, AttentionError> {
        if k.rows() != v.rows() {
            return Err(AttentionError::ShapeMismatch {
                what: "key/value rows",
                expected: k.rows(),
                found: v.rows(),
            });
        }
        if k.rows() == 0 {
            return Err(AttentionError::NoKeys);
        }
        Ok(Self { q, k, v })
    }

    fn require_same_width(&self) -> Result<(), AttentionError> {
        if self.q.cols() != self.k.cols() {
            return Err(AttentionError::ShapeMismatch {
                what: "query/key width",
                expected: self.k.cols(),
                found: self.q.cols(),
            });
        }
        Ok(())
    }
}

/// One `n_q x n_k` weight matrix per head (a single entry for the
/// single-head mechanisms) and the `n_q x d_out` context.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionResult {
    pub weights: Vec<Matrix>,
    pub context: Matrix,
}

/// Sum taken in ascending order, so any permutation of `terms` gives the
/// same bits.
fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// In-place softmax of one row, with the row maximum subtracted first.
/// The result does not depend on the order of the entries.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for x in row.iter_mut() {
        *x = libm::exp(*x - max);
    }
    let sum = ordered_sum(&mut row.to_vec());
    for x in row.iter_mut() {
        *x /= sum;
    }
}

fn softmax_rows(mut logits: Matrix) -> Matrix {
    let cols = logits.cols();
    if cols > 0 {
        for row in logits.data_mut().chunks_exact_mut(cols) {
            softmax_in_place(row);
        }
    }
    logits
}

/// `context = weights * V`, each entry summed in sorted order so that
/// reordering keys and values leaves it bit-identical.
fn finish(weights: Matrix, v: &Matrix) -> Result<AttentionResult, AttentionError> {
    let n_k = weights.cols();
    let mut terms = vec![0.0; n_k];
    let context = Matrix::from_fn(weights.rows(), v.cols(), |i, t| {
        for (j, term) in terms.iter_mut().enumerate() {
            *term = weights.get(i, j) * v.get(j, t);
        }
        ordered_sum(&mut terms)
    });
    Ok(AttentionResult {
        weights: vec![weights],
        context,
    })
}

/// `softmax(Q K^T [/ sqrt(d_k)]) V`
pub fn dot_attention(input: &AttentionInput, scaled: bool) -> Result<AttentionResult, AttentionError> {
    input.require_same_width()?;
    let mut logits = input.q.matmul(&input.k.transpose())?;
    if scaled {
        let s = libm::sqrt(input.k.cols() as f64);
        for x in logits.data_mut() {
            *x /= s;
        }
    }
    finish(softmax_rows(logits), &input.v)
}

/// `W1: hidden x (d_q + d_k)`, `w2: hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveParams {
    pub w1: Matrix,
    pub w2: Vec<f64>,
}

/// `score(q, k) = w2^T tanh(W1 [q; k])`
pub fn additive_attention(
    input: &AttentionInput,
    p: &AdditiveParams,
) -> Result<AttentionResult, AttentionError> {
    let (d_q, d_k) = (input.q.cols(), input.k.cols());
    if p.w1.cols() != d_q + d_k {
        return Err(AttentionError::ShapeMismatch {
            what: "W1 columns (d_q + d_k)",
            expected: d_q + d_k,
            found: p.w1.cols(),
        });
    }
    if p.w2.len() != p.w1.rows() {
        return Err(AttentionError::ShapeMismatch {
            what: "w2 length",
            expected: p.w1.rows(),
            found: p.w2.len(),
        });
    }
    // W1 [q; k] = W1[:, :d_q] q + W1[:, d_q:] k
    let wq = input.q.matmul(&p.w1.columns(0, d_q).transpose())?;
    let wk = input.k.matmul(&p.w1.columns(d_q, d_k).transpose())?;
    let hidden = p.w1.rows();
    let logits = Matrix::from_fn(input.q.rows(), input.k.rows(), |i, j| {
        (0..hidden)
            .map(|h| p.w2[h] * libm::tanh(wq.get(i, h) + wk.get(j, h)))
            .sum()
    });
    finish(softmax_rows(logits), &input.v)
}

/// Parameters of location-aware scoring
/// `w^T tanh(W_q q + W_k k_j + U phi_j + b)`, where `phi_j` is column `j` of
/// the previous alignment convolved with `r` filters of odd width `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationParams {
    /// `r x c`
    pub conv_kernel: Matrix,
    /// `hidden x r`
    pub u: Matrix,
    /// `hidden x d_q`
    pub w_q: Matrix,
    /// `hidden x d_k`
    pub w_k: Matrix,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

pub const DEFAULT_CONV_WIDTH: usize = 3;
pub const DEFAULT_CONV_FILTERS: usize = 10;

/// Same-length convolution, `phi[j][f] = sum_m kernel[f][m] * a[j + half - m]`
/// with zeros outside the sequence. Returns `n x r`.
pub fn location_features(alignment: &[f64], kernel: &Matrix) -> Result<Matrix, AttentionError> {
    let c = kernel.cols();
    if c.is_multiple_of(2) {
        return Err(AttentionError::EvenKernel(c));
    }
    let half = c / 2;
    let n = alignment.len();
    Ok(Matrix::from_fn(n, kernel.rows(), |j, f| {
        (0..c)
            .filter_map(|m| {
                (j + half)
                    .checked_sub(m)
                    .filter(|&idx| idx < n)
                    .map(|idx| kernel.get(f, m) * alignment[idx])
            })
            .sum()
    }))
}

fn check_alignment(a: &[f64]) -> Result<(), AttentionError> {
    if a.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(AttentionError::BadAlignment("entries must be finite and non-negative"));
    }
    let sum: f64 = a.iter().sum();
    if sum != 0.0 && libm::fabs(sum - 1.0) > 1e-6 {
        return Err(AttentionError::BadAlignment("entries must sum to 1 or all be zero"));
    }
    Ok(())
}

/// One decoder step of location-aware attention. Every query row is scored
/// against the same previous alignment (length `n_k`; all zeros at step 0).
pub fn location_aware_attention(
    input: &AttentionInput,
    prev_alignment: &[f64],
    p: &LocationParams,
) -> Result<AttentionResult, AttentionError> {
    let n_k = input.k.rows();
    if prev_alignment.len() != n_k {
        return Err(AttentionError::ShapeMismatch {
            what: "previous alignment length",
            expected: n_k,
            found: prev_alignment.len(),
        });
    }
    check_alignment(prev_alignment)?;
    let hidden = p.w.len();
    for (what, found) in [
        ("W_q rows", p.w_q.rows()),
        ("W_k rows", p.w_k.rows()),
        ("U rows", p.u.rows()),
        ("bias length", p.b.len()),
    ] {
        if found != hidden {
            return Err(AttentionError::ShapeMismatch {
                what,
                expected: hidden,
                found,
            });
        }
    }
    if p.u.cols() != p.conv_kernel.rows() {
        return Err(AttentionError::ShapeMismatch {
            what: "U columns (filters)",
            expected: p.conv_kernel.rows(),
            found: p.u.cols(),
        });
    }

    let phi = location_features(prev_alignment, &p.conv_kernel)?;
    let qh = input.q.matmul(&p.w_q.transpose())?;
    let mut kh = input.k.matmul(&p.w_k.transpose())?;
    let uphi = phi.matmul(&p.u.transpose())?;
    for j in 0..n_k {
        for h in 0..hidden {
            kh.set(j, h, kh.get(j, h) + uphi.get(j, h) + p.b[h]);
        }
    }
    let logits = Matrix::from_fn(input.q.rows(), n_k, |i, j| {
        (0..hidden)
            .map(|h| p.w[h] * libm::tanh(qh.get(i, h) + kh.get(j, h)))
            .sum()
    });
    finish(softmax_rows(logits), &input.v)
}

/// Per-head projections (`d_model x d_head` each) and the output projection
/// (`heads * d_head x d_out`).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHeadParams {
    pub heads: usize,
    pub w_q: Vec<Matrix>,
    pub w_k: Vec<Matrix>,
    pub w_v: Vec<Matrix>,
    pub w_o: Matrix,
}

impl MultiHeadParams {
    /// Identity-sliced projections: head `i` sees feature block `i`.
    pub fn identity(d_model: usize, heads: usize) -> Result<Self, AttentionError> {
        if heads == 0 || !d_model.is_multiple_of(heads) {
            return Err(AttentionError::IndivisibleHeads { d_model, heads });
        }
        let d = d_model / heads;
        let slice = |i: usize| Matrix::from_fn(d_model, d, |r, c| if r == i * d + c { 1.0 } else { 0.0 });
        let proj: Vec<Matrix> = (0..heads).map(slice).collect();
        Ok(Self {
            heads,
            w_q: proj.clone(),
            w_k: proj.clone(),
            w_v: proj,
            w_o: Matrix::identity(d_model),
        })
    }
}

pub fn multi_head_attention(
    input: &AttentionInput,
    p: &MultiHeadParams,
) -> Result<AttentionResult, AttentionError> {
    let d_model = input.q.cols();
    if p.heads == 0 || !d_model.is_multiple_of(p.heads) {
        return Err(AttentionError::IndivisibleHeads {
            d_model,
            heads: p.heads,
        });
    }
    for (what, list) in [("W_q heads", &p.w_q), ("W_k heads", &p.w_k), ("W_v heads", &p.w_v)] {
        if list.len() != p.heads {
            return Err(AttentionError::ShapeMismatch {
                what,
                expected: p.heads,
                found: list.len(),
            });
        }
    }
    let n_q = input.q.rows();
    let mut weights = Vec::with_capacity(p.heads);
    let mut contexts = Vec::with_capacity(p.heads);
    for h in 0..p.heads {
        let head = AttentionInput::new(
            input.q.matmul(&p.w_q[h])?,
            input.k.matmul(&p.w_k[h])?,
            input.v.matmul(&p.w_v[h])?,
        )?;
        let mut r = dot_attention(&head, true)?;
        weights.push(r.weights.pop().expect("one weight matrix"));
        contexts.push(r.context);
    }
    let widths: Vec<usize> = contexts.iter().map(Matrix::cols).collect();
    let total: usize = widths.iter().sum();
    let mut concat = Matrix::zeros(n_q, total);
    let mut offset = 0;
    for (ctx, w) in contexts.iter().zip(&widths) {
        for i in 0..n_q {
            for j in 0..*w {
                concat.set(i, offset + j, ctx.get(i, j));
            }
        }
        offset += w;
    }
    Ok(AttentionResult {
        weights,
        context: concat.matmul(&p.w_o)?,
    })
}

use super::{dot_attention, AttentionError, AttentionInput, Matrix};

/// Gradients of `<upstream, context>` for scaled dot-product attention.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionGrads {
    pub dq: Matrix,
    pub dk: Matrix,
    pub dv: Matrix,
}

/// With `W = softmax(Q K^T / sqrt(d))` and `G` the upstream gradient:
/// `dV = W^T G`, `dW = G V^T`, `dS = W * (dW - rowsum(W * dW))`,
/// `dQ = dS K / sqrt(d)`, `dK = dS^T Q / sqrt(d)`.
pub fn scaled_dot_backward(
    input: &AttentionInput,
    upstream: &Matrix,
) -> Result<AttentionGrads, AttentionError> {
    let (n_q, d_v) = (input.q.rows(), input.v.cols());
    if upstream.rows() != n_q || upstream.cols() != d_v {
        return Err(AttentionError::ShapeMismatch {
            what: "upstream gradient shape (n_q * d_v)",
            expected: n_q * d_v,
            found: upstream.rows() * upstream.cols(),
        });
    }
    let w = dot_attention(input, true)?.weights.remove(0);
    let dv = w.transpose().matmul(upstream)?;
    let dw = upstream.matmul(&input.v.transpose())?;
    let n_k = w.cols();
    let mut ds = Matrix::zeros(n_q, n_k);
    for i in 0..n_q {
        let dot: f64 = (0..n_k).map(|j| w.get(i, j) * dw.get(i, j)).sum();
        for j in 0..n_k {
            ds.set(i, j, w.get(i, j) * (dw.get(i, j) - dot));
        }
    }
    let inv = 1.0 / libm::sqrt(input.k.cols() as f64);
    Ok(AttentionGrads {
        dq: ds.matmul(&input.k)?.scale(inv),
        dk: ds.transpose().matmul(&input.q)?.scale(inv),
        dv,
    })
}

//! Output geometry of the convolutional listener front-ends.
//!
//! Sizes are `(time, freq)` throughout. Each layer maps an axis of length `n`
//! to `floor((n + 2p - k) / s) + 1`.

use alloc::vec;
use alloc::vec::Vec;

use super::AttentionError;

/// Stacked bidirectional LSTM layers in the listener.
pub const LISTENER_LAYERS: usize = 3;
/// Units per direction in each listener layer.
pub const LISTENER_UNITS: usize = 512;
/// Stacked unidirectional LSTM layers in the speller.
pub const SPELLER_LAYERS: usize = 2;
pub const SPELLER_UNITS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractorKind {
    Vgg,
    Ds2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    /// Convolution + batch norm + activation.
    Conv,
    MaxPool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    pub kind: LayerKind,
    /// `(time, freq)`
    pub kernel: (usize, usize),
    pub stride: (usize, usize),
    pub padding: (usize, usize),
    /// Output channels; pooling keeps the incoming count and ignores this.
    pub channels: usize,
}

impl Layer {
    pub fn conv(kernel: (usize, usize), stride: (usize, usize), padding: (usize, usize), channels: usize) -> Self {
        Self { kind: LayerKind::Conv, kernel, stride, padding, channels }
    }

    pub fn max_pool(kernel: (usize, usize), stride: (usize, usize)) -> Self {
        Self { kind: LayerKind::MaxPool, kernel, stride, padding: (0, 0), channels: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractorSpec {
    pub kind: ExtractorKind,
    pub layers: Vec<Layer>,
}

impl ExtractorSpec {
    /// Two blocks of two 3x3 convolutions (64 then 128 channels, padding 1),
    /// each followed by a 3x3 max pool with stride 2.
    pub fn vgg() -> Self {
        let conv = |ch| Layer::conv((3, 3), (1, 1), (1, 1), ch);
        let pool = Layer::max_pool((3, 3), (2, 2));
        Self {
            kind: ExtractorKind::Vgg,
            layers: vec![conv(64), conv(64), pool, conv(128), conv(128), pool],
        }
    }

    /// 41x11 then 21x11 (freq x time) convolutions with 32 channels, no
    /// padding. Default strides are (2, 2) and (2, 1) in (freq, time).
    pub fn ds2() -> Self {
        Self::ds2_with_strides((2, 2), (2, 1))
    }

    /// Strides given as `(freq, time)` like the kernel sizes.
    pub fn ds2_with_strides(first: (usize, usize), second: (usize, usize)) -> Self {
        Self {
            kind: ExtractorKind::Ds2,
            layers: vec![
                Layer::conv((11, 41), (first.1, first.0), (0, 0), 32),
                Layer::conv((11, 21), (second.1, second.0), (0, 0), 32),
            ],
        }
    }
}

fn axis_out(
    layer: usize,
    axis: &'static str,
    n: usize,
    k: usize,
    s: usize,
    p: usize,
) -> Result<usize, AttentionError> {
    let padded = n + 2 * p;
    if padded < k {
        return Err(AttentionError::InputTooSmall { layer, axis, size: padded, kernel: k });
    }
    Ok((padded - k) / s + 1)
}

/// `(time, freq, channels)` after every layer of `spec`.
pub fn extractor_output_shape(
    spec: &ExtractorSpec,
    input: (usize, usize),
) -> Result<(usize, usize, usize), AttentionError> {
    let (mut t, mut f, mut ch) = (input.0, input.1, 1);
    if t == 0 || f == 0 {
        return Err(AttentionError::ZeroDimension(0));
    }
    for (i, l) in spec.layers.iter().enumerate() {
        let dims = [l.kernel.0, l.kernel.1, l.stride.0, l.stride.1];
        if dims.contains(&0) || (l.kind == LayerKind::Conv && l.channels == 0) {
            return Err(AttentionError::ZeroDimension(i));
        }
        t = axis_out(i, "time", t, l.kernel.0, l.stride.0, l.padding.0)?;
        f = axis_out(i, "freq", f, l.kernel.1, l.stride.1, l.padding.1)?;
        if l.kind == LayerKind::Conv {
            ch = l.channels;
        }
    }
    Ok((t, f, ch))
}

//! Frequency and time masking on feature matrices.
//!
//! Randomness comes from ChaCha8 seeded with [`SeedableRng::seed_from_u64`]
//! (rand_core's PCG32 seed expansion), and every integer is drawn with
//! [`uniform_inclusive`], a documented rejection sampler over `next_u64`.
//! Both are fixed algorithms, so a seed produces the same masks on every
//! platform and in any reimplementation that follows them.
//!
//! Draw order inside [`augment`]: all frequency masks first, each as
//! (width, offset); then all time masks, each as (width, offset).

use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::features::{FeatureKind, FeatureMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AugmentError {
    #[error("{axis} mask [{offset}, {offset}+{width}) exceeds axis length {len}")]
    MaskOutOfRange {
        axis: MaskAxis,
        offset: usize,
        width: usize,
        len: usize,
    },
    #[error("time mask ratio must lie in [0, 1], got {0}")]
    BadRatio(f64),
    #[error("fill value {value} is not valid for {kind} features")]
    BadFill { value: f64, kind: FeatureKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskAxis {
    Frequency,
    Time,
}

impl fmt::Display for MaskAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskAxis::Frequency => "frequency",
            MaskAxis::Time => "time",
        })
    }
}

/// One band `[offset, offset + width)` along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MaskSpec {
    pub axis: MaskAxis,
    pub offset: usize,
    pub width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentPolicy {
    /// Maximum frequency mask width `F`, in channels.
    pub freq_mask_param: usize,
    pub n_freq_masks: usize,
    /// Maximum time mask width `T`, in frames.
    pub time_mask_param: usize,
    pub n_time_masks: usize,
    /// Time masks are further capped at `floor(p_s * frames)`.
    pub max_time_ratio: f64,
    pub mask_value: f64,
    pub seed: u64,
}

impl AugmentPolicy {
    /// `F = 20`, one frequency mask, ten time masks capped at 5% of the utterance.
    pub fn baseline(seed: u64) -> Self {
        Self {
            freq_mask_param: 20,
            n_freq_masks: 1,
            time_mask_param: 100,
            n_time_masks: 10,
            max_time_ratio: 0.05,
            mask_value: 0.0,
            seed,
        }
    }

    /// No masks at all.
    pub fn none(seed: u64) -> Self {
        Self {
            freq_mask_param: 0,
            n_freq_masks: 0,
            time_mask_param: 0,
            n_time_masks: 0,
            max_time_ratio: 0.0,
            mask_value: 0.0,
            seed,
        }
    }
}

/// Generator used by [`augment`] for a given seed.
pub fn mask_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `[lo, hi]` (both inclusive).
///
/// With `span = hi - lo + 1`, 64-bit draws below `2^64 mod span` are rejected
/// and the result is `lo + x mod span`.
pub fn uniform_inclusive<R: RngCore + ?Sized>(rng: &mut R, lo: usize, hi: usize) -> usize {
    debug_assert!(lo <= hi);
    let span = ((hi - lo) as u64).wrapping_add(1);
    if span == 0 {
        // full u64 range
        return lo.wrapping_add(rng.next_u64() as usize);
    }
    let reject_below = span.wrapping_neg() % span;
    loop {
        let x = rng.next_u64();
        if x >= reject_below {
            return lo + (x % span) as usize;
        }
    }
}

/// Width `f ~ U[0, min(F, v)]`, offset `f0 ~ U[0, v - f]`.
pub fn sample_freq_mask<R: RngCore + ?Sized>(
    channels: usize,
    freq_mask_param: usize,
    rng: &mut R,
) -> MaskSpec {
    let width = uniform_inclusive(rng, 0, freq_mask_param.min(channels));
    let offset = uniform_inclusive(rng, 0, channels - width);
    MaskSpec {
        axis: MaskAxis::Frequency,
        offset,
        width,
    }
}

/// Width `t ~ U[0, min(T, floor(p_s * tau))]`, offset `t0 ~ U[0, tau - t]`.
pub fn sample_time_mask<R: RngCore + ?Sized>(
    frames: usize,
    time_mask_param: usize,
    max_time_ratio: f64,
    rng: &mut R,
) -> MaskSpec {
    let ratio_cap = libm::floor(max_time_ratio.clamp(0.0, 1.0) * frames as f64) as usize;
    let cap = time_mask_param.min(ratio_cap).min(frames);
    let width = uniform_inclusive(rng, 0, cap);
    let offset = uniform_inclusive(rng, 0, frames - width);
    MaskSpec {
        axis: MaskAxis::Time,
        offset,
        width,
    }
}

/// Sets masked columns (frequency) or rows (time) to `mask_value`.
/// Cells outside every mask are left untouched. Power-type kinds only accept
/// a non-negative fill.
pub fn apply_masks(
    m: &FeatureMatrix,
    masks: &[MaskSpec],
    mask_value: f64,
) -> Result<FeatureMatrix, AugmentError> {
    if !mask_value.is_finite() || (m.kind().is_non_negative() && mask_value < 0.0) {
        return Err(AugmentError::BadFill {
            value: mask_value,
            kind: m.kind(),
        });
    }
    let (rows, cols) = (m.rows(), m.cols());
    for mask in masks {
        let len = match mask.axis {
            MaskAxis::Frequency => cols,
            MaskAxis::Time => rows,
        };
        if mask.offset.checked_add(mask.width).is_none_or(|end| end > len) {
            return Err(AugmentError::MaskOutOfRange {
                axis: mask.axis,
                offset: mask.offset,
                width: mask.width,
                len,
            });
        }
    }
    let mut out = m.clone();
    let data = out.data_mut();
    for mask in masks {
        let band = mask.offset..mask.offset + mask.width;
        match mask.axis {
            MaskAxis::Frequency => {
                for row in data.chunks_exact_mut(cols) {
                    row[band.clone()].fill(mask_value);
                }
            }
            MaskAxis::Time => data[band.start * cols..band.end * cols].fill(mask_value),
        }
    }
    Ok(out)
}

/// Draws the policy's masks from its seed and applies them to a copy of `m`.
pub fn augment(
    m: &FeatureMatrix,
    policy: &AugmentPolicy,
) -> Result<(FeatureMatrix, Vec<MaskSpec>), AugmentError> {
    if !(0.0..=1.0).contains(&policy.max_time_ratio) {
        return Err(AugmentError::BadRatio(policy.max_time_ratio));
    }
    let mut rng = mask_rng(policy.seed);
    let mut masks = Vec::with_capacity(policy.n_freq_masks + policy.n_time_masks);
    if m.cols() > 0 {
        for _ in 0..policy.n_freq_masks {
            masks.push(sample_freq_mask(m.cols(), policy.freq_mask_param, &mut rng));
        }
    }
    if m.rows() > 0 {
        for _ in 0..policy.n_time_masks {
            masks.push(sample_time_mask(
                m.rows(),
                policy.time_mask_param,
                policy.max_time_ratio,
                &mut rng,
            ));
        }
    }
    let out = apply_masks(m, &masks, policy.mask_value)?;
    Ok((out, masks))
}

//! Framing, analysis windows and short-time Fourier transforms.

mod fft;

pub use fft::{fft_real, Radix2, RealDft};

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::audio::AudioBuffer;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("transform size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("length {0} is too short (need at least 2)")]
    DegenerateLength(usize),
    #[error("frame of {frame} samples does not fit n_fft = {n_fft}")]
    FrameTooLong { frame: usize, n_fft: usize },
    #[error("signal of {len} samples is shorter than one {frame}-sample frame")]
    TooShort { len: usize, frame: usize },
    #[error("invalid frame config: {0}")]
    BadConfig(&'static str),
    #[error("hamming coefficient {0} outside (0, 0.54)")]
    BadCoefficient(f64),
}

/// Frame length and hop, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    pub frame_len_ms: f64,
    pub hop_ms: f64,
    /// Zero-pad each frame to the next power of two before the transform.
    pub pad_to_pow2: bool,
}

impl Default for FrameConfig {
    /// 20 ms frames every 10 ms, padded to a power of two.
    fn default() -> Self {
        Self {
            frame_len_ms: 20.0,
            hop_ms: 10.0,
            pad_to_pow2: true,
        }
    }
}

impl FrameConfig {
    pub fn new(frame_len_ms: f64, hop_ms: f64, pad_to_pow2: bool) -> Self {
        Self {
            frame_len_ms,
            hop_ms,
            pad_to_pow2,
        }
    }

    /// Frame and hop lengths in samples for a given rate.
    pub fn geometry(&self, sample_rate: u32) -> Result<FrameGeometry, DspError> {
        if !(self.frame_len_ms > 0.0 && self.hop_ms > 0.0)
            || !self.frame_len_ms.is_finite()
            || !self.hop_ms.is_finite()
        {
            return Err(DspError::BadConfig("frame and hop must be positive"));
        }
        if self.hop_ms > self.frame_len_ms {
            return Err(DspError::BadConfig("hop must not exceed frame length"));
        }
        let rate = f64::from(sample_rate);
        let frame_len = libm::round(self.frame_len_ms * rate / 1000.0) as usize;
        let hop = libm::round(self.hop_ms * rate / 1000.0) as usize;
        if frame_len < 2 {
            return Err(DspError::DegenerateLength(frame_len));
        }
        if hop == 0 {
            return Err(DspError::BadConfig("hop rounds to zero samples"));
        }
        Ok(FrameGeometry { frame_len, hop })
    }

    /// Transform size implied by this config for `frame_len` samples.
    pub fn n_fft(&self, frame_len: usize) -> usize {
        if self.pad_to_pow2 {
            frame_len.next_power_of_two()
        } else {
            frame_len
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGeometry {
    pub frame_len: usize,
    pub hop: usize,
}

impl FrameGeometry {
    /// `floor((len - frame_len) / hop) + 1`, or zero if the signal is shorter than a frame.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            (len - self.frame_len) / self.hop + 1
        }
    }
}

/// Frames of equal length, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames {
    data: Vec<f64>,
    frame_len: usize,
    hop: usize,
}

impl Frames {
    pub fn len(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.frame_len..(t + 1) * self.frame_len]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.frame_len)
    }
}

/// Cuts the signal into overlapping frames; frame `t` starts at `t * hop`.
/// A trailing partial frame is dropped.
pub fn frame_signal(buf: &AudioBuffer, cfg: &FrameConfig) -> Result<Frames, DspError> {
    let geom = cfg.geometry(buf.sample_rate())?;
    frame_samples(buf.samples(), geom)
}

pub fn frame_samples(samples: &[f64], geom: FrameGeometry) -> Result<Frames, DspError> {
    let count = geom.frame_count(samples.len());
    if count == 0 {
        return Err(DspError::TooShort {
            len: samples.len(),
            frame: geom.frame_len,
        });
    }
    let mut data = Vec::with_capacity(count * geom.frame_len);
    for t in 0..count {
        let start = t * geom.hop;
        data.extend_from_slice(&samples[start..start + geom.frame_len]);
    }
    Ok(Frames {
        data,
        frame_len: geom.frame_len,
        hop: geom.hop,
    })
}

/// Analysis window shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    /// `w(n) = 0.54 - a cos(2 pi n / (N - 1))`
    Hamming { a: f64 },
    Rectangular,
}

impl WindowSpec {
    /// Hamming with `a = 0.45`, so the edges sit at 0.09 and the centre at 0.99.
    pub const HAMMING_PAPER: WindowSpec = WindowSpec::Hamming { a: 0.45 };
    /// Conventional Hamming, `a = 0.46`.
    pub const HAMMING_STANDARD: WindowSpec = WindowSpec::Hamming { a: 0.46 };
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self::HAMMING_PAPER
    }
}

/// Window samples for `n >= 2` points. Exactly symmetric: the second half
/// mirrors the first.
pub fn make_window(spec: WindowSpec, n: usize) -> Result<Vec<f64>, DspError> {
    if n < 2 {
        return Err(DspError::DegenerateLength(n));
    }
    match spec {
        WindowSpec::Rectangular => Ok(alloc::vec![1.0; n]),
        WindowSpec::Hamming { a } => {
            if !(a > 0.0 && a < 0.54) {
                return Err(DspError::BadCoefficient(a));
            }
            let denom = (n - 1) as f64;
            let mut w = alloc::vec![0.0; n];
            for i in 0..n.div_ceil(2) {
                let v = 0.54 - a * libm::cos(2.0 * PI * i as f64 / denom);
                w[i] = v;
                w[n - 1 - i] = v;
            }
            Ok(w)
        }
    }
}

/// Appends zeros up to the next power of two. Power-of-two lengths are unchanged.
pub fn zero_pad_pow2(frame: &[f64]) -> Vec<f64> {
    let mut out = frame.to_vec();
    out.resize(frame.len().next_power_of_two(), 0.0);
    out
}

/// Non-negative-frequency half of a DFT: `n_fft / 2 + 1` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    bins: Vec<Complex64>,
    n_fft: usize,
}

impl ComplexSpectrum {
    pub fn new(bins: Vec<Complex64>, n_fft: usize) -> Self {
        debug_assert_eq!(bins.len(), n_fft / 2 + 1);
        Self { bins, n_fft }
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    /// Rebuilds all `n_fft` bins using `X[n - k] = conj(X[k])`.
    pub fn full_spectrum(&self) -> Vec<Complex64> {
        let n = self.n_fft;
        (0..n)
            .map(|k| {
                if k <= n / 2 {
                    self.bins[k]
                } else {
                    self.bins[n - k].conj()
                }
            })
            .collect()
    }
}

/// Frames, windows, pads and transforms the signal. Spectrum `t` belongs to frame `t`.
pub fn stft(
    buf: &AudioBuffer,
    cfg: &FrameConfig,
    win: WindowSpec,
) -> Result<Vec<ComplexSpectrum>, DspError> {
    let frames = frame_signal(buf, cfg)?;
    stft_frames(&frames, cfg.n_fft(frames.frame_len()), win)
}

/// STFT of already-cut frames with an explicit transform size.
pub fn stft_frames(
    frames: &Frames,
    n_fft: usize,
    win: WindowSpec,
) -> Result<Vec<ComplexSpectrum>, DspError> {
    let window = make_window(win, frames.frame_len())?;
    let plan = RealDft::new(n_fft)?;
    let mut scratch = alloc::vec![0.0; frames.frame_len()];
    frames
        .iter()
        .map(|frame| {
            for ((s, &x), &w) in scratch.iter_mut().zip(frame).zip(&window) {
                *s = x * w;
            }
            plan.process(&scratch)
        })
        .collect()
}

//! Normalized mono audio and decibel-threshold edge trimming.

use alloc::vec::Vec;

use thiserror::Error;

/// Default trim threshold, in dB below the loudest window.
pub const DEFAULT_TRIM_DB: f64 = 30.0;
/// Default trim analysis window, matching the 20 ms feature frame.
pub const DEFAULT_TRIM_WINDOW_MS: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("sample {index} = {value} lies outside [-1, 1]")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("audio buffer has no samples")]
    EmptyInput,
    #[error("threshold must be positive and finite, got {0}")]
    BadThreshold(f64),
    #[error("window length must be positive and finite, got {0} ms")]
    BadWindow(f64),
}

/// Mono samples in `[-1.0, 1.0]` plus their sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::ZeroSampleRate);
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(-1.0..=1.0).contains(*s))
        {
            return Err(AudioError::SampleOutOfRange { index, value });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a buffer from signed 16-bit PCM, dividing each value by 32768.
    pub fn from_pcm16(pcm: &[i16], sample_rate: u32) -> Result<Self, AudioError> {
        let samples = pcm.iter().map(|&s| f64::from(s) / 32768.0).collect();
        Self::new(samples, sample_rate)
    }

    /// Quantizes back to 16-bit PCM. Exact inverse of [`from_pcm16`](Self::from_pcm16)
    /// for buffers that came from it; +1.0 saturates to `i16::MAX`.
    pub fn to_pcm16(&self) -> Vec<i16> {
        self.samples
            .iter()
            .map(|&s| libm::round(s * 32768.0).clamp(-32768.0, 32767.0) as i16)
            .collect()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Contiguous sub-span `[start, end)` as a new buffer.
    pub fn slice(&self, start: usize, end: usize) -> AudioBuffer {
        AudioBuffer {
            samples: self.samples[start..end].to_vec(),
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimStatus {
    /// At least one window was loud enough to keep.
    Retained,
    /// Every window was silent; the output buffer is empty.
    AllSilent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimReport {
    pub leading_samples_removed: usize,
    pub trailing_samples_removed: usize,
    pub threshold_db: f64,
    pub status: TrimStatus,
}

/// Number of samples in one trim window: `round(window_ms * rate / 1000)`, at least one.
pub fn window_samples(window_ms: f64, sample_rate: u32) -> usize {
    (libm::round(window_ms * f64::from(sample_rate) / 1000.0) as usize).max(1)
}

/// RMS of each consecutive, non-overlapping window. The last window may be short.
pub fn window_rms(samples: &[f64], window: usize) -> Vec<f64> {
    samples
        .chunks(window)
        .map(|w| libm::sqrt(w.iter().map(|s| s * s).sum::<f64>() / w.len() as f64))
        .collect()
}

/// Removes leading and trailing windows whose RMS is more than `threshold_db`
/// below the loudest window. Interior windows are always kept, so the result
/// is a contiguous span of the input.
pub fn trim_silence(
    buf: &AudioBuffer,
    threshold_db: f64,
    window_ms: f64,
) -> Result<(AudioBuffer, TrimReport), AudioError> {
    if !(threshold_db > 0.0 && threshold_db.is_finite()) {
        return Err(AudioError::BadThreshold(threshold_db));
    }
    if !(window_ms > 0.0 && window_ms.is_finite()) {
        return Err(AudioError::BadWindow(window_ms));
    }
    if buf.is_empty() {
        return Err(AudioError::EmptyInput);
    }

    let window = window_samples(window_ms, buf.sample_rate);
    let rms = window_rms(&buf.samples, window);
    let peak = rms.iter().copied().fold(0.0_f64, f64::max);
    // 20 log10(rms / peak) < -threshold  <=>  rms < peak * 10^(-threshold / 20)
    let floor = peak * libm::pow(10.0, -threshold_db / 20.0);
    let loud = |r: &f64| peak > 0.0 && *r >= floor;

    let (first, last) = match (rms.iter().position(loud), rms.iter().rposition(loud)) {
        (Some(first), Some(last)) => (first, last),
        _ => {
            let report = TrimReport {
                leading_samples_removed: buf.len(),
                trailing_samples_removed: 0,
                threshold_db,
                status: TrimStatus::AllSilent,
            };
            return Ok((buf.slice(0, 0), report));
        }
    };

    let start = first * window;
    let end = ((last + 1) * window).min(buf.len());
    let report = TrimReport {
        leading_samples_removed: start,
        trailing_samples_removed: buf.len() - end,
        threshold_db,
        status: TrimStatus::Retained,
    };
    Ok((buf.slice(start, end), report))
}

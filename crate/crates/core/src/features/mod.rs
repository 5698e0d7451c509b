//! Frame-time feature matrices: power and log spectrograms, mel filterbank
//! energies, log mel spectrograms and MFCCs.

mod mel;
mod mfcc;

pub use mel::{build_mel_filterbank, fbank_energies, hz_to_mel, mel_to_hz, MelFilterbank};
pub use mfcc::{dct_log_energies, frame_log_energy, mfcc};

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::dsp::{self, ComplexSpectrum, DspError, FrameConfig, WindowSpec};

/// Floor applied to power values before taking the natural log.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error("frequency must be non-negative, got {0} Hz")]
    NegativeFrequency(f64),
    #[error("mel value must be non-negative, got {0}")]
    NegativeMel(f64),
    #[error("spectra have differing bin counts ({expected} vs {found})")]
    RaggedInput { expected: usize, found: usize },
    #[error("no frames to process")]
    EmptyInput,
    #[error("expected a {expected} matrix, got {found}")]
    WrongKind {
        expected: &'static str,
        found: FeatureKind,
    },
    #[error("invalid band [{f_min}, {f_max}] Hz for Nyquist {nyquist} Hz")]
    BadBand { f_min: f64, f_max: f64, nyquist: f64 },
    #[error("a filterbank needs at least one filter")]
    NoFilters,
    #[error("filter {filter} of {count} covers no FFT bin; use fewer filters or a larger n_fft")]
    TooManyFilters { filter: usize, count: usize },
    #[error("filterbank expects {expected} bins, spectrogram has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot keep {n_ceps} cepstra from {filters} filters")]
    TooManyCeps { n_ceps: usize, filters: usize },
    #[error("log energy requested but frames were not supplied or do not match")]
    MissingFrames,
    #[error("matrix shape {rows}x{cols} does not match {len} values")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("log floor must be positive, got {0}")]
    BadFloor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Spectrogram,
    LogSpectrogram,
    MelSpectrogram,
    LogMelSpectrogram,
    /// Linear triangular filterbank energies.
    Fbank,
    Mfcc,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 6] = [
        FeatureKind::Spectrogram,
        FeatureKind::LogSpectrogram,
        FeatureKind::MelSpectrogram,
        FeatureKind::LogMelSpectrogram,
        FeatureKind::Fbank,
        FeatureKind::Mfcc,
    ];

    /// Kind code stored in feature containers.
    pub fn code(self) -> u8 {
        match self {
            FeatureKind::Spectrogram => 0,
            FeatureKind::LogSpectrogram => 1,
            FeatureKind::MelSpectrogram => 2,
            FeatureKind::LogMelSpectrogram => 3,
            FeatureKind::Fbank => 4,
            FeatureKind::Mfcc => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    /// Short name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Spectrogram => "spectrogram",
            FeatureKind::LogSpectrogram => "logspec",
            FeatureKind::MelSpectrogram => "melspec",
            FeatureKind::LogMelSpectrogram => "logmel",
            FeatureKind::Fbank => "fbank",
            FeatureKind::Mfcc => "mfcc",
        }
    }

    /// Kind produced by [`log_compress`], if this kind can be log-compressed.
    pub fn log_variant(self) -> Option<Self> {
        match self {
            FeatureKind::Spectrogram => Some(FeatureKind::LogSpectrogram),
            FeatureKind::MelSpectrogram | FeatureKind::Fbank => {
                Some(FeatureKind::LogMelSpectrogram)
            }
            _ => None,
        }
    }

    /// Whether entries of this kind are powers/energies and so never negative.
    pub fn is_non_negative(self) -> bool {
        matches!(
            self,
            FeatureKind::Spectrogram | FeatureKind::MelSpectrogram | FeatureKind::Fbank
        )
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

/// Row-major `T x F` matrix, one row per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    kind: FeatureKind,
    pub frame_len_ms: f64,
    pub hop_ms: f64,
    pub sample_rate: u32,
}

impl FeatureMatrix {
    /// Checks the shape and that every entry is finite.
    pub fn new(
        data: Vec<f64>,
        rows: usize,
        cols: usize,
        kind: FeatureKind,
    ) -> Result<Self, FeatureError> {
        if rows * cols != data.len() {
            return Err(FeatureError::BadShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite {
                row: i / cols.max(1),
                col: i % cols.max(1),
            });
        }
        Ok(Self {
            data,
            rows,
            cols,
            kind,
            frame_len_ms: 0.0,
            hop_ms: 0.0,
            sample_rate: 0,
        })
    }

    /// Attaches framing metadata.
    pub fn with_framing(mut self, frame_len_ms: f64, hop_ms: f64, sample_rate: u32) -> Self {
        self.frame_len_ms = frame_len_ms;
        self.hop_ms = hop_ms;
        self.sample_rate = sample_rate;
        self
    }

    fn derive(&self, data: Vec<f64>, cols: usize, kind: FeatureKind) -> Self {
        Self {
            data,
            rows: self.rows,
            cols,
            kind,
            frame_len_ms: self.frame_len_ms,
            hop_ms: self.hop_ms,
            sample_rate: self.sample_rate,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Feature dimension `F`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.cols..(t + 1) * self.cols]
    }

    pub fn get(&self, t: usize, f: usize) -> f64 {
        self.data[t * self.cols + f]
    }
}

/// `|X[t, k]|^2` for every frame and bin.
pub fn power_spectrogram(spectra: &[ComplexSpectrum]) -> Result<FeatureMatrix, FeatureError> {
    let first = spectra.first().ok_or(FeatureError::EmptyInput)?;
    let cols = first.bins().len();
    let mut data = Vec::with_capacity(spectra.len() * cols);
    for s in spectra {
        if s.bins().len() != cols {
            return Err(FeatureError::RaggedInput {
                expected: cols,
                found: s.bins().len(),
            });
        }
        data.extend(s.bins().iter().map(|b| b.re * b.re + b.im * b.im));
    }
    FeatureMatrix::new(data, spectra.len(), cols, FeatureKind::Spectrogram)
}

/// `ln(max(x, floor))` elementwise; the kind moves to its log variant.
pub fn log_compress(m: &FeatureMatrix, floor_eps: f64) -> Result<FeatureMatrix, FeatureError> {
    if floor_eps.is_nan() || floor_eps <= 0.0 {
        return Err(FeatureError::BadFloor(floor_eps));
    }
    let kind = m.kind.log_variant().ok_or(FeatureError::WrongKind {
        expected: "spectrogram, mel spectrogram or fbank",
        found: m.kind,
    })?;
    let data = m.data.iter().map(|&v| libm::log(v.max(floor_eps))).collect();
    Ok(m.derive(data, m.cols, kind))
}

/// Knobs for [`extract`] beyond framing and window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureParams {
    /// Mel filters (`B`) for mel, fbank and MFCC kinds.
    pub n_mels: usize,
    /// Cepstral coefficients kept for MFCC.
    pub n_ceps: usize,
    /// Append a frame log-energy column to MFCC.
    pub append_log_energy: bool,
    pub f_min_hz: f64,
    /// Upper band edge; `None` means Nyquist.
    pub f_max_hz: Option<f64>,
    /// Explicit transform size; `None` follows the frame config.
    pub n_fft: Option<usize>,
    pub log_floor: f64,
}

impl Default for FeatureParams {
    /// 80 filters over `[0, Nyquist]`; MFCC as 13 coefficients plus log energy.
    fn default() -> Self {
        Self {
            n_mels: 80,
            n_ceps: 13,
            append_log_energy: true,
            f_min_hz: 0.0,
            f_max_hz: None,
            n_fft: None,
            log_floor: LOG_FLOOR,
        }
    }
}

impl FeatureParams {
    /// 23 filters, 13 cepstra plus log energy.
    pub fn mfcc_13_with_energy() -> Self {
        Self {
            n_mels: 23,
            n_ceps: 13,
            append_log_energy: true,
            ..Self::default()
        }
    }

    /// 40 filters, 40 cepstra, no energy column.
    pub fn mfcc_40() -> Self {
        Self {
            n_mels: 40,
            n_ceps: 40,
            append_log_energy: false,
            ..Self::default()
        }
    }
}

/// Runs the full chain for `kind`: frame, window, pad, FFT, power, then
/// mel projection, log and DCT as the kind requires.
pub fn extract(
    buf: &AudioBuffer,
    kind: FeatureKind,
    cfg: &FrameConfig,
    win: WindowSpec,
    params: &FeatureParams,
) -> Result<FeatureMatrix, FeatureError> {
    let frames = dsp::frame_signal(buf, cfg)?;
    let n_fft = params.n_fft.unwrap_or_else(|| cfg.n_fft(frames.frame_len()));
    let spectra = dsp::stft_frames(&frames, n_fft, win)?;
    let power = power_spectrogram(&spectra)?.with_framing(
        cfg.frame_len_ms,
        cfg.hop_ms,
        buf.sample_rate(),
    );
    drop(spectra);

    let mel_bank = || {
        let nyquist = f64::from(buf.sample_rate()) / 2.0;
        build_mel_filterbank(
            params.n_mels,
            n_fft,
            buf.sample_rate(),
            params.f_min_hz,
            params.f_max_hz.unwrap_or(nyquist),
        )
    };

    match kind {
        FeatureKind::Spectrogram => Ok(power),
        FeatureKind::LogSpectrogram => log_compress(&power, params.log_floor),
        FeatureKind::Fbank => fbank_energies(&power, &mel_bank()?),
        FeatureKind::MelSpectrogram => {
            let mut m = fbank_energies(&power, &mel_bank()?)?;
            m.kind = FeatureKind::MelSpectrogram;
            Ok(m)
        }
        FeatureKind::LogMelSpectrogram => {
            log_compress(&fbank_energies(&power, &mel_bank()?)?, params.log_floor)
        }
        FeatureKind::Mfcc => {
            let log_mel =
                log_compress(&fbank_energies(&power, &mel_bank()?)?, params.log_floor)?;
            let energy_frames = params.append_log_energy.then_some(&frames);
            mfcc(&log_mel, params.n_ceps, energy_frames)
        }
    }
}

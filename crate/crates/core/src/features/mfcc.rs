use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FeatureError, FeatureKind, FeatureMatrix, LOG_FLOOR};
use crate::dsp::Frames;

/// `C_i = sum_{j=1..B} f_j cos(i pi / B (j - 0.5))` for `i < n_ceps`.
pub fn dct_log_energies(log_energies: &[f64], n_ceps: usize) -> Vec<f64> {
    let b = log_energies.len() as f64;
    (0..n_ceps)
        .map(|i| {
            log_energies
                .iter()
                .enumerate()
                .map(|(j, f)| f * libm::cos(i as f64 * PI / b * (j as f64 + 0.5)))
                .sum()
        })
        .collect()
}

/// `ln(sum s^2 + eps)` over one raw frame.
pub fn frame_log_energy(frame: &[f64]) -> f64 {
    libm::log(frame.iter().map(|s| s * s).sum::<f64>() + LOG_FLOOR)
}

/// Cepstra from a log mel filterbank matrix. When `frames` is given, a final
/// log-energy column is appended, computed from those (unwindowed) frames.
pub fn mfcc(
    log_fbank: &FeatureMatrix,
    n_ceps: usize,
    frames: Option<&Frames>,
) -> Result<FeatureMatrix, FeatureError> {
    if log_fbank.kind() != FeatureKind::LogMelSpectrogram {
        return Err(FeatureError::WrongKind {
            expected: "log mel filterbank",
            found: log_fbank.kind(),
        });
    }
    let filters = log_fbank.cols();
    if n_ceps == 0 || n_ceps > filters {
        return Err(FeatureError::TooManyCeps { n_ceps, filters });
    }
    if frames.is_some_and(|f| f.len() != log_fbank.rows()) {
        return Err(FeatureError::MissingFrames);
    }

    // cos(i pi / B (j + 0.5)) depends only on (i, j): tabulate once.
    let basis: Vec<f64> = (0..n_ceps)
        .flat_map(|i| {
            (0..filters)
                .map(move |j| libm::cos(i as f64 * PI / filters as f64 * (j as f64 + 0.5)))
        })
        .collect();

    let cols = n_ceps + usize::from(frames.is_some());
    let mut data = Vec::with_capacity(log_fbank.rows() * cols);
    for t in 0..log_fbank.rows() {
        let f = log_fbank.row(t);
        for i in 0..n_ceps {
            let row = &basis[i * filters..(i + 1) * filters];
            data.push(row.iter().zip(f).map(|(c, v)| c * v).sum());
        }
        if let Some(frames) = frames {
            data.push(frame_log_energy(frames.frame(t)));
        }
    }
    Ok(log_fbank.derive(data, cols, FeatureKind::Mfcc))
}

use alloc::vec;
use alloc::vec::Vec;

use super::{FeatureError, FeatureKind, FeatureMatrix};

/// `2595 log10(1 + f / 700)`
pub fn hz_to_mel(f: f64) -> Result<f64, FeatureError> {
    if f.is_nan() || f < 0.0 {
        return Err(FeatureError::NegativeFrequency(f));
    }
    Ok(2595.0 * libm::log10(1.0 + f / 700.0))
}

/// `700 (10^(m / 2595) - 1)`
pub fn mel_to_hz(m: f64) -> Result<f64, FeatureError> {
    if m.is_nan() || m < 0.0 {
        return Err(FeatureError::NegativeMel(m));
    }
    Ok(700.0 * (libm::pow(10.0, m / 2595.0) - 1.0))
}

/// Triangular filters equally spaced on the mel scale, evaluated at FFT bins.
///
/// Filter `i` rises linearly from edge `i` to edge `i + 1` (weight 1 there)
/// and falls back to zero at edge `i + 2`. Edges are kept in fractional bin
/// coordinates, so a filter narrower than one bin still sees the bin nearest
/// its apex instead of collapsing.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    weights: Vec<f64>,
    n_filters: usize,
    n_bins: usize,
    edges_mel: Vec<f64>,
    edges_hz: Vec<f64>,
    edges_bin: Vec<f64>,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
}

impl MelFilterbank {
    pub fn n_filters(&self) -> usize {
        self.n_filters
    }

    /// Number of FFT bins, `n_fft / 2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n_bins..(i + 1) * self.n_bins]
    }

    /// `B + 2` edge points on the mel axis.
    pub fn edges_mel(&self) -> &[f64] {
        &self.edges_mel
    }

    /// `B + 2` edge frequencies; entry `i + 1` is the centre of filter `i`.
    pub fn center_freqs_hz(&self) -> &[f64] {
        &self.edges_hz
    }

    /// Edge positions in (fractional) FFT-bin units.
    pub fn edges_bin(&self) -> &[f64] {
        &self.edges_bin
    }
}

pub fn build_mel_filterbank(
    n_filters: usize,
    n_fft: usize,
    sample_rate: u32,
    f_min_hz: f64,
    f_max_hz: f64,
) -> Result<MelFilterbank, FeatureError> {
    let nyquist = f64::from(sample_rate) / 2.0;
    if !(f_min_hz >= 0.0 && f_min_hz < f_max_hz && f_max_hz <= nyquist) {
        return Err(FeatureError::BadBand {
            f_min: f_min_hz,
            f_max: f_max_hz,
            nyquist,
        });
    }
    if n_filters == 0 {
        return Err(FeatureError::NoFilters);
    }
    let n_bins = n_fft / 2 + 1;
    let lo = hz_to_mel(f_min_hz)?;
    let hi = hz_to_mel(f_max_hz)?;
    let step = (hi - lo) / (n_filters + 1) as f64;
    let edges_mel: Vec<f64> = (0..n_filters + 2).map(|i| lo + step * i as f64).collect();
    let edges_hz = edges_mel
        .iter()
        .map(|&m| mel_to_hz(m))
        .collect::<Result<Vec<_>, _>>()?;
    let bin_per_hz = n_fft as f64 / f64::from(sample_rate);
    let edges_bin: Vec<f64> = edges_hz.iter().map(|f| f * bin_per_hz).collect();

    let mut weights = vec![0.0; n_filters * n_bins];
    for i in 0..n_filters {
        let (left, centre, right) = (edges_bin[i], edges_bin[i + 1], edges_bin[i + 2]);
        let row = &mut weights[i * n_bins..(i + 1) * n_bins];
        for (k, w) in row.iter_mut().enumerate() {
            let x = k as f64;
            *w = if x > left && x <= centre {
                (x - left) / (centre - left)
            } else if x > centre && x < right {
                (right - x) / (right - centre)
            } else {
                0.0
            };
        }
        if row.iter().all(|&w| w == 0.0) {
            return Err(FeatureError::TooManyFilters {
                filter: i,
                count: n_filters,
            });
        }
    }

    Ok(MelFilterbank {
        weights,
        n_filters,
        n_bins,
        edges_mel,
        edges_hz,
        edges_bin,
        f_min_hz,
        f_max_hz,
    })
}

/// `fbank[t, i] = sum_k weights[i, k] * spec[t, k]`
pub fn fbank_energies(
    spec: &FeatureMatrix,
    bank: &MelFilterbank,
) -> Result<FeatureMatrix, FeatureError> {
    if spec.kind() != FeatureKind::Spectrogram {
        return Err(FeatureError::WrongKind {
            expected: "spectrogram",
            found: spec.kind(),
        });
    }
    if spec.cols() != bank.n_bins {
        return Err(FeatureError::DimensionMismatch {
            expected: bank.n_bins,
            found: spec.cols(),
        });
    }
    let mut data = Vec::with_capacity(spec.rows() * bank.n_filters);
    for t in 0..spec.rows() {
        let frame = spec.row(t);
        for i in 0..bank.n_filters {
            data.push(bank.row(i).iter().zip(frame).map(|(w, p)| w * p).sum());
        }
    }
    Ok(spec.derive(data, bank.n_filters, FeatureKind::Fbank))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_reference_points() {
        assert_eq!(hz_to_mel(0.0).unwrap(), 0.0);
        assert!((hz_to_mel(700.0).unwrap() - 781.17).abs() < 0.01);
        assert!((hz_to_mel(8000.0).unwrap() - 2840.02).abs() < 0.05);
        assert_eq!(mel_to_hz(0.0).unwrap(), 0.0);
        assert!((mel_to_hz(781.17).unwrap() - 700.0).abs() < 0.1);
        let back = mel_to_hz(hz_to_mel(1234.5).unwrap()).unwrap();
        assert!((back - 1234.5).abs() / 1234.5 < 1e-6);
    }

    #[test]
    fn negative_inputs_rejected() {
        assert_eq!(hz_to_mel(-1.0), Err(FeatureError::NegativeFrequency(-1.0)));
        assert_eq!(mel_to_hz(-1.0), Err(FeatureError::NegativeMel(-1.0)));
    }

    #[test]
    fn single_filter_peaks_at_mel_midpoint() {
        let bank = build_mel_filterbank(1, 512, 16000, 0.0, 8000.0).unwrap();
        let mid_hz = mel_to_hz(hz_to_mel(8000.0).unwrap() / 2.0).unwrap();
        assert!((bank.center_freqs_hz()[1] - mid_hz).abs() < 1e-9);
        let row = bank.row(0);
        let argmax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert!((argmax as f64 - mid_hz * 512.0 / 16000.0).abs() <= 1.0);
    }

    #[test]
    fn twenty_three_filters_equal_mel_spacing() {
        let bank = build_mel_filterbank(23, 512, 16000, 0.0, 8000.0).unwrap();
        assert_eq!(bank.n_filters(), 23);
        let e = bank.edges_mel();
        let step = e[1] - e[0];
        for w in e.windows(2) {
            assert!(((w[1] - w[0]) - step).abs() < 1e-9);
        }
        // adjacent rows overlap
        for i in 0..22 {
            let overlap = bank
                .row(i)
                .iter()
                .zip(bank.row(i + 1))
                .any(|(a, b)| *a > 0.0 && *b > 0.0);
            assert!(overlap, "rows {i} and {}", i + 1);
        }
    }

    #[test]
    fn eighty_filters_cover_every_inner_bin() {
        let bank = build_mel_filterbank(80, 512, 16000, 0.0, 8000.0).unwrap();
        let e = bank.edges_bin();
        let (first, last) = (e[0], e[81]);
        for k in 0..bank.n_bins() {
            let x = k as f64;
            if x > first && x < last {
                assert!((0..80).any(|i| bank.row(i)[k] > 0.0), "bin {k} uncovered");
            }
        }
    }

    #[test]
    fn rows_are_triangles() {
        let bank = build_mel_filterbank(40, 512, 16000, 0.0, 8000.0).unwrap();
        let mut prev_argmax = 0;
        for i in 0..bank.n_filters() {
            let row = bank.row(i);
            assert!(row.iter().all(|&w| (0.0..=1.0).contains(&w)));
            let nz: Vec<usize> = (0..row.len()).filter(|&k| row[k] > 0.0).collect();
            assert_eq!(nz.last().unwrap() - nz[0] + 1, nz.len(), "contiguous support");
            let argmax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert!((argmax as f64 - bank.edges_bin()[i + 1]).abs() < 1.0);
            assert!(argmax >= prev_argmax);
            prev_argmax = argmax;
            // unimodal: non-decreasing up to argmax, non-increasing after
            assert!(row[..=argmax].windows(2).all(|w| w[0] <= w[1]));
            assert!(row[argmax..].windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn bad_band_and_collapse() {
        assert!(matches!(
            build_mel_filterbank(10, 512, 16000, 100.0, 100.0),
            Err(FeatureError::BadBand { .. })
        ));
        assert!(matches!(
            build_mel_filterbank(10, 512, 16000, 0.0, 9000.0),
            Err(FeatureError::BadBand { .. })
        ));
        assert!(matches!(
            build_mel_filterbank(200, 64, 16000, 0.0, 8000.0),
            Err(FeatureError::TooManyFilters { .. })
        ));
    }

    #[test]
    fn ones_spectrogram_gives_row_sums() {
        let bank = build_mel_filterbank(23, 512, 16000, 0.0, 8000.0).unwrap();
        let spec = FeatureMatrix::new(vec![1.0; 2 * 257], 2, 257, FeatureKind::Spectrogram).unwrap();
        let fb = fbank_energies(&spec, &bank).unwrap();
        for t in 0..2 {
            for i in 0..23 {
                let sum: f64 = bank.row(i).iter().sum();
                assert!((fb.get(t, i) - sum).abs() < 1e-12);
            }
        }
        let wrong = FeatureMatrix::new(vec![1.0; 10], 1, 10, FeatureKind::Spectrogram).unwrap();
        assert_eq!(
            fbank_energies(&wrong, &bank),
            Err(FeatureError::DimensionMismatch { expected: 257, found: 10 })
        );
    }
}

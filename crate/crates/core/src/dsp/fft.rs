//! Real-input discrete Fourier transforms.
//!
//! Power-of-two sizes use an iterative radix-2 Cooley-Tukey transform.
//! Other sizes go through Bluestein's chirp-z algorithm on top of a
//! power-of-two transform, so `n_fft = 320` (a 20 ms frame at 16 kHz
//! without padding) works as well as 512.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{ComplexSpectrum, DspError};

/// Precomputed radix-2 transform of size `n` (a power of two).
#[derive(Debug, Clone)]
pub struct Radix2 {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    pub fn new(n: usize) -> Result<Self, DspError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(DspError::NotPowerOfTwo(n));
        }
        // exp(-2 pi i k / n) for k < n/2
        let twiddles = (0..n / 2)
            .map(|k| {
                let (s, c) = libm::sincos(-2.0 * PI * k as f64 / n as f64);
                Complex64::new(c, s)
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self {
            n,
            twiddles,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform.
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        for i in 0..self.n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.n {
            let half = size / 2;
            let step = self.n / size;
            for start in (0..self.n).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }

    /// In-place inverse transform, scaled by `1/n`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    inner: Radix2,
    /// exp(-i pi k^2 / n)
    chirp: Vec<Complex64>,
    /// Transform of the conjugate chirp, wrapped for circular convolution.
    kernel: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m).expect("power of two");
        // k^2 mod 2n keeps the angle argument small and exact.
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n as u128)) as f64;
                let (s, c) = libm::sincos(-PI * k2 / n as f64);
                Complex64::new(c, s)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        Self {
            n,
            inner,
            chirp,
            kernel,
        }
    }

    fn forward(&self, input: &[Complex64]) -> Vec<Complex64> {
        let m = self.inner.len();
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        for (k, x) in input.iter().enumerate() {
            a[k] = x * self.chirp[k];
        }
        self.inner.forward(&mut a);
        for (v, h) in a.iter_mut().zip(&self.kernel) {
            *v *= h;
        }
        self.inner.inverse(&mut a);
        (0..self.n).map(|k| a[k] * self.chirp[k]).collect()
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// Real-input DFT of a fixed size, reusable across frames.
#[derive(Debug, Clone)]
pub struct RealDft {
    n: usize,
    kernel: Kernel,
}

impl RealDft {
    /// Plans a transform of any size `n >= 1`.
    pub fn new(n: usize) -> Result<Self, DspError> {
        if n == 0 {
            return Err(DspError::DegenerateLength(0));
        }
        let kernel = if n.is_power_of_two() {
            Kernel::Radix2(Radix2::new(n)?)
        } else {
            Kernel::Bluestein(Bluestein::new(n))
        };
        Ok(Self { n, kernel })
    }

    pub fn n_fft(&self) -> usize {
        self.n
    }

    /// Transforms `frame` zero-padded to `n_fft` and keeps bins `0..=n_fft/2`.
    pub fn process(&self, frame: &[f64]) -> Result<ComplexSpectrum, DspError> {
        if frame.len() > self.n {
            return Err(DspError::FrameTooLong {
                frame: frame.len(),
                n_fft: self.n,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (b, &x) in buf.iter_mut().zip(frame) {
            b.re = x;
        }
        let full = match &self.kernel {
            Kernel::Radix2(r) => {
                r.forward(&mut buf);
                buf
            }
            Kernel::Bluestein(b) => b.forward(&buf),
        };
        let bins = full.into_iter().take(self.n / 2 + 1).collect();
        Ok(ComplexSpectrum::new(bins, self.n))
    }
}

/// One-shot transform of a real frame; `n_fft` must be a power of two.
pub fn fft_real(frame: &[f64], n_fft: usize) -> Result<ComplexSpectrum, DspError> {
    Radix2::new(n_fft)?;
    RealDft::new(n_fft)?.process(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(frame: &[f64], n: usize) -> Vec<Complex64> {
        (0..=n / 2)
            .map(|k| {
                frame.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (t, &x)| {
                    let ang = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    acc + Complex64::new(x * libm::cos(ang), x * libm::sin(ang))
                })
            })
            .collect()
    }

    fn pseudo(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let spec = fft_real(&x, 8).unwrap();
        assert!(spec.bins().iter().all(|b| *b == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn non_power_of_two_rejected_by_fft_real() {
        assert_eq!(fft_real(&[0.0; 4], 6).unwrap_err(), DspError::NotPowerOfTwo(6));
    }

    #[test]
    fn bluestein_matches_naive() {
        for &n in &[3usize, 5, 6, 12, 100, 320, 400] {
            let x = pseudo(n, n as u64);
            let got = RealDft::new(n).unwrap().process(&x).unwrap();
            for (a, b) in got.bins().iter().zip(naive(&x, n)) {
                assert!((a - b).norm() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn short_frame_is_zero_padded() {
        let x = pseudo(5, 9);
        let got = fft_real(&x, 16).unwrap();
        for (a, b) in got.bins().iter().zip(naive(&x, 16)) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(matches!(
            fft_real(&pseudo(17, 1), 16),
            Err(DspError::FrameTooLong { .. })
        ));
    }

    #[test]
    fn inverse_round_trips() {
        let plan = Radix2::new(64).unwrap();
        let orig: Vec<Complex64> = pseudo(128, 3)
            .chunks(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        let mut buf = orig.clone();
        plan.forward(&mut buf);
        plan.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

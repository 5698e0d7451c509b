//! KSFM feature container.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field        |
//! |--------|------|--------------|
//! | 0      | 4    | magic `KSFM` |
//! | 4      | 2    | version (1)  |
//! | 6      | 1    | kind code    |
//! | 7      | 1    | reserved (0) |
//! | 8      | 4    | rows         |
//! | 12     | 4    | cols         |
//! | 16     | 4    | sample rate  |
//! | 20     | 4    | frame ms f32 |
//! | 24     | 4    | hop ms f32   |
//! | 28     | ..   | rows*cols f32, row-major |

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ksr_core::features::FeatureError;
use ksr_core::{FeatureKind, FeatureMatrix};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"KSFM";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Error)]
pub enum KsfmError {
    #[error("not a KSFM file (bad magic)")]
    BadMagic,
    #[error("unsupported KSFM version {0}")]
    BadVersion(u16),
    #[error("unknown feature kind code {0}")]
    BadKind(u8),
    #[error("file is {found} bytes but the header implies {expected}")]
    LengthMismatch { expected: u64, found: u64 },
    #[error("payload contains a non-finite value")]
    NonFinite,
    #[error("matrix too large for the container")]
    TooLarge,
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Header fields as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsfmHeader {
    pub kind: FeatureKind,
    pub rows: u32,
    pub cols: u32,
    pub sample_rate: u32,
    pub frame_len_ms: f32,
    pub hop_ms: f32,
}

impl KsfmHeader {
    pub fn payload_len(&self) -> u64 {
        u64::from(self.rows) * u64::from(self.cols) * 4
    }
}

pub fn encode(m: &FeatureMatrix) -> Result<Vec<u8>, KsfmError> {
    let rows = u32::try_from(m.rows()).map_err(|_| KsfmError::TooLarge)?;
    let cols = u32::try_from(m.cols()).map_err(|_| KsfmError::TooLarge)?;
    let mut out = Vec::with_capacity(HEADER_LEN + m.data().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(m.kind().code());
    out.push(0);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&m.sample_rate.to_le_bytes());
    out.extend_from_slice(&(m.frame_len_ms as f32).to_le_bytes());
    out.extend_from_slice(&(m.hop_ms as f32).to_le_bytes());
    for &v in m.data() {
        let v = v as f32;
        if !v.is_finite() {
            return Err(KsfmError::NonFinite);
        }
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f32_at(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

pub fn decode_header(bytes: &[u8]) -> Result<KsfmHeader, KsfmError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(KsfmError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(KsfmError::LengthMismatch {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(KsfmError::BadVersion(version));
    }
    let kind = FeatureKind::from_code(bytes[6]).ok_or(KsfmError::BadKind(bytes[6]))?;
    Ok(KsfmHeader {
        kind,
        rows: u32_at(bytes, 8),
        cols: u32_at(bytes, 12),
        sample_rate: u32_at(bytes, 16),
        frame_len_ms: f32_at(bytes, 20),
        hop_ms: f32_at(bytes, 24),
    })
}

/// Parses a whole container. The byte length must match the header exactly.
pub fn decode(bytes: &[u8]) -> Result<FeatureMatrix, KsfmError> {
    let h = decode_header(bytes)?;
    let expected = HEADER_LEN as u64 + h.payload_len();
    if bytes.len() as u64 != expected {
        return Err(KsfmError::LengthMismatch {
            expected,
            found: bytes.len() as u64,
        });
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(KsfmError::NonFinite);
    }
    let m = FeatureMatrix::new(data, h.rows as usize, h.cols as usize, h.kind)?;
    Ok(m.with_framing(f64::from(h.frame_len_ms), f64::from(h.hop_ms), h.sample_rate))
}

pub fn read(path: &Path) -> Result<FeatureMatrix, KsfmError> {
    let bytes = fs::read(path).map_err(|source| KsfmError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}

pub fn write(path: &Path, m: &FeatureMatrix) -> Result<(), KsfmError> {
    fs::write(path, encode(m)?).map_err(|source| KsfmError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        FeatureMatrix::new(vec![0.5, -1.25, 3.0, 1e-3, 7.0, 0.0], 2, 3, FeatureKind::LogMelSpectrogram)
            .unwrap()
            .with_framing(20.0, 10.0, 16000)
    }

    #[test]
    fn header_layout() {
        let b = encode(&sample()).unwrap();
        assert_eq!(b.len(), HEADER_LEN + 6 * 4);
        assert_eq!(&b[..4], b"KSFM");
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(b[6], FeatureKind::LogMelSpectrogram.code());
        assert_eq!(b[7], 0);
        assert_eq!(u32_at(&b, 8), 2);
        assert_eq!(u32_at(&b, 12), 3);
        assert_eq!(u32_at(&b, 16), 16000);
        assert_eq!(f32_at(&b, 20), 20.0);
        assert_eq!(f32_at(&b, 24), 10.0);
        assert_eq!(f32_at(&b, 28), 0.5);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let b = encode(&sample()).unwrap();
        let m = decode(&b).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.kind(), FeatureKind::LogMelSpectrogram);
        assert_eq!(m.sample_rate, 16000);
        assert_eq!(encode(&m).unwrap(), b);
    }

    #[test]
    fn length_mismatch_rejected() {
        let b = encode(&sample()).unwrap();
        assert!(matches!(
            decode(&b[..b.len() - 1]),
            Err(KsfmError::LengthMismatch { expected: 52, found: 51 })
        ));
        let mut long = b.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(KsfmError::LengthMismatch { .. })));
        assert!(matches!(decode(&b[..10]), Err(KsfmError::LengthMismatch { .. })));
    }

    #[test]
    fn bad_magic_version_kind() {
        let b = encode(&sample()).unwrap();
        let mut m = b.clone();
        m[0] = b'X';
        assert!(matches!(decode(&m), Err(KsfmError::BadMagic)));
        let mut v = b.clone();
        v[4] = 2;
        assert!(matches!(decode(&v), Err(KsfmError::BadVersion(2))));
        let mut k = b;
        k[6] = 9;
        assert!(matches!(decode(&k), Err(KsfmError::BadKind(9))));
    }

    #[test]
    fn empty_matrix() {
        let m = FeatureMatrix::new(vec![], 0, 80, FeatureKind::Fbank).unwrap();
        let b = encode(&m).unwrap();
        assert_eq!(b.len(), HEADER_LEN);
        assert_eq!(decode(&b).unwrap().cols(), 80);
    }
}

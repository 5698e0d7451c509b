//! Mono 16-bit PCM audio: RIFF/WAVE files and headerless little-endian streams.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ksr_core::audio::AudioError;
use ksr_core::AudioBuffer;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("audio file not found: {0}")]
    MissingFile(PathBuf),
    #[error("malformed wav header: {0}")]
    MalformedHeader(&'static str),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("raw PCM input needs a sample rate (--rate)")]
    MissingRate,
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AudioFormat {
    #[default]
    Wav,
    Raw,
}

impl FromStr for AudioFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wav" => Ok(AudioFormat::Wav),
            "raw" => Ok(AudioFormat::Raw),
            _ => Err(format!("unknown audio format {s:?} (expected wav or raw)")),
        }
    }
}

impl AudioFormat {
    pub fn name(self) -> &'static str {
        match self {
            AudioFormat::Wav => "wav",
            AudioFormat::Raw => "raw",
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, WavError> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => WavError::MissingFile(path.to_path_buf()),
        _ => WavError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })
}

/// Loads a file. For [`AudioFormat::Raw`] the rate hint is mandatory; for
/// wav files it is ignored in favour of the header.
pub fn load_audio(path: &Path, format: AudioFormat, rate_hint: Option<u32>) -> Result<AudioBuffer, WavError> {
    let bytes = read_file(path)?;
    match format {
        AudioFormat::Wav => parse_wav(&bytes),
        AudioFormat::Raw => parse_raw(&bytes, rate_hint.ok_or(WavError::MissingRate)?),
    }
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn pcm_from_le(bytes: &[u8]) -> Vec<i16> {
    bytes.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect()
}

pub fn parse_raw(bytes: &[u8], sample_rate: u32) -> Result<AudioBuffer, WavError> {
    if !bytes.len().is_multiple_of(2) {
        return Err(WavError::UnsupportedFormat(
            "raw PCM16 stream has an odd byte count".into(),
        ));
    }
    Ok(AudioBuffer::from_pcm16(&pcm_from_le(bytes), sample_rate)?)
}

/// Walks the RIFF chunks; needs a `fmt ` chunk (PCM, mono, 16-bit) before `data`.
pub fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::MalformedHeader("missing RIFF/WAVE signature"));
    }
    let mut pos = 12;
    let mut rate = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = le_u32(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or(WavError::MalformedHeader("chunk runs past end of file"))?;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(WavError::MalformedHeader("fmt chunk shorter than 16 bytes"));
                }
                let format = le_u16(bytes, body);
                let channels = le_u16(bytes, body + 2);
                let sample_rate = le_u32(bytes, body + 4);
                let bits = le_u16(bytes, body + 14);
                if format != 1 {
                    return Err(WavError::UnsupportedFormat(format!("format code {format} is not PCM")));
                }
                if channels != 1 {
                    return Err(WavError::UnsupportedFormat(format!("{channels} channels (mono only)")));
                }
                if bits != 16 {
                    return Err(WavError::UnsupportedFormat(format!("{bits}-bit samples (16-bit only)")));
                }
                if sample_rate == 0 {
                    return Err(WavError::MalformedHeader("sample rate is zero"));
                }
                rate = Some(sample_rate);
            }
            b"data" => {
                let rate = rate.ok_or(WavError::MalformedHeader("data chunk before fmt chunk"))?;
                if !size.is_multiple_of(2) {
                    return Err(WavError::MalformedHeader("data chunk has an odd byte count"));
                }
                return Ok(AudioBuffer::from_pcm16(&pcm_from_le(&bytes[body..end]), rate)?);
            }
            _ => {}
        }
        // chunks are word aligned
        pos = end + (size & 1);
    }
    Err(WavError::MalformedHeader("no data chunk"))
}

/// 44-byte canonical header followed by the samples.
pub fn encode_wav(buf: &AudioBuffer) -> Vec<u8> {
    let pcm = buf.to_pcm16();
    let data_len = (pcm.len() * 2) as u32;
    let rate = buf.sample_rate();
    let mut out = Vec::with_capacity(44 + pcm.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in pcm {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn write_wav(path: &Path, buf: &AudioBuffer) -> io::Result<()> {
    fs::write(path, encode_wav(buf))
}

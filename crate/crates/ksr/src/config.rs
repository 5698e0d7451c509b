//! Pipeline settings as a flat `key = value` document.
//!
//! Layers are applied in order: built-in defaults, the selected profile, the
//! config file, then command-line flags. Keys are the long flag names.

use std::path::PathBuf;
use std::str::FromStr;

use ksr_core::audio::{DEFAULT_TRIM_DB, DEFAULT_TRIM_WINDOW_MS};
use ksr_core::augment::AugmentPolicy;
use ksr_core::dsp::{FrameConfig, WindowSpec};
use ksr_core::features::FeatureParams;
use ksr_core::text::{CleanupRules, Transcription, Unit, DEFAULT_MAX_LEN};
use ksr_core::FeatureKind;
use thiserror::Error;

use crate::wav::AudioFormat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{source_name}:{line}: expected `key = value`")]
    BadLine { source_name: String, line: usize },
    #[error("{source_name}:{line}: unknown key {key:?}")]
    UnknownKey {
        source_name: String,
        line: usize,
        key: String,
    },
    #[error("invalid value {value:?} for {key}: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    PaperBaseline,
    Custom,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper-baseline" => Ok(Profile::PaperBaseline),
            "custom" => Ok(Profile::Custom),
            _ => Err("expected paper-baseline or custom".into()),
        }
    }
}

impl Profile {
    /// Settings the profile pins, as `(key, value)` pairs.
    pub fn overrides(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Profile::PaperBaseline => &[
                ("feature", "fbank"),
                ("n-mels", "80"),
                ("frame-ms", "20"),
                ("hop-ms", "10"),
                ("freq-mask-F", "20"),
                ("n-freq-masks", "1"),
                ("n-time-masks", "10"),
                ("ps", "0.05"),
            ],
            Profile::Custom => &[],
        }
    }
}

/// Every settable key with its default, in help order.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "42"),
    ("format", "wav"),
    ("rate", ""),
    ("trim-db", "30"),
    ("trim-window-ms", "20"),
    ("frame-ms", "20"),
    ("hop-ms", "10"),
    ("window", "hamming-paper"),
    ("pad-pow2", "true"),
    ("feature", "logmel"),
    ("n-mels", "80"),
    ("n-ceps", "13"),
    ("n-fft", ""),
    ("append-energy", "true"),
    ("spec-augment", "false"),
    ("freq-mask-F", "20"),
    ("n-freq-masks", "1"),
    ("time-mask-T", "100"),
    ("n-time-masks", "10"),
    ("ps", "0.05"),
    ("mask-value", "0"),
    ("unit", "char"),
    ("transcription", "spelling"),
    ("max-len", "100"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub format: AudioFormat,
    pub rate: Option<u32>,
    pub trim_db: f64,
    pub trim_window_ms: f64,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub window: WindowSpec,
    pub pad_pow2: bool,
    pub feature: FeatureKind,
    pub n_mels: usize,
    pub n_ceps: usize,
    pub n_fft: Option<usize>,
    pub append_energy: bool,
    pub spec_augment: bool,
    pub freq_mask_f: usize,
    pub n_freq_masks: usize,
    pub time_mask_t: usize,
    pub n_time_masks: usize,
    pub ps: f64,
    pub mask_value: f64,
    pub unit: Unit,
    pub transcription: Transcription,
    pub max_len: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 42,
            format: AudioFormat::Wav,
            rate: None,
            trim_db: DEFAULT_TRIM_DB,
            trim_window_ms: DEFAULT_TRIM_WINDOW_MS,
            frame_ms: 20.0,
            hop_ms: 10.0,
            window: WindowSpec::HAMMING_PAPER,
            pad_pow2: true,
            feature: FeatureKind::LogMelSpectrogram,
            n_mels: 80,
            n_ceps: 13,
            n_fft: None,
            append_energy: true,
            spec_augment: false,
            freq_mask_f: 20,
            n_freq_masks: 1,
            time_mask_t: 100,
            n_time_masks: 10,
            ps: 0.05,
            mask_value: 0.0,
            unit: Unit::Character,
            transcription: Transcription::Spelling,
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn bad(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse_num(key, value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, value, "must be a positive number"))
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

pub fn parse_window(value: &str) -> Result<WindowSpec, String> {
    match value {
        "hamming-paper" => Ok(WindowSpec::HAMMING_PAPER),
        "hamming-standard" => Ok(WindowSpec::HAMMING_STANDARD),
        "rectangular" => Ok(WindowSpec::Rectangular),
        _ => Err("expected hamming-paper, hamming-standard or rectangular".into()),
    }
}

impl Settings {
    pub fn is_key(key: &str) -> bool {
        KEYS.iter().any(|(k, _)| *k == key)
    }

    /// Sets one key. An empty value clears optional keys.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "seed" => self.seed = parse_num(key, value)?,
            "format" => self.format = value.parse().map_err(|e: String| bad(key, value, &e))?,
            "rate" => {
                self.rate = match value {
                    "" => None,
                    _ => match parse_num::<u32>(key, value)? {
                        0 => return Err(bad(key, value, "must be positive")),
                        r => Some(r),
                    },
                }
            }
            "trim-db" => self.trim_db = positive(key, value)?,
            "trim-window-ms" => self.trim_window_ms = positive(key, value)?,
            "frame-ms" => self.frame_ms = positive(key, value)?,
            "hop-ms" => self.hop_ms = positive(key, value)?,
            "window" => self.window = parse_window(value).map_err(|e| bad(key, value, &e))?,
            "pad-pow2" => self.pad_pow2 = parse_bool(key, value)?,
            "feature" => {
                self.feature = value.parse().map_err(|()| {
                    bad(key, value, "expected spectrogram, logspec, melspec, logmel, fbank or mfcc")
                })?
            }
            "n-mels" => self.n_mels = parse_num(key, value)?,
            "n-ceps" => self.n_ceps = parse_num(key, value)?,
            "n-fft" => {
                self.n_fft = match value {
                    "" => None,
                    _ => Some(parse_num(key, value)?),
                }
            }
            "append-energy" => self.append_energy = parse_bool(key, value)?,
            "spec-augment" => self.spec_augment = parse_bool(key, value)?,
            "freq-mask-F" => self.freq_mask_f = parse_num(key, value)?,
            "n-freq-masks" => self.n_freq_masks = parse_num(key, value)?,
            "time-mask-T" => self.time_mask_t = parse_num(key, value)?,
            "n-time-masks" => self.n_time_masks = parse_num(key, value)?,
            "ps" => {
                let v: f64 = parse_num(key, value)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(bad(key, value, "must lie in [0, 1]"));
                }
                self.ps = v;
            }
            "mask-value" => {
                let v: f64 = parse_num(key, value)?;
                if !v.is_finite() {
                    return Err(bad(key, value, "must be finite"));
                }
                self.mask_value = v;
            }
            "unit" => self.unit = value.parse().map_err(|e: String| bad(key, value, &e))?,
            "transcription" => {
                self.transcription = match value {
                    "spelling" => Transcription::Spelling,
                    "phonetic" => Transcription::Phonetic,
                    _ => return Err(bad(key, value, "expected spelling or phonetic")),
                }
            }
            "max-len" => self.max_len = parse_num(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    source_name: "settings".into(),
                    line: 0,
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    pub fn frame_config(&self) -> FrameConfig {
        FrameConfig::new(self.frame_ms, self.hop_ms, self.pad_pow2)
    }

    pub fn feature_params(&self) -> FeatureParams {
        FeatureParams {
            n_mels: self.n_mels,
            n_ceps: self.n_ceps,
            append_log_energy: self.append_energy,
            n_fft: self.n_fft,
            ..FeatureParams::default()
        }
    }

    pub fn augment_policy(&self, seed: u64) -> AugmentPolicy {
        AugmentPolicy {
            freq_mask_param: self.freq_mask_f,
            n_freq_masks: self.n_freq_masks,
            time_mask_param: self.time_mask_t,
            n_time_masks: self.n_time_masks,
            max_time_ratio: self.ps,
            mask_value: self.mask_value,
            seed,
        }
    }

    pub fn cleanup_rules(&self) -> CleanupRules {
        CleanupRules {
            transcription: self.transcription,
            ..CleanupRules::default()
        }
    }
}

/// A parsed config file: the optional profile line plus ordered assignments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    pub profile: Option<Profile>,
    pub entries: Vec<(String, String)>,
}

pub fn parse_config(text: &str, source_name: &str) -> Result<ConfigFile, ConfigError> {
    let mut out = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or_default().trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::BadLine {
            source_name: source_name.into(),
            line,
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key == "profile" {
            out.profile = Some(value.parse().map_err(|e: String| bad(key, value, &e))?);
        } else if Settings::is_key(key) {
            out.entries.push((key.into(), value.into()));
        } else {
            return Err(ConfigError::UnknownKey {
                source_name: source_name.into(),
                line,
                key: key.into(),
            });
        }
    }
    Ok(out)
}

/// Resolves the layers. `cli` holds only the flags actually given.
pub fn resolve(
    file: Option<&ConfigFile>,
    cli_profile: Option<Profile>,
    cli: &[(&str, String)],
) -> Result<Settings, ConfigError> {
    let profile = cli_profile
        .or_else(|| file.and_then(|f| f.profile))
        .unwrap_or_default();
    let mut s = Settings::default();
    for (k, v) in profile.overrides() {
        s.apply(k, v)?;
    }
    if let Some(f) = file {
        for (k, v) in &f.entries {
            s.apply(k, v)?;
        }
    }
    for (k, v) in cli {
        s.apply(k, v)?;
    }
    Ok(s)
}

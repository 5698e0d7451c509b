//! Speech-recognition frontend and decoding kernels.
//!
//! Everything in this crate is pure computation over in-memory buffers and
//! builds without `std` (an allocator is required). File formats, audio
//! loading and the batch command line live in the `ksr` crate.
//!
//! Module map:
//!
//! * [`audio`] - normalized sample buffers and edge silence trimming
//! * [`dsp`] - framing, windows, FFT and STFT
//! * [`features`] - power/log spectrograms, mel filterbanks, MFCC
//! * [`augment`] - frequency and time masking with seeded randomness
//! * [`text`] - transcript cleanup, jamo decomposition, vocabularies, length statistics
//! * [`attention`] - dot, additive, location-aware and multi-head attention; CNN extractor geometry
//! * [`decode`] - greedy and beam search over a posterior source
//! * [`schedules`] - teacher forcing, label smoothing, warmup/plateau learning rate
//! * [`metrics`] - Levenshtein distance and character error rate

#![no_std]

extern crate alloc;

pub mod attention;
pub mod audio;
pub mod augment;
pub mod decode;
pub mod dsp;
pub mod features;
pub mod metrics;
pub mod schedules;
pub mod text;

pub use audio::AudioBuffer;
pub use features::{FeatureKind, FeatureMatrix};

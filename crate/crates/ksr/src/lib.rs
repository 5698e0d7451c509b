//! File formats, configuration and the `ksr` command-line pipeline built on
//! [`ksr_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod fmt;
pub mod ksfm;
pub mod manifest;
pub mod mockfile;
pub mod selftest;
pub mod wav;

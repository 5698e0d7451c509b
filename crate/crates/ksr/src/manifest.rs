//! Tab-separated manifests: `utt_id<TAB>path[<TAB>transcript]`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("line {line}: expected `utt_id<TAB>path[<TAB>transcript]`")]
    BadLine { line: usize },
    #[error("line {line}: empty utterance id")]
    EmptyId { line: usize },
    #[error("line {line}: duplicate utterance id {id:?}")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub utt_id: String,
    pub path: PathBuf,
    pub transcript: Option<String>,
}

/// Parses manifest text. Blank lines are skipped; relative paths are
/// resolved against `base` when given.
pub fn parse(text: &str, base: Option<&Path>) -> Result<Vec<Entry>, ManifestError> {
    let mut out: Vec<Entry> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = raw.splitn(3, '\t');
        let id = fields.next().unwrap_or_default();
        let path = fields.next().ok_or(ManifestError::BadLine { line })?;
        let transcript = fields.next().map(str::to_owned);
        if id.is_empty() {
            return Err(ManifestError::EmptyId { line });
        }
        if path.is_empty() {
            return Err(ManifestError::BadLine { line });
        }
        if !seen.insert(id.to_owned()) {
            return Err(ManifestError::DuplicateId {
                line,
                id: id.to_owned(),
            });
        }
        let path = PathBuf::from(path);
        let path = match base {
            Some(b) if path.is_relative() => b.join(path),
            _ => path,
        };
        out.push(Entry {
            utt_id: id.to_owned(),
            path,
            transcript,
        });
    }
    Ok(out)
}

pub fn render(entries: &[Entry]) -> String {
    let mut s = String::new();
    for e in entries {
        let _ = write!(s, "{}\t{}", e.utt_id, e.path.display());
        if let Some(t) = &e.transcript {
            let _ = write!(s, "\t{t}");
        }
        s.push('\n');
    }
    s
}

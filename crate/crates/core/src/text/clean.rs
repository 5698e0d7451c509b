//! Transcript cleanup for the KsponSpeech/ETRI annotation conventions.
//!
//! Recognised markup:
//! - `(A)/(B)` dual transcription: A is the spelling form, B the phonetic form
//! - `b/ l/ o/ n/ u/` noise markers at the start of a word
//! - `+`, `*` and any remaining `/`

use alloc::string::String;
use alloc::vec::Vec;

use super::TextError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transcription {
    #[default]
    Spelling,
    Phonetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleanupRules {
    pub transcription: Transcription,
    pub strip_noise_markers: bool,
    pub strip_special_chars: bool,
    pub collapse_whitespace: bool,
}

impl Default for CleanupRules {
    fn default() -> Self {
        Self {
            transcription: Transcription::Spelling,
            strip_noise_markers: true,
            strip_special_chars: true,
            collapse_whitespace: true,
        }
    }
}

const NOISE_LETTERS: [char; 5] = ['b', 'l', 'o', 'n', 'u'];
const SPECIAL_CHARS: [char; 3] = ['+', '*', '/'];

pub fn clean_transcript(raw: &str, rules: &CleanupRules) -> Result<String, TextError> {
    let chars: Vec<char> = raw.chars().collect();
    let mut s = resolve_dual(&chars, rules.transcription)?;
    if rules.strip_noise_markers {
        s = strip_markers(&s);
    }
    if rules.strip_special_chars {
        s.retain(|c| !SPECIAL_CHARS.contains(&c));
    }
    if rules.collapse_whitespace {
        let mut out = String::with_capacity(s.len());
        for word in s.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(word);
        }
        s = out;
    }
    Ok(s)
}

/// Index of the `)` closing the group opened at `open`. Nested `(` is an error.
fn close_of(chars: &[char], open: usize) -> Result<usize, TextError> {
    for (i, &c) in chars.iter().enumerate().skip(open + 1) {
        match c {
            ')' => return Ok(i),
            '(' => return Err(TextError::UnbalancedParens { position: i }),
            _ => {}
        }
    }
    Err(TextError::UnbalancedParens { position: open })
}

fn resolve_dual(chars: &[char], choice: Transcription) -> Result<String, TextError> {
    let mut out = String::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '(' => {
                let a_end = close_of(chars, i)?;
                if chars.get(a_end + 1) != Some(&'/') || chars.get(a_end + 2) != Some(&'(') {
                    return Err(TextError::UnbalancedParens { position: i });
                }
                let b_start = a_end + 2;
                let b_end = close_of(chars, b_start)?;
                let pick = match choice {
                    Transcription::Spelling => &chars[i + 1..a_end],
                    Transcription::Phonetic => &chars[b_start + 1..b_end],
                };
                out.extend(pick);
                i = b_end + 1;
            }
            ')' => return Err(TextError::UnbalancedParens { position: i }),
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Drops `x/` where x is a noise letter starting a word.
fn strip_markers(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < chars.len() {
        let at_word_start = out.chars().next_back().is_none_or(char::is_whitespace);
        if at_word_start && NOISE_LETTERS.contains(&chars[i]) && chars.get(i + 1) == Some(&'/') {
            i += 2;
            continue;
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

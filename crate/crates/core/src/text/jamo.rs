//! Hangul syllable <-> jamo by Unicode arithmetic.
//!
//! Output uses the compatibility jamo block (U+3131..U+3163), so an initial
//! and a final consonant share one code point. Composition disambiguates by
//! position: a consonant directly before a vowel always starts a new syllable.

use alloc::string::String;
use alloc::vec::Vec;

use super::TextError;

const SYLLABLE_BASE: u32 = 0xAC00;
const SYLLABLE_COUNT: u32 = 11_172;
const MEDIAL_COUNT: u32 = 21;
const FINAL_COUNT: u32 = 28;
const PER_INITIAL: u32 = MEDIAL_COUNT * FINAL_COUNT; // 588

/// The 19 initial consonants in syllable order.
pub const INITIALS: [char; 19] = [
    'ㄱ', 'ㄲ', 'ㄴ', 'ㄷ', 'ㄸ', 'ㄹ', 'ㅁ', 'ㅂ', 'ㅃ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅉ', 'ㅊ', 'ㅋ',
    'ㅌ', 'ㅍ', 'ㅎ',
];

/// The 21 vowels in syllable order.
pub const MEDIALS: [char; 21] = [
    'ㅏ', 'ㅐ', 'ㅑ', 'ㅒ', 'ㅓ', 'ㅔ', 'ㅕ', 'ㅖ', 'ㅗ', 'ㅘ', 'ㅙ', 'ㅚ', 'ㅛ', 'ㅜ', 'ㅝ', 'ㅞ',
    'ㅟ', 'ㅠ', 'ㅡ', 'ㅢ', 'ㅣ',
];

/// The 27 final consonants; final index `i` maps to `FINALS[i - 1]`.
pub const FINALS: [char; 27] = [
    'ㄱ', 'ㄲ', 'ㄳ', 'ㄴ', 'ㄵ', 'ㄶ', 'ㄷ', 'ㄹ', 'ㄺ', 'ㄻ', 'ㄼ', 'ㄽ', 'ㄾ', 'ㄿ', 'ㅀ', 'ㅁ',
    'ㅂ', 'ㅄ', 'ㅅ', 'ㅆ', 'ㅇ', 'ㅈ', 'ㅊ', 'ㅋ', 'ㅌ', 'ㅍ', 'ㅎ',
];

fn initial_index(c: char) -> Option<u32> {
    INITIALS.iter().position(|&j| j == c).map(|i| i as u32)
}

fn medial_index(c: char) -> Option<u32> {
    MEDIALS.iter().position(|&j| j == c).map(|i| i as u32)
}

fn final_index(c: char) -> Option<u32> {
    FINALS.iter().position(|&j| j == c).map(|i| i as u32 + 1)
}

fn is_jamo(c: char) -> bool {
    initial_index(c).is_some() || medial_index(c).is_some() || final_index(c).is_some()
}

/// Splits each precomposed syllable (U+AC00..U+D7A3) into initial, medial and
/// optional final jamo. Other characters pass through unchanged.
pub fn decompose_jamo(s: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(s.len());
    for c in s.chars() {
        let code = (c as u32).wrapping_sub(SYLLABLE_BASE);
        if code < SYLLABLE_COUNT {
            out.push(INITIALS[(code / PER_INITIAL) as usize]);
            out.push(MEDIALS[(code % PER_INITIAL / FINAL_COUNT) as usize]);
            let t = code % FINAL_COUNT;
            if t != 0 {
                out.push(FINALS[t as usize - 1]);
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Inverse of [`decompose_jamo`]. Any jamo that is not part of an
/// (initial, medial[, final]) group is an error.
pub fn compose_jamo(jamos: &[char]) -> Result<String, TextError> {
    let mut out = String::with_capacity(jamos.len());
    let mut i = 0;
    while i < jamos.len() {
        let c = jamos[i];
        let pair = initial_index(c).zip(jamos.get(i + 1).and_then(|&n| medial_index(n)));
        if let Some((l, v)) = pair {
            i += 2;
            let mut t = 0;
            if let Some(ti) = jamos.get(i).and_then(|&n| final_index(n)) {
                let next_is_vowel = jamos.get(i + 1).is_some_and(|&n| medial_index(n).is_some());
                if !next_is_vowel {
                    t = ti;
                    i += 1;
                }
            }
            let code = SYLLABLE_BASE + l * PER_INITIAL + v * FINAL_COUNT + t;
            out.push(char::from_u32(code).expect("syllable block"));
        } else if is_jamo(c) {
            return Err(TextError::InvalidSequence { position: i });
        } else {
            out.push(c);
            i += 1;
        }
    }
    Ok(out)
}

//! Terminated byte texts and the sentinel conventions shared by every other
//! module.
//!
//! A [`Text`] is a payload of raw bytes followed by a single terminator byte
//! (written `$` in rendered output). The terminator is chosen so that it is
//! unique in the text and strictly smaller than every payload byte, which
//! keeps plain byte comparison consistent with the suffix order every
//! structure here relies on. A second reserved byte (rendered `#`) is set
//! aside for excised-region markers in bounded texts; it never occurs in the
//! payload of a freshly loaded text.
//!
//! All public positions are 1-based.

use std::fs;
use std::path::Path;

use thiserror::Error;

/// How a raw input relates to its terminator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SentinelPolicy {
    /// The input is pure payload; a fresh terminator byte is appended.
    AppendIfMissing,
    /// The input's final byte already is the terminator.
    RequirePresent,
}

#[derive(Error, Debug)]
pub enum TextError {
    #[error("empty input: a text needs at least one payload byte")]
    EmptyInput,
    #[error("sentinel collision: reserved byte 0x{0:02x} occurs in the payload")]
    SentinelCollision(u8),
    #[error("no sentinel available: payload uses byte 0x00, leaving no byte below the alphabet")]
    NoSentinelBelowAlphabet,
    #[error("fewer than two unused byte values: cannot reserve both sentinels")]
    AlphabetFull,
    #[error("terminator 0x{0:02x} must occur exactly once, at the end")]
    TerminatorNotUnique(u8),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A terminated text plus its sentinel byte assignments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Text {
    /// Payload bytes followed by the terminator.
    bytes: Vec<u8>,
    dollar: u8,
    hash: u8,
}

impl Text {
    /// Builds a text from raw bytes under the given policy.
    ///
    /// The terminator is the smallest byte value absent from the payload and
    /// must be smaller than every payload byte; the excision marker is the
    /// next smallest unused value. Inputs that already contain byte 0x00 (or
    /// whose final byte is not a valid terminator under `RequirePresent`)
    /// are rejected rather than remapped.
    pub fn from_bytes(raw: &[u8], policy: SentinelPolicy) -> Result<Text, TextError> {
        match policy {
            SentinelPolicy::AppendIfMissing => {
                if raw.is_empty() {
                    return Err(TextError::EmptyInput);
                }
                let (dollar, hash) = reserve_sentinels(raw)?;
                let mut bytes = Vec::with_capacity(raw.len() + 1);
                bytes.extend_from_slice(raw);
                bytes.push(dollar);
                Ok(Text { bytes, dollar, hash })
            }
            SentinelPolicy::RequirePresent => {
                if raw.len() < 2 {
                    return Err(TextError::EmptyInput);
                }
                let dollar = raw[raw.len() - 1];
                let payload = &raw[..raw.len() - 1];
                if payload.iter().any(|&b| b == dollar) {
                    return Err(TextError::TerminatorNotUnique(dollar));
                }
                if payload.iter().any(|&b| b < dollar) {
                    return Err(TextError::NoSentinelBelowAlphabet);
                }
                let hash = smallest_unused(payload, &[dollar]).ok_or(TextError::AlphabetFull)?;
                Ok(Text { bytes: raw.to_vec(), dollar, hash })
            }
        }
    }

    /// Reads a file and builds a text from its bytes.
    pub fn load(path: &Path, policy: SentinelPolicy) -> Result<Text, TextError> {
        let raw = fs::read(path)?;
        Text::from_bytes(&raw, policy)
    }

    /// Rebuilds a text around an already-transformed byte sequence that keeps
    /// this text's sentinel assignments. The sequence must end with the
    /// terminator and contain it nowhere else.
    pub(crate) fn with_same_sentinels(&self, bytes: Vec<u8>) -> Text {
        debug_assert_eq!(bytes.last(), Some(&self.dollar));
        debug_assert!(!bytes[..bytes.len() - 1].contains(&self.dollar));
        Text { bytes, dollar: self.dollar, hash: self.hash }
    }

    /// Reassembles a text from stored parts. The caller has already checked
    /// that `bytes` ends with `dollar` and contains it nowhere else; the
    /// excision marker may occur anywhere.
    pub(crate) fn from_parts(bytes: Vec<u8>, dollar: u8, hash: u8) -> Text {
        debug_assert_eq!(bytes.last(), Some(&dollar));
        debug_assert!(!bytes[..bytes.len() - 1].contains(&dollar));
        Text { bytes, dollar, hash }
    }

    /// Total length `n`, terminator included.
    pub fn n(&self) -> usize {
        self.bytes.len()
    }

    /// Payload length (`n - 1`).
    pub fn payload_len(&self) -> usize {
        self.bytes.len() - 1
    }

    /// Letter at 1-based position `i`.
    pub fn letter(&self, i: usize) -> u8 {
        self.bytes[i - 1]
    }

    /// 0-based view of the full byte sequence, terminator included.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Payload bytes without the terminator.
    pub fn payload(&self) -> &[u8] {
        &self.bytes[..self.bytes.len() - 1]
    }

    /// 1-based inclusive slice `T[lo..=hi]`, clamped to the text.
    pub fn slice(&self, lo: usize, hi: usize) -> &[u8] {
        let lo = lo.max(1);
        let hi = hi.min(self.bytes.len());
        if lo > hi {
            return &[];
        }
        &self.bytes[lo - 1..hi]
    }

    pub fn dollar(&self) -> u8 {
        self.dollar
    }

    pub fn hash(&self) -> u8 {
        self.hash
    }

    /// Distinct payload byte values in increasing order.
    pub fn alphabet(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &b in self.payload() {
            seen[b as usize] = true;
        }
        (0u16..256).filter(|&b| seen[b as usize]).map(|b| b as u8).collect()
    }

    /// The flank pair of a length-`m` window at 1-based position `i`: up to
    /// `l` letters before it and up to `r` letters after it, truncated at
    /// the text boundaries. The right side may include the terminator.
    pub fn flanks(&self, i: usize, m: usize, l: usize, r: usize) -> (Vec<u8>, Vec<u8>) {
        let left = self.slice(i.saturating_sub(l), i - 1).to_vec();
        let right = if r == 0 { Vec::new() } else { self.slice(i + m, i + m + r - 1).to_vec() };
        (left, right)
    }

    /// Renders bytes for output: terminator as `$`, excision marker as `#`.
    pub fn render(&self, s: &[u8]) -> Vec<u8> {
        s.iter()
            .map(|&b| {
                if b == self.dollar {
                    b'$'
                } else if b == self.hash {
                    b'#'
                } else {
                    b
                }
            })
            .collect()
    }
}

/// Reverses a text's payload, keeping the terminator at the end: the result
/// is `reverse(payload) + $`. Involutive on the payload. Suffixes of the
/// result spell the reversed prefixes of the source, each closed by `$`,
/// which is exactly what left-context grouping needs.
pub fn reverse_text(t: &Text) -> Text {
    let mut bytes: Vec<u8> = t.payload().to_vec();
    bytes.reverse();
    bytes.push(t.dollar());
    t.with_same_sentinels(bytes)
}

fn reserve_sentinels(payload: &[u8]) -> Result<(u8, u8), TextError> {
    let dollar = smallest_unused(payload, &[]).ok_or(TextError::AlphabetFull)?;
    if payload.iter().any(|&b| b < dollar) {
        // The smallest unused value sits above some payload byte, so no
        // terminator can sort below the whole alphabet.
        return Err(TextError::SentinelCollision(0x00));
    }
    let hash = smallest_unused(payload, &[dollar]).ok_or(TextError::AlphabetFull)?;
    Ok((dollar, hash))
}

fn smallest_unused(payload: &[u8], taken: &[u8]) -> Option<u8> {
    let mut seen = [false; 256];
    for &b in payload {
        seen[b as usize] = true;
    }
    for &b in taken {
        seen[b as usize] = true;
    }
    (0u16..256).map(|b| b as u8).find(|&b| !seen[b as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(s: &[u8]) -> Text {
        Text::from_bytes(s, SentinelPolicy::AppendIfMissing).unwrap()
    }

    #[test]
    fn append_policy_reserves_low_bytes() {
        let t = text(b"banana");
        assert_eq!(t.n(), 7);
        assert_eq!(t.payload_len(), 6);
        assert_eq!(t.dollar(), 0x00);
        assert_eq!(t.hash(), 0x01);
        assert_eq!(t.letter(1), b'b');
        assert_eq!(t.letter(7), 0x00);
        assert_eq!(t.alphabet(), vec![b'a', b'b', b'n']);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            Text::from_bytes(b"", SentinelPolicy::AppendIfMissing),
            Err(TextError::EmptyInput)
        ));
    }

    #[test]
    fn payload_with_zero_byte_collides() {
        assert!(matches!(
            Text::from_bytes(&[b'a', 0x00, b'b'], SentinelPolicy::AppendIfMissing),
            Err(TextError::SentinelCollision(_))
        ));
    }

    #[test]
    fn require_present_accepts_terminated_input() {
        let t = Text::from_bytes(&[b'a', b'b', 0x00], SentinelPolicy::RequirePresent).unwrap();
        assert_eq!(t.dollar(), 0x00);
        assert_eq!(t.payload(), b"ab");
    }

    #[test]
    fn require_present_rejects_repeated_terminator() {
        assert!(matches!(
            Text::from_bytes(&[0x00, b'b', 0x00], SentinelPolicy::RequirePresent),
            Err(TextError::TerminatorNotUnique(0x00))
        ));
    }

    #[test]
    fn slice_is_one_based_and_clamped() {
        let t = text(b"banana");
        assert_eq!(t.slice(2, 4), b"ana");
        assert_eq!(t.slice(1, 0), b"");
        assert_eq!(t.slice(6, 99), &[b'a', 0x00][..]);
    }

    #[test]
    fn reverse_keeps_terminator_and_is_involutive() {
        let t = text(b"banana");
        let r = reverse_text(&t);
        assert_eq!(r.payload(), b"ananab");
        assert_eq!(r.letter(r.n()), r.dollar());
        let rr = reverse_text(&r);
        assert_eq!(rr.as_bytes(), t.as_bytes());
    }

    #[test]
    fn render_maps_sentinels() {
        let t = text(b"ab");
        let s = vec![b'a', t.dollar(), t.hash()];
        assert_eq!(t.render(&s), b"a$#");
    }
}

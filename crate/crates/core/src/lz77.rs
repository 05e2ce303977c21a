//! Greedy leftmost-longest phrase factorization and the boundary-window
//! reduced string used by the size-bounded counting index.
//!
//! The factorization tiles the payload with phrases: each phrase is either
//! the first occurrence of its leading letter or the longest substring with a
//! copy starting strictly earlier (copies may overlap). The terminator is
//! unique, so it always forms one final single-letter phrase of its own; the
//! recorded starts cover the payload phrases and the terminator phrase stays
//! implicit at position `n`.
//!
//! The reduced string keeps exactly the positions within distance `B - 1` of
//! some phrase start (the terminator phrase included) and opens every
//! excised run with a single marker byte. Every substring of the text has an
//! occurrence spanning a phrase start, so windows of total width at most `B`
//! survive verbatim.

use std::collections::BTreeSet;

use crate::suffix::{invert_raw, kasai_raw, suffix_array_raw, Lce};
use crate::text::Text;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lz77Factorization {
    // Strictly increasing payload phrase starts; starts[0] = 1.
    starts: Vec<u32>,
    // Full text length; the terminator phrase sits at `n`.
    n: u32,
}

impl Lz77Factorization {
    /// Payload phrase starts, 1-based.
    pub fn starts(&self) -> &[u32] {
        &self.starts
    }

    /// Payload phrase count.
    pub fn z(&self) -> usize {
        self.starts.len()
    }

    /// Starts including the implicit terminator phrase at `n`.
    pub fn all_starts(&self) -> Vec<u32> {
        let mut v = self.starts.clone();
        v.push(self.n);
        v
    }
}

/// Greedy factorization of an arbitrary byte slice; returns 1-based phrase
/// starts. O(n log n): suffix array plus rank-neighbor matching over the set
/// of already-readable positions.
pub fn factorize_slice(bytes: &[u8]) -> Vec<u32> {
    let n = bytes.len();
    if n == 0 {
        return Vec::new();
    }
    let pos = suffix_array_raw(bytes);
    let rank = invert_raw(&pos);
    let lcp = kasai_raw(bytes, &pos, &rank);
    let lce = Lce::from_raw(rank.clone(), &lcp);

    let mut starts: Vec<u32> = Vec::new();
    // Ranks of every position before the current phrase start. The longest
    // earlier-starting match of suffix s is attained at one of the two
    // rank-nearest entries, since the common prefix length is the interval
    // minimum over the ranks in between.
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut inserted = 1usize;
    let mut s = 1usize;
    while s <= n {
        starts.push(s as u32);
        while inserted < s {
            seen.insert(rank[inserted]);
            inserted += 1;
        }
        let r = rank[s];
        let mut best = 0usize;
        if let Some(&below) = seen.range(..r).next_back() {
            best = best.max(lce.lce(pos[below as usize - 1] as usize, s));
        }
        if let Some(&above) = seen.range(r + 1..).next() {
            best = best.max(lce.lce(pos[above as usize - 1] as usize, s));
        }
        s += best.max(1);
    }
    starts
}

/// Greedy factorization of a text's payload. The unique terminator adds one
/// implicit final phrase and never changes the payload phrases.
pub fn factorize(t: &Text) -> Lz77Factorization {
    Lz77Factorization { starts: factorize_slice(t.payload()), n: t.n() as u32 }
}

/// The reduced string: original letters where kept, `0` in the map at marker
/// slots.
#[derive(Clone, Debug)]
pub struct ModifiedString {
    t_prime: Text,
    // source_map[i-1] = originating text position of reduced position i,
    // or 0 where the reduced string holds a marker.
    source_map: Vec<u32>,
    bound: u32,
}

impl ModifiedString {
    pub fn text(&self) -> &Text {
        &self.t_prime
    }

    /// Reduced length, terminator and markers included. Never zero.
    pub fn len(&self) -> usize {
        self.t_prime.n()
    }

    /// Window bound `B` the string was built for.
    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// Originating text position of reduced position `i` (1-based), `None`
    /// at marker slots.
    pub fn source(&self, i: usize) -> Option<usize> {
        match self.source_map[i - 1] {
            0 => None,
            p => Some(p as usize),
        }
    }

    pub fn source_map(&self) -> &[u32] {
        &self.source_map
    }
}

/// Core keep/excise pass over a slice with explicit phrase starts: positions
/// with min-distance < `b` to a start survive; each maximal excised run is
/// replaced by one leading `marker`. Returns the reduced bytes and their
/// 1-based source positions (0 at markers).
pub fn modified_slice(bytes: &[u8], starts: &[u32], b: u32, marker: u8) -> (Vec<u8>, Vec<u32>) {
    debug_assert!(b >= 1);
    debug_assert!(starts.windows(2).all(|w| w[0] < w[1]));
    let n = bytes.len();
    let mut out = Vec::with_capacity(n);
    let mut map = Vec::with_capacity(n);
    let mut next = 0usize; // first start >= current position
    let mut in_gap = false;
    for i in 1..=n as u32 {
        while next < starts.len() && starts[next] < i {
            next += 1;
        }
        let mut dist = u32::MAX;
        if next < starts.len() {
            dist = starts[next] - i;
        }
        if next > 0 {
            dist = dist.min(i - starts[next - 1]);
        }
        if dist < b {
            out.push(bytes[i as usize - 1]);
            map.push(i);
            in_gap = false;
        } else if !in_gap {
            out.push(marker);
            map.push(0);
            in_gap = true;
        }
    }
    (out, map)
}

/// Builds the reduced string for a text: the terminator phrase keeps the
/// terminator in place, so the result is itself a valid text with the same
/// sentinel bytes.
pub fn build_modified_string(t: &Text, f: &Lz77Factorization, b: u32) -> ModifiedString {
    assert!(b >= 1, "window bound must be positive");
    let (bytes, source_map) = modified_slice(t.as_bytes(), &f.all_starts(), b, t.hash());
    debug_assert_eq!(bytes.last(), Some(&t.dollar()));
    ModifiedString { t_prime: t.with_same_sentinels(bytes), source_map, bound: b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::SentinelPolicy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn text(s: &[u8]) -> Text {
        Text::from_bytes(s, SentinelPolicy::AppendIfMissing).unwrap()
    }

    #[test]
    fn five_phrase_fixture() {
        assert_eq!(factorize_slice(b"ATATAAATAAATAAA"), vec![1, 2, 3, 6, 8]);
        let f = factorize(&text(b"ATATAAATAAATAAA"));
        assert_eq!(f.starts(), &[1, 2, 3, 6, 8]);
        assert_eq!(f.z(), 5);
        assert_eq!(f.all_starts(), vec![1, 2, 3, 6, 8, 16]);
    }

    #[test]
    fn run_of_identical_letters() {
        let f = factorize(&text(b"AAAA"));
        assert_eq!(f.starts(), &[1, 2]);
    }

    #[test]
    fn single_letter_and_fresh_letters() {
        assert_eq!(factorize_slice(b"A"), vec![1]);
        assert_eq!(factorize_slice(b"ABC"), vec![1, 2, 3]);
    }

    /// Exists an occurrence of `pat` in `s` starting at a 1-based position
    /// strictly below `limit`?
    fn occurs_before(s: &[u8], pat: &[u8], limit: usize) -> bool {
        (1..limit).any(|i| i + pat.len() <= s.len() + 1 && &s[i - 1..i - 1 + pat.len()] == pat)
    }

    #[test]
    fn random_phrases_are_greedy_leftmost_longest() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..12 {
            let n = 128;
            let sigma = [2usize, 3, 5][rng.gen_range(0..3)];
            let raw: Vec<u8> = (0..n).map(|_| b'a' + rng.gen_range(0..sigma) as u8).collect();
            let starts = factorize_slice(&raw);
            assert_eq!(starts[0], 1);
            let mut bounds = starts.clone();
            bounds.push(n as u32 + 1);
            for w in bounds.windows(2) {
                let (s, e) = (w[0] as usize, w[1] as usize);
                let len = e - s;
                let phrase = &raw[s - 1..e - 1];
                if len == 1 {
                    // A single letter phrase is either fresh or a maximal
                    // length-1 copy.
                    if occurs_before(&raw, phrase, s) {
                        assert!(
                            e > n || !occurs_before(&raw, &raw[s - 1..e], s),
                            "phrase at {s} could be longer"
                        );
                    }
                } else {
                    assert!(occurs_before(&raw, phrase, s), "phrase at {s} has no earlier copy");
                    assert!(
                        e > n || !occurs_before(&raw, &raw[s - 1..e], s),
                        "phrase at {s} not maximal"
                    );
                }
            }
        }
    }

    #[test]
    fn reduced_string_fixture() {
        let (out, map) = modified_slice(b"TAAATAAATAATAAA", &[1, 2, 3, 5, 12], 3, b'#');
        assert_eq!(out, b"TAAATAA#AATAA#");
        assert_eq!(out.len(), 14);
        assert_eq!(map, vec![1, 2, 3, 4, 5, 6, 7, 0, 10, 11, 12, 13, 14, 0]);
    }

    #[test]
    fn wide_bound_keeps_everything() {
        let t = text(b"TAAATAAATAATAAA");
        let f = factorize(&t);
        let m = build_modified_string(&t, &f, t.n() as u32);
        assert_eq!(m.text().as_bytes(), t.as_bytes());
        assert!(m.source_map().iter().all(|&p| p != 0));
    }

    #[test]
    fn terminator_phrase_keeps_terminator() {
        let t = text(b"TAAATAAATAATAAA");
        let f = factorize(&t);
        let m = build_modified_string(&t, &f, 3);
        let got = m.text().as_bytes();
        assert_eq!(m.text().render(got), b"TAAATAA#AATAAA$");
        assert_eq!(got.last(), Some(&t.dollar()));
    }

    #[test]
    fn random_reduction_matches_distance_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let n = 1 + rng.gen_range(0..200);
            let sigma = [2usize, 4][rng.gen_range(0..2)];
            let raw: Vec<u8> = (0..n).map(|_| b'a' + rng.gen_range(0..sigma) as u8).collect();
            let t = text(&raw);
            let f = factorize(&t);
            for b in [2u32, 3, 5] {
                let m = build_modified_string(&t, &f, b);
                let starts = f.all_starts();
                let keep: Vec<usize> = (1..=t.n())
                    .filter(|&i| {
                        starts.iter().any(|&s| (s as i64 - i as i64).unsigned_abs() < b as u64)
                    })
                    .collect();
                let mapped: Vec<usize> =
                    (1..=m.len()).filter_map(|i| m.source(i)).collect();
                assert_eq!(mapped, keep);
                for (i, &src) in m.source_map().iter().enumerate() {
                    if src == 0 {
                        assert_eq!(m.text().as_bytes()[i], t.hash());
                    } else {
                        assert_eq!(m.text().as_bytes()[i], t.letter(src as usize));
                    }
                }
                let z_total = (f.z() + 1) as usize;
                assert!(m.len() <= t.n() + z_total);
                assert!(m.len() <= 2 * b as usize * z_total);
            }
        }
    }

    #[test]
    fn every_substring_has_start_spanning_occurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..6 {
            let n = 40 + rng.gen_range(0..21);
            let raw: Vec<u8> = (0..n).map(|_| b'a' + rng.gen_range(0..2) as u8).collect();
            let starts = factorize_slice(&raw);
            let is_start: Vec<bool> =
                (1..=n).map(|i| starts.binary_search(&(i as u32)).is_ok()).collect();
            // spanned[i][j]: some occurrence of raw[i..=j] contains a start.
            let mut primary = std::collections::HashSet::new();
            let mut all = std::collections::HashSet::new();
            for i in 0..n {
                let mut any_start = false;
                for j in i..n {
                    any_start |= is_start[j];
                    all.insert(&raw[i..=j]);
                    if any_start {
                        primary.insert(&raw[i..=j]);
                    }
                }
            }
            assert_eq!(primary.len(), all.len());
        }
    }
}

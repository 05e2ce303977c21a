//! Brute-force reference implementations: the flank-pair set of a pattern,
//! its size, and the full mining output. Deliberately simple (direct scans,
//! O(n·m) per pattern) so they can serve as ground truth everywhere else.

use std::collections::BTreeSet;

use crate::mine::MinedPattern;
use crate::text::Text;

/// All 1-based occurrence positions of `p` in the payload of `t` (the match
/// must not overlap the terminator).
pub fn occurrences(t: &Text, p: &[u8]) -> Vec<usize> {
    let s = t.payload();
    if p.is_empty() || p.len() > s.len() {
        return Vec::new();
    }
    (1..=s.len() - p.len() + 1).filter(|&i| &s[i - 1..i - 1 + p.len()] == p).collect()
}

/// The flank pair of the occurrence at `i`: up to `l` letters before it and
/// up to `r` letters after it, truncated at the text boundaries. The right
/// flank may include the terminator.
pub fn flank_pair(t: &Text, i: usize, m: usize, l: usize, r: usize) -> (Vec<u8>, Vec<u8>) {
    t.flanks(i, m, l, r)
}

/// The set of distinct flank pairs over all occurrences of `p`, by direct
/// scan. Empty when `p` does not occur.
pub fn context_oracle(t: &Text, p: &[u8], l: usize, r: usize) -> BTreeSet<(Vec<u8>, Vec<u8>)> {
    assert!(!p.is_empty(), "pattern must be non-empty");
    occurrences(t, p).into_iter().map(|i| flank_pair(t, i, p.len(), l, r)).collect()
}

/// Full mining ground truth: every distinct length-`m` payload substring
/// whose flank-pair set has size at least `tau`, in lexicographic pattern
/// order with pairs sorted lexicographically.
pub fn cpm_oracle(t: &Text, tau: usize, m: usize, l: usize, r: usize) -> Vec<MinedPattern> {
    assert!(m >= 1 && tau >= 1);
    let s = t.payload();
    if m > s.len() {
        return Vec::new();
    }
    let mut patterns: BTreeSet<&[u8]> = BTreeSet::new();
    for i in 0..=s.len() - m {
        patterns.insert(&s[i..i + m]);
    }
    let mut out = Vec::new();
    for p in patterns {
        let ctx = context_oracle(t, p, l, r);
        if ctx.len() >= tau {
            out.push(MinedPattern::new(p.to_vec(), ctx.into_iter().collect()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::SentinelPolicy;

    fn text(s: &[u8]) -> Text {
        Text::from_bytes(s, SentinelPolicy::AppendIfMissing).unwrap()
    }

    fn pairs(items: &[(&str, &str)]) -> BTreeSet<(Vec<u8>, Vec<u8>)> {
        items.iter().map(|(a, b)| (a.as_bytes().to_vec(), b.as_bytes().to_vec())).collect()
    }

    #[test]
    fn fifteen_letter_genomic_fixture() {
        let t = text(b"CTAAGAAGAATGAAC");
        let got = context_oracle(&t, b"AA", 2, 1);
        assert_eq!(got, pairs(&[("CT", "G"), ("AG", "G"), ("AG", "T"), ("TG", "C")]));
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn banana_truncated_flanks() {
        let t = text(b"banana");
        let got = context_oracle(&t, b"a", 1, 2);
        let mut want = pairs(&[("b", "na"), ("n", "na")]);
        want.insert((b"n".to_vec(), vec![t.dollar()]));
        assert_eq!(got, want);
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn absent_pattern_is_empty() {
        let t = text(b"banana");
        assert!(context_oracle(&t, b"x", 2, 2).is_empty());
        assert!(context_oracle(&t, b"ab", 1, 1).is_empty());
    }

    #[test]
    fn zero_flanks_detect_presence() {
        let t = text(b"banana");
        assert_eq!(context_oracle(&t, b"nan", 0, 0).len(), 1);
        assert_eq!(context_oracle(&t, b"nab", 0, 0).len(), 0);
    }

    #[test]
    fn mining_fixture_single_pattern() {
        let t = text(b"CTAAGAAGAATGAAC");
        let got = cpm_oracle(&t, 3, 2, 2, 1);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].pattern, b"AA");
        assert_eq!(got[0].context_size(), 4);
    }

    #[test]
    fn whole_payload_pattern() {
        let t = text(b"banana");
        let got = cpm_oracle(&t, 1, 6, 2, 2);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].pattern, b"banana");
        let dollar = vec![t.dollar()];
        assert_eq!(got[0].contexts, vec![(Vec::new(), dollar)]);
    }

    #[test]
    fn patterns_come_out_sorted() {
        let t = text(b"abracadabra");
        let got = cpm_oracle(&t, 1, 2, 1, 1);
        let pats: Vec<&[u8]> = got.iter().map(|p| p.pattern.as_slice()).collect();
        let mut sorted = pats.clone();
        sorted.sort_unstable();
        assert_eq!(pats, sorted);
    }
}

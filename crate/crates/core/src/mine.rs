//! Contextual pattern mining, in-memory engine.
//!
//! For parameters (tau, m, l, r) the miner reports every length-m substring
//! of the payload whose set of distinct flank pairs has at least tau
//! elements, together with that set. A flank pair is the up-to-l letters
//! before an occurrence and the up-to-r letters after it, truncated at the
//! text boundaries; the right flank may include the terminator.
//!
//! The engine works in rank space. Suffix structures for the text and its
//! reverse yield partition labels: `int` groups ranks by the length-m
//! window, `sint` by the length-(m+r) extension, `rint` by the length-l
//! left reading. Labelled tuples from both sides are sorted by text
//! position and aligned, then the merged tuples are sorted by
//! (int, sint, rint) so each pattern's distinct flank pairs appear as label
//! transitions within its cluster. The external-memory engine shares the
//! label semantics, the alignment step, and the final emitter, so both
//! produce byte-identical output.

use crate::suffix::{LcpArray, SuffixArray};
use crate::text::{reverse_text, Text};

/// (position, rank, window label, extension label).
pub(crate) type Tuple4 = [u32; 4];
/// (position, left-reading label).
pub(crate) type Tuple2 = [u32; 2];
/// (position, rank, window label, extension label, left-reading label).
pub(crate) type Tuple5 = [u32; 5];

#[derive(Debug, thiserror::Error)]
pub enum MineError {
    #[error("threshold must be at least 1")]
    ZeroThreshold,
    #[error("pattern length must be at least 1")]
    ZeroPatternLength,
    #[error("window depth {depth} exceeds text length {n}")]
    DepthExceedsText { depth: usize, n: usize },
    #[error("left extent {l} must be smaller than text length {n}")]
    LeftExtentTooLarge { l: usize, n: usize },
    #[error("no reverse-side tuple aligned with text position {pos}")]
    AlignmentMismatch { pos: u32 },
    #[error("external engine configuration: {0}")]
    Config(String),
    #[error("run file corrupt: {0}")]
    CorruptRun(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One pattern meeting the threshold, with its distinct flank pairs in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinedPattern {
    pub pattern: Vec<u8>,
    pub contexts: Vec<(Vec<u8>, Vec<u8>)>,
}

impl MinedPattern {
    pub fn new(pattern: Vec<u8>, contexts: Vec<(Vec<u8>, Vec<u8>)>) -> MinedPattern {
        debug_assert!(
            contexts.windows(2).all(|w| w[0] < w[1]),
            "contexts must be sorted and distinct"
        );
        MinedPattern { pattern, contexts }
    }

    pub fn context_size(&self) -> usize {
        self.contexts.len()
    }
}

pub(crate) fn validate_params(
    t: &Text,
    tau: usize,
    m: usize,
    l: usize,
    r: usize,
) -> Result<(), MineError> {
    let n = t.n();
    if tau == 0 {
        return Err(MineError::ZeroThreshold);
    }
    if m == 0 {
        return Err(MineError::ZeroPatternLength);
    }
    if m + r > n {
        return Err(MineError::DepthExceedsText { depth: m + r, n });
    }
    if l >= n {
        return Err(MineError::LeftExtentTooLarge { l, n });
    }
    Ok(())
}

/// Partition labels at the given depth: ranks i and i-1 share a label iff
/// LCP[i] >= depth, so a label names a maximal run of suffixes agreeing on
/// their first `depth` letters. Labels are dense, start at 1, and increase
/// with rank. Slot 0 of the result is unused.
pub fn partition_intervals(lcp: &LcpArray, depth: usize) -> Vec<u32> {
    let n = lcp.n();
    let mut ids = vec![0u32; n + 1];
    let mut cur = 0u32;
    for i in 1..=n {
        if i == 1 || (lcp.at(i) as usize) < depth {
            cur += 1;
        }
        ids[i] = cur;
    }
    ids
}

/// Stable counting sort of fixed-arity tuples by one column. Column values
/// must not exceed `max_val`.
pub(crate) fn counting_sort_by_column<const K: usize>(
    v: &[[u32; K]],
    col: usize,
    max_val: usize,
) -> Vec<[u32; K]> {
    let mut cnt = vec![0usize; max_val + 2];
    for rec in v {
        cnt[rec[col] as usize + 1] += 1;
    }
    for i in 1..cnt.len() {
        cnt[i] += cnt[i - 1];
    }
    let mut out = vec![[0u32; K]; v.len()];
    for rec in v {
        let slot = &mut cnt[rec[col] as usize];
        out[*slot] = *rec;
        *slot += 1;
    }
    out
}

/// Forward-side tuples, one per rank whose suffix admits a full length-m
/// payload window (position <= n - m), in rank order.
pub(crate) fn forward_tuples(t: &Text, m: usize, r: usize) -> Vec<Tuple4> {
    let sa = SuffixArray::build(t);
    let isa = sa.invert();
    let lcp = LcpArray::build(t, &sa, &isa);
    let int = partition_intervals(&lcp, m);
    let sint = partition_intervals(&lcp, m + r);
    let n = t.n();
    let mut out = Vec::new();
    for rank in 1..=n {
        let p = sa.at(rank);
        if p <= n - m {
            out.push([p as u32, rank as u32, int[rank], sint[rank]]);
        }
    }
    out
}

/// Reverse-side tuples, one per rank of the reversed text, in rank order.
/// The suffix of the reverse at rank j reads the original text leftwards
/// from position n - SA_rev[j], so it is keyed to that position plus one:
/// its first l letters spell the reversed left flank there.
pub(crate) fn reverse_tuples(t: &Text, l: usize) -> Vec<Tuple2> {
    let tr = reverse_text(t);
    let sa = SuffixArray::build(&tr);
    let isa = sa.invert();
    let lcp = LcpArray::build(&tr, &sa, &isa);
    let rint = partition_intervals(&lcp, l);
    let n = t.n();
    (1..=n).map(|j| [(n + 1 - sa.at(j)) as u32, rint[j]]).collect()
}

/// Joins the two sides on text position. Inputs must be sorted by their
/// first column. Reverse tuples cover every position, so a forward tuple
/// without a partner is a structural error; reverse tuples without a
/// partner (positions with no valid window) are skipped.
pub(crate) fn align_by_position(t4: &[Tuple4], t2: &[Tuple2]) -> Result<Vec<Tuple5>, MineError> {
    let mut out = Vec::with_capacity(t4.len());
    let mut j = 0usize;
    for q in t4 {
        while j < t2.len() && t2[j][0] < q[0] {
            j += 1;
        }
        if j == t2.len() || t2[j][0] != q[0] {
            return Err(MineError::AlignmentMismatch { pos: q[0] });
        }
        out.push([q[0], q[1], q[2], q[3], t2[j][1]]);
    }
    Ok(out)
}

/// Final pass shared by both engines. Input tuples must be sorted by
/// (window label, extension label, left label). Within one window cluster
/// each distinct (extension, left) label pair corresponds to exactly one
/// distinct flank pair, so the cluster's context count is its number of
/// label transitions; the first position of each run serves as the
/// representative occurrence for materializing the pair.
pub(crate) fn emit_sorted(
    t: &Text,
    tau: usize,
    m: usize,
    l: usize,
    r: usize,
    tuples: impl Iterator<Item = Result<Tuple5, MineError>>,
) -> Result<Vec<MinedPattern>, MineError> {
    let mut out = Vec::new();
    let mut reps: Vec<u32> = Vec::new();
    let mut cur_int = 0u32;
    let mut last_pair = (0u32, 0u32);
    fn flush(
        t: &Text,
        tau: usize,
        m: usize,
        l: usize,
        r: usize,
        reps: &mut Vec<u32>,
        out: &mut Vec<MinedPattern>,
    ) {
        if reps.len() >= tau {
            let p0 = reps[0] as usize;
            let pattern = t.slice(p0, p0 + m - 1).to_vec();
            let mut contexts: Vec<(Vec<u8>, Vec<u8>)> =
                reps.iter().map(|&p| t.flanks(p as usize, m, l, r)).collect();
            contexts.sort();
            out.push(MinedPattern::new(pattern, contexts));
        }
        reps.clear();
    }
    for item in tuples {
        let tp = item?;
        if tp[2] != cur_int {
            flush(t, tau, m, l, r, &mut reps, &mut out);
            cur_int = tp[2];
            last_pair = (0, 0);
        }
        if (tp[3], tp[4]) != last_pair {
            last_pair = (tp[3], tp[4]);
            reps.push(tp[0]);
        }
    }
    flush(t, tau, m, l, r, &mut reps, &mut out);
    Ok(out)
}

/// In-memory miner. Patterns come out in lexicographic order because window
/// labels follow rank order.
pub fn mine_im(
    t: &Text,
    tau: usize,
    m: usize,
    l: usize,
    r: usize,
) -> Result<Vec<MinedPattern>, MineError> {
    validate_params(t, tau, m, l, r)?;
    let n = t.n();
    let t4 = counting_sort_by_column(&forward_tuples(t, m, r), 0, n + 1);
    let t2 = counting_sort_by_column(&reverse_tuples(t, l), 0, n + 1);
    let t5 = align_by_position(&t4, &t2)?;
    let t5 = counting_sort_by_column(&t5, 4, n + 1);
    let t5 = counting_sort_by_column(&t5, 3, n + 1);
    let t5 = counting_sort_by_column(&t5, 2, n + 1);
    emit_sorted(t, tau, m, l, r, t5.into_iter().map(Ok))
}

/// Every distinct length-m payload substring, in lexicographic order.
pub fn distinct_windows(t: &Text, m: usize) -> Vec<Vec<u8>> {
    let n = t.n();
    if m == 0 || m > n - 1 {
        return Vec::new();
    }
    let sa = SuffixArray::build(t);
    let isa = sa.invert();
    let lcp = LcpArray::build(t, &sa, &isa);
    let ids = partition_intervals(&lcp, m);
    let mut out = Vec::new();
    let mut last_id = 0u32;
    for rank in 1..=n {
        let p = sa.at(rank);
        if p <= n - m && ids[rank] != last_id {
            last_id = ids[rank];
            out.push(t.slice(p, p + m - 1).to_vec());
        }
    }
    out
}

/// Canonical mining output: per pattern a `pattern TAB size` line, then one
/// `TAB left TAB right` line per flank pair. Empty flanks render as `-` and
/// sentinels render as `$` / `#`.
pub fn format_patterns(t: &Text, patterns: &[MinedPattern]) -> Vec<u8> {
    let mut out = Vec::new();
    let field = |buf: &mut Vec<u8>, s: &[u8]| {
        if s.is_empty() {
            buf.push(b'-');
        } else {
            buf.extend_from_slice(&t.render(s));
        }
    };
    for mp in patterns {
        field(&mut out, &mp.pattern);
        out.push(b'\t');
        out.extend_from_slice(mp.context_size().to_string().as_bytes());
        out.push(b'\n');
        for (left, right) in &mp.contexts {
            out.push(b'\t');
            field(&mut out, left);
            out.push(b'\t');
            field(&mut out, right);
            out.push(b'\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{context_oracle, cpm_oracle};
    use crate::text::SentinelPolicy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn text(s: &str) -> Text {
        Text::from_bytes(s.as_bytes(), SentinelPolicy::AppendIfMissing).unwrap()
    }

    #[test]
    fn partition_labels_banana() {
        let t = text("banana");
        let sa = SuffixArray::build(&t);
        let isa = sa.invert();
        let lcp = LcpArray::build(&t, &sa, &isa);
        assert_eq!(partition_intervals(&lcp, 2)[1..], [1, 2, 3, 3, 4, 5, 5]);
        assert_eq!(partition_intervals(&lcp, 1)[1..], [1, 2, 2, 2, 3, 4, 4]);
        assert_eq!(partition_intervals(&lcp, 0)[1..], [1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn genomic_fixture_mines_single_pattern() {
        let t = text("CTAAGAAGAATGAAC");
        let got = mine_im(&t, 3, 2, 2, 1).unwrap();
        let want = vec![MinedPattern::new(
            b"AA".to_vec(),
            vec![
                (b"AG".to_vec(), b"G".to_vec()),
                (b"AG".to_vec(), b"T".to_vec()),
                (b"CT".to_vec(), b"G".to_vec()),
                (b"TG".to_vec(), b"C".to_vec()),
            ],
        )];
        assert_eq!(got, want);
    }

    #[test]
    fn banana_thresholds_and_order() {
        let t = text("banana");
        let all = mine_im(&t, 1, 1, 1, 1).unwrap();
        let names: Vec<&[u8]> = all.iter().map(|p| p.pattern.as_slice()).collect();
        assert_eq!(names, [b"a".as_slice(), b"b", b"n"]);
        let sizes: Vec<usize> = all.iter().map(|p| p.context_size()).collect();
        assert_eq!(sizes, [3, 1, 1]);
        for mp in &all {
            let want: Vec<_> = context_oracle(&t, &mp.pattern, 1, 1).into_iter().collect();
            assert_eq!(mp.contexts, want);
        }
        let only_a = mine_im(&t, 3, 1, 1, 1).unwrap();
        assert_eq!(only_a.len(), 1);
        assert_eq!(only_a[0].pattern, b"a");
        assert!(mine_im(&t, 4, 1, 1, 1).unwrap().is_empty());
    }

    #[test]
    fn zero_flanks_and_whole_payload() {
        let t = text("banana");
        let got = mine_im(&t, 1, 2, 0, 0).unwrap();
        for mp in &got {
            assert_eq!(mp.contexts, vec![(Vec::new(), Vec::new())]);
        }
        assert_eq!(got.len(), 3);
        let whole = mine_im(&t, 1, 6, 2, 1).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].pattern, b"banana");
        assert_eq!(whole[0].contexts, vec![(Vec::new(), vec![t.dollar()])]);
    }

    #[test]
    fn parameter_errors() {
        let t = text("banana");
        assert!(matches!(mine_im(&t, 0, 1, 0, 0), Err(MineError::ZeroThreshold)));
        assert!(matches!(mine_im(&t, 1, 0, 0, 0), Err(MineError::ZeroPatternLength)));
        assert!(matches!(
            mine_im(&t, 1, 5, 0, 3),
            Err(MineError::DepthExceedsText { depth: 8, n: 7 })
        ));
        assert!(matches!(
            mine_im(&t, 1, 1, 7, 0),
            Err(MineError::LeftExtentTooLarge { l: 7, n: 7 })
        ));
    }

    #[test]
    fn random_texts_match_direct_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4d49_4e45);
        for round in 0..40 {
            let sigma: &[u8] = if round % 2 == 0 { b"ab" } else { b"abc" };
            let len = rng.gen_range(5..60);
            let payload: Vec<u8> =
                (0..len).map(|_| sigma[rng.gen_range(0..sigma.len())]).collect();
            let t = Text::from_bytes(&payload, SentinelPolicy::AppendIfMissing).unwrap();
            for _ in 0..6 {
                let tau = rng.gen_range(1..=3);
                let m = rng.gen_range(1..=4.min(len));
                let l = rng.gen_range(0..=3);
                let r = rng.gen_range(0..=3.min(t.n() - m));
                let got = mine_im(&t, tau, m, l, r).unwrap();
                let want = cpm_oracle(&t, tau, m, l, r);
                assert_eq!(got, want, "n={len} tau={tau} m={m} l={l} r={r}");
            }
        }
    }

    #[test]
    fn counting_sort_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let recs: Vec<[u32; 3]> = (0..500)
            .map(|i| [rng.gen_range(0..10), rng.gen_range(0..10), i])
            .collect();
        let got = counting_sort_by_column(&recs, 0, 10);
        let mut want = recs.clone();
        want.sort_by_key(|r| r[0]);
        assert_eq!(got, want);
    }

    #[test]
    fn distinct_windows_enumerates_substrings() {
        let t = text("banana");
        assert_eq!(distinct_windows(&t, 1), [b"a".to_vec(), b"b".to_vec(), b"n".to_vec()]);
        assert_eq!(
            distinct_windows(&t, 2),
            [b"an".to_vec(), b"ba".to_vec(), b"na".to_vec()]
        );
        assert_eq!(distinct_windows(&t, 6), [b"banana".to_vec()]);
        assert!(distinct_windows(&t, 7).is_empty());
    }

    #[test]
    fn formatted_output_fixture() {
        let t = text("CTAAGAAGAATGAAC");
        let got = format_patterns(&t, &mine_im(&t, 3, 2, 2, 1).unwrap());
        let want = b"AA\t4\n\tAG\tG\n\tAG\tT\n\tCT\tG\n\tTG\tC\n";
        assert_eq!(got, want);
        let t2 = text("aa");
        let out = format_patterns(&t2, &mine_im(&t2, 1, 1, 1, 1).unwrap());
        let rendered = String::from_utf8(out).unwrap();
        assert_eq!(rendered, "a\t2\n\t-\ta\n\ta\t$\n");
    }
}

//! Suffix arrays, rank arrays, longest-common-prefix tables and constant-time
//! longest-common-extension queries.
//!
//! Construction is prefix doubling with counting-sort passes: O(n log n) and
//! fully deterministic. All positions and ranks are 1-based to match the rest
//! of the crate; the underlying vectors are indexed from 0 with slot 0 unused
//! where that keeps the arithmetic readable.

use crate::text::Text;

/// Suffix array: `sa.at(r)` is the 1-based start of the r-th smallest suffix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixArray {
    // pos[r-1] = start of rank-r suffix.
    pos: Vec<u32>,
}

/// Inverse permutation: `isa.rank_of(p)` is the rank of the suffix at `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankArray {
    rank: Vec<u32>,
}

/// `lcp.at(r)` = length of the common prefix of the suffixes ranked `r-1`
/// and `r`; `lcp.at(1) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcpArray {
    lcp: Vec<u32>,
}

impl SuffixArray {
    pub fn build(t: &Text) -> SuffixArray {
        SuffixArray { pos: suffix_array_raw(t.as_bytes()) }
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }

    /// 1-based suffix start for 1-based rank `r`.
    pub fn at(&self, r: usize) -> usize {
        self.pos[r - 1] as usize
    }

    pub fn positions(&self) -> &[u32] {
        &self.pos
    }

    pub fn invert(&self) -> RankArray {
        RankArray { rank: invert_raw(&self.pos) }
    }
}

/// Sorted suffix starts (1-based) of an arbitrary byte slice. A shorter
/// suffix that prefixes a longer one ranks first.
pub(crate) fn suffix_array_raw(s: &[u8]) -> Vec<u32> {
    doubling_sort(s)
}

/// Position-indexed ranks (1-based both ways; slot 0 unused).
pub(crate) fn invert_raw(pos: &[u32]) -> Vec<u32> {
    let mut rank = vec![0u32; pos.len() + 1];
    for (i, &p) in pos.iter().enumerate() {
        rank[p as usize] = (i + 1) as u32;
    }
    rank
}

/// Kasai's algorithm. `rank` must be position-indexed as by `invert_raw`.
pub(crate) fn kasai_raw(s: &[u8], pos: &[u32], rank: &[u32]) -> Vec<u32> {
    let n = s.len();
    let mut lcp = vec![0u32; n];
    let mut h: usize = 0;
    for p in 1..=n {
        let r = rank[p] as usize;
        if r == 1 {
            h = 0;
            continue;
        }
        let q = pos[r - 2] as usize;
        while p + h <= n && q + h <= n && s[p + h - 1] == s[q + h - 1] {
            h += 1;
        }
        lcp[r - 1] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

impl RankArray {
    /// 1-based rank of the suffix starting at 1-based position `p`.
    pub fn rank_of(&self, p: usize) -> usize {
        self.rank[p] as usize
    }
}

impl LcpArray {
    /// Kasai's algorithm over a built suffix array.
    pub fn build(t: &Text, sa: &SuffixArray, isa: &RankArray) -> LcpArray {
        LcpArray { lcp: kasai_raw(t.as_bytes(), &sa.pos, &isa.rank) }
    }

    pub fn n(&self) -> usize {
        self.lcp.len()
    }

    /// 1-based access; `at(1) = 0`.
    pub fn at(&self, r: usize) -> u32 {
        self.lcp[r - 1]
    }

    pub fn values(&self) -> &[u32] {
        &self.lcp
    }
}

/// Sorts all suffixes of an arbitrary byte slice and returns 1-based suffix
/// starts in rank order. No terminator is required: a past-the-end secondary
/// key of 0 makes a shorter suffix sort before any suffix it prefixes.
fn doubling_sort(s: &[u8]) -> Vec<u32> {
    let n = s.len();
    // rank[i] = current order class of the suffix starting at 0-based i.
    let mut rank: Vec<u32> = s.iter().map(|&b| b as u32).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut tmp_order: Vec<u32> = vec![0; n];
    let mut tmp_rank: Vec<u32> = vec![0; n];
    let mut count: Vec<u32> = Vec::new();

    // Initial order by single byte.
    counting_sort_by(&mut order, &mut tmp_order, &rank, 256, &mut count);
    std::mem::swap(&mut order, &mut tmp_order);
    relabel(s.len(), &order, &mut rank, &mut tmp_rank, |a, b| s[a as usize] == s[b as usize]);

    let mut k = 1usize;
    while k < n {
        let classes = rank[order[n - 1] as usize] as usize + 1;
        if classes == n {
            break;
        }
        // Secondary key: rank of the suffix k positions later, shifted up by
        // one so the past-the-end key 0 stays below every real rank.
        let key2 = |i: u32| -> u32 {
            let j = i as usize + k;
            if j < n {
                rank[j] + 1
            } else {
                0
            }
        };
        let keys2: Vec<u32> = (0..n as u32).map(key2).collect();
        counting_sort_by(&mut order, &mut tmp_order, &keys2, classes + 1, &mut count);
        std::mem::swap(&mut order, &mut tmp_order);
        let keys1: Vec<u32> = rank.clone();
        counting_sort_by(&mut order, &mut tmp_order, &keys1, classes, &mut count);
        std::mem::swap(&mut order, &mut tmp_order);
        let rank_snapshot = rank.clone();
        let eq = |a: u32, b: u32| {
            rank_snapshot[a as usize] == rank_snapshot[b as usize]
                && keys2[a as usize] == keys2[b as usize]
        };
        relabel(n, &order, &mut rank, &mut tmp_rank, eq);
        k *= 2;
    }
    order.iter().map(|&i| i + 1).collect()
}

/// Stable counting sort of `order` by `key[item]` into `out`.
fn counting_sort_by(
    order: &mut [u32],
    out: &mut [u32],
    key: &[u32],
    buckets: usize,
    count: &mut Vec<u32>,
) {
    count.clear();
    count.resize(buckets + 1, 0);
    for &i in order.iter() {
        count[key[i as usize] as usize + 1] += 1;
    }
    for b in 1..count.len() {
        count[b] += count[b - 1];
    }
    for &i in order.iter() {
        let slot = &mut count[key[i as usize] as usize];
        out[*slot as usize] = i;
        *slot += 1;
    }
}

fn relabel(
    n: usize,
    order: &[u32],
    rank: &mut Vec<u32>,
    tmp: &mut Vec<u32>,
    eq: impl Fn(u32, u32) -> bool,
) {
    tmp[order[0] as usize] = 0;
    for w in 1..n {
        let (a, b) = (order[w - 1], order[w]);
        let bump = u32::from(!eq(a, b));
        tmp[b as usize] = tmp[a as usize] + bump;
    }
    std::mem::swap(rank, tmp);
}

/// Constant-time longest common extension between suffixes, backed by a
/// sparse-table range minimum over the LCP array.
pub struct Lce {
    n: usize,
    isa: RankArray,
    // table[k][i] = min of lcp[i .. i + 2^k)
    table: Vec<Vec<u32>>,
}

impl Lce {
    pub fn build(_t: &Text, sa: &SuffixArray, lcp: &LcpArray) -> Lce {
        Lce::from_raw(invert_raw(&sa.pos), lcp.values())
    }

    /// Raw-array counterpart of `build`; `rank` as by `invert_raw`.
    pub(crate) fn from_raw(rank: Vec<u32>, lcp: &[u32]) -> Lce {
        let isa = RankArray { rank };
        let base: Vec<u32> = lcp.to_vec();
        let n = base.len();
        let levels = if n <= 1 { 1 } else { (usize::BITS - (n - 1).leading_zeros()) as usize + 1 };
        let mut table = Vec::with_capacity(levels);
        table.push(base);
        let mut k = 1usize;
        while (1 << k) <= n {
            let prev = &table[k - 1];
            let half = 1usize << (k - 1);
            let row: Vec<u32> =
                (0..=n - (1 << k)).map(|i| prev[i].min(prev[i + half])).collect();
            table.push(row);
            k += 1;
        }
        Lce { n, isa, table }
    }

    /// Length of the longest common prefix of the suffixes at 1-based
    /// positions `i` and `j`.
    pub fn lce(&self, i: usize, j: usize) -> usize {
        if i == j {
            return self.n - i + 1;
        }
        let (a, b) = {
            let (ri, rj) = (self.isa.rank_of(i), self.isa.rank_of(j));
            (ri.min(rj), ri.max(rj))
        };
        // min over lcp ranks (a+1 ..= b), 0-based slots a..b.
        self.range_min(a, b) as usize
    }

    fn range_min(&self, lo: usize, hi: usize) -> u32 {
        let len = hi - lo;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        self.table[k][lo].min(self.table[k][hi - (1 << k)])
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// O(n^2 log n) reference: sort suffix slices directly.
    pub fn naive_sa(t: &Text) -> Vec<usize> {
        let s = t.as_bytes();
        let mut pos: Vec<usize> = (1..=s.len()).collect();
        pos.sort_by_key(|&p| &s[p - 1..]);
        pos
    }

    pub fn naive_lcp_pair(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
    }
}

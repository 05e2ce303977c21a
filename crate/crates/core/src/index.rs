//! Counting indexes for distinct flank pairs.
//!
//! `CpcIndex` answers "how many distinct flank pairs does pattern P have at
//! extents (l, r)" without enumerating them. It stores one point set per
//! role in a heavy-path decomposition of the suffix tree: every distinct
//! pair is witnessed at exactly one node (the locus of the pattern plus
//! right flank), each node lies on exactly one heavy path, and that path is
//! owned by its topmost, light node. Per light node u the index keeps the
//! trie over the leftward readings of all positions below u; each alive
//! trie node yields
//!
//! * a type-1 point (counted when the locus band of u itself contains the
//!   right-extended depth),
//! * a type-2 point carrying the reading's heavy-extension length phi
//!   (counted when the witness node lies strictly below u on u's heavy
//!   path), kept only when u is internal and phi reaches below u, and
//! * the same (band, phi) triple in a per-light side table used when the
//!   queried pattern's locus is itself heavy, because then witnesses on its
//!   own heavy path belong to a light node above the locus and fall outside
//!   the preorder range of the main queries.
//!
//! The bounded variant indexes the reduced string instead of the text:
//! positions far from every phrase start are excised and replaced by
//! markers, which caps the index size near the parse size while preserving
//! every distinct pair with l+|P|+r within the bound, because each such
//! pair also occurs around a phrase start where nothing is excised.
//!
//! `SimpleIndex` is the small reference variant: one point per (node,
//! reading-trie node) pair over the plain suffix tree, a single
//! five-dimensional counter, no decomposition.

use crate::hpd::{decompose, HeavyPaths};
use crate::lz77::{build_modified_string, factorize};
use crate::prefix_tree::{
    build_prefix_tree, left_clean_caps, right_clean_runs, PrefixTree, ReverseContext,
};
use crate::range_count::RangeCounter;
use crate::suffix::{LcpArray, SuffixArray};
use crate::suffix_tree::{StringDepth, SuffixTree};
use crate::text::Text;

/// Texts longer than this are rejected by the reference index, which stores
/// a point per (node, subtree position) pair.
pub const SIMPLE_INDEX_MAX_N: usize = 2000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IndexError {
    #[error("pattern must be non-empty")]
    EmptyPattern,
    #[error("query needs l+|P|+r = {need} letters but the index bound is {bound}")]
    BoundExceeded { need: u64, bound: u32 },
    #[error("text length {n} exceeds the reference index limit {max}")]
    SizeGuard { n: usize, max: usize },
    #[error("bound must be at least 1")]
    ZeroBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryParts {
    pub q1: u64,
    pub q2: u64,
    pub q3: u64,
}

pub struct CpcIndex {
    pub(crate) s: Text,
    pub(crate) original_n: u32,
    pub(crate) z: u32,
    pub(crate) bound: Option<u32>,
    pub(crate) st: SuffixTree,
    pub(crate) hpd: HeavyPaths,
    pub(crate) d1: RangeCounter<5>,
    pub(crate) d2: RangeCounter<5>,
    /// One side table per light node, aligned with `hpd.lights()`.
    pub(crate) d3: Vec<RangeCounter<3>>,
    pub(crate) light_slot: Vec<u32>,
    pub(crate) inf: u32,
}

fn sd_coord(st: &SuffixTree, v: u32, inf: u32) -> u32 {
    match st.string_depth(v) {
        StringDepth::Finite(d) => d,
        StringDepth::Infinite => inf,
    }
}

/// All positions whose clean run ends inside `ul`'s subtree, paired with
/// their heavy-extension length: how far the suffix at that position keeps
/// following ul's heavy path. A suffix leaving the path at node w shares
/// exactly w's depth with it; a suffix whose covered node lies on the path
/// shares that node's whole coordinate (the unbounded value for a full
/// leaf, the clean-run length for a cut leaf or a stranded internal node).
fn collect_members(
    st: &SuffixTree,
    hpd: &HeavyPaths,
    ul: u32,
    sa: &SuffixArray,
    inf: u32,
    clean_right: &[u32],
) -> Vec<(u32, u32)> {
    let mut members = Vec::new();
    let mut work: Vec<(u32, Option<u32>)> = vec![(ul, None)];
    while let Some((w, departed)) = work.pop() {
        if let Some((lo, hi)) = st.covered(w) {
            let base = match departed {
                Some(d) => d,
                None => sd_coord(st, w, inf),
            };
            for rank in lo..=hi {
                let p = sa.at(rank as usize) as u32;
                debug_assert!(
                    base == inf || base <= clean_right[p as usize],
                    "heavy extensions never cross a marker"
                );
                members.push((p, base));
            }
        }
        let h = hpd.heavy_child(w);
        for &c in st.children(w) {
            let tag = match departed {
                Some(d) => Some(d),
                None if c == h => None,
                None => Some(st.depth(w)),
            };
            work.push((c, tag));
        }
    }
    members
}

fn build_over(s: Text, original_n: u32, z: u32, bound: Option<u32>) -> CpcIndex {
    let n = s.n();
    let inf = n as u32 + 1;
    let sa = SuffixArray::build(&s);
    let isa = sa.invert();
    let lcp = LcpArray::build(&s, &sa, &isa);
    let full = SuffixTree::build(&s, &sa, &lcp);
    let st = if s.as_bytes().contains(&s.hash()) {
        full.cut_at_marker(s.as_bytes(), s.hash())
    } else {
        full
    };
    let hpd = decompose(&st);
    let rc = ReverseContext::new(&s);
    let caps = left_clean_caps(&s);
    let clean_right = right_clean_runs(&s, inf);

    let mut d1_pts: Vec<[u32; 5]> = Vec::new();
    let mut d2_pts: Vec<[u32; 5]> = Vec::new();
    let mut d3: Vec<RangeCounter<3>> = Vec::with_capacity(hpd.lights().len());
    let mut light_slot = vec![u32::MAX; st.node_count()];

    for (slot, &ul) in hpd.lights().iter().enumerate() {
        light_slot[ul as usize] = slot as u32;
        let members = collect_members(&st, &hpd, ul, &sa, inf, &clean_right);
        let pt = build_prefix_tree(&members, &rc, &caps, inf);
        let pre = st.preorder(ul);
        let sdp1_ul = if ul == st.root() { 0 } else { st.depth(st.parent(ul)) + 1 };
        let sd_ul = sd_coord(&st, ul, inf);
        let internal = !st.is_leaf(ul);
        let mut pts3: Vec<[u32; 3]> = Vec::new();
        for v in 0..pt.len() {
            if !pt.alive(v) {
                continue;
            }
            d1_pts.push([pre, sdp1_ul, sd_ul, pt.sdp1[v], pt.sd[v]]);
            // A witness strictly below ul needs the right extension to pass
            // ul, which the query's depth m+r > sd(ul) already implies, so
            // readings whose extension ends at ul count for nothing there.
            if internal && pt.phi[v] > sd_ul {
                d2_pts.push([pre, sd_ul + 1, pt.phi[v], pt.sdp1[v], pt.sd[v]]);
                pts3.push([pt.sdp1[v], pt.sd[v], pt.phi[v]]);
            }
        }
        d3.push(RangeCounter::build(pts3));
    }

    CpcIndex {
        s,
        original_n,
        z,
        bound,
        st,
        hpd,
        d1: RangeCounter::build(d1_pts),
        d2: RangeCounter::build(d2_pts),
        d3,
        light_slot,
        inf,
    }
}

/// Index over the text itself; answers any extents.
pub fn build_index(t: &Text) -> CpcIndex {
    build_over(t.clone(), t.n() as u32, 0, None)
}

/// Index over the reduced string; answers queries with l+|P|+r <= bound.
pub fn build_optimized_index(t: &Text, bound: u32) -> Result<CpcIndex, IndexError> {
    if bound == 0 {
        return Err(IndexError::ZeroBound);
    }
    let f = factorize(t);
    let ms = build_modified_string(t, &f, bound);
    Ok(build_over(ms.text().clone(), t.n() as u32, f.z() as u32, Some(bound)))
}

impl CpcIndex {
    pub fn bound(&self) -> Option<u32> {
        self.bound
    }

    pub fn indexed_len(&self) -> usize {
        self.s.n()
    }

    pub fn original_len(&self) -> u32 {
        self.original_n
    }

    pub fn parse_size(&self) -> u32 {
        self.z
    }

    pub fn total_points(&self) -> u64 {
        self.d1.total() + self.d2.total() + self.d3.iter().map(|c| c.total()).sum::<u64>()
    }

    pub fn light_count(&self) -> usize {
        self.d3.len()
    }

    /// Largest number of light nodes on any root-to-leaf path of the parse
    /// tree, the quantity bounded by the decomposition's log guarantee.
    pub fn max_lights_on_path(&self) -> u32 {
        self.hpd.max_lights_on_path(&self.st)
    }

    /// Distinct marker-free length-`m` windows of the stored string, in
    /// lexicographic order. For an unreduced index these are exactly the
    /// distinct length-`m` substrings of the original text; a reduced index
    /// yields the same set whenever `m` is at most the bound, because every
    /// substring has an occurrence inside some kept window.
    pub fn distinct_windows(&self, m: usize) -> Vec<Vec<u8>> {
        let hash = self.s.hash();
        crate::mine::distinct_windows(&self.s, m)
            .into_iter()
            .filter(|w| !w.contains(&hash))
            .collect()
    }

    pub fn count(&self, p: &[u8], l: usize, r: usize) -> Result<u64, IndexError> {
        self.count_with_parts(p, l, r).map(|(c, _)| c)
    }

    pub fn count_with_parts(
        &self,
        p: &[u8],
        l: usize,
        r: usize,
    ) -> Result<(u64, QueryParts), IndexError> {
        if p.is_empty() {
            return Err(IndexError::EmptyPattern);
        }
        if let Some(b) = self.bound {
            let need = l as u64 + p.len() as u64 + r as u64;
            if need > b as u64 {
                return Err(IndexError::BoundExceeded { need, bound: b });
            }
        }
        let zero = QueryParts { q1: 0, q2: 0, q3: 0 };
        let Some(u) = self.st.locus(self.s.as_bytes(), p) else {
            return Ok((0, zero));
        };
        let mr = (p.len() as u64 + r as u64).min(self.inf as u64) as u32;
        let ll = (l as u64).min(self.inf as u64) as u32;
        let pre = self.st.preorder(u);
        let mx = self.st.max_preorder(u);
        const MAX: u32 = u32::MAX;
        let q1 = self.d1.count(&[pre, 0, mr, 0, ll], &[mx, mr, MAX, ll, MAX]);
        let q2 = self.d2.count(&[pre, 0, mr, 0, ll], &[mx, mr, MAX, ll, MAX]);
        let q3 = if self.hpd.is_light(u) {
            0
        } else {
            let slot = self.light_slot[self.hpd.lowest_light(u) as usize];
            self.d3[slot as usize].count(&[0, ll, mr], &[ll, MAX, MAX])
        };
        Ok((q1 + q2 + q3, QueryParts { q1, q2, q3 }))
    }
}

/// Reference index: a point per (node, reading-trie node) pair and one
/// rectangle per query. Quadratic, so only small texts are accepted.
pub struct SimpleIndex {
    s: Text,
    st: SuffixTree,
    d: RangeCounter<5>,
    inf: u32,
}

pub fn build_simple_index(t: &Text) -> Result<SimpleIndex, IndexError> {
    let n = t.n();
    if n > SIMPLE_INDEX_MAX_N {
        return Err(IndexError::SizeGuard { n, max: SIMPLE_INDEX_MAX_N });
    }
    let sa = SuffixArray::build(t);
    let isa = sa.invert();
    let lcp = LcpArray::build(t, &sa, &isa);
    let st = SuffixTree::build(t, &sa, &lcp);
    let rc = ReverseContext::new(t);
    let caps = left_clean_caps(t);
    let inf = n as u32 + 1;
    let mut pts: Vec<[u32; 5]> = Vec::new();
    for u in st.preorder_nodes() {
        let (lo, hi) = st.rank_span(u);
        let members: Vec<(u32, u32)> =
            (lo..=hi).map(|rk| (sa.at(rk as usize) as u32, 0)).collect();
        let pt: PrefixTree = build_prefix_tree(&members, &rc, &caps, inf);
        let pre = st.preorder(u);
        let sdp1_u = if u == st.root() { 0 } else { st.depth(st.parent(u)) + 1 };
        let sd_u = sd_coord(&st, u, inf);
        for v in 0..pt.len() {
            if pt.alive(v) {
                pts.push([pre, sdp1_u, sd_u, pt.sdp1[v], pt.sd[v]]);
            }
        }
    }
    Ok(SimpleIndex { s: t.clone(), st, d: RangeCounter::build(pts), inf })
}

impl SimpleIndex {
    pub fn count(&self, p: &[u8], l: usize, r: usize) -> Result<u64, IndexError> {
        if p.is_empty() {
            return Err(IndexError::EmptyPattern);
        }
        let Some(u) = self.st.locus(self.s.as_bytes(), p) else {
            return Ok(0);
        };
        let mr = (p.len() as u64 + r as u64).min(self.inf as u64) as u32;
        let ll = (l as u64).min(self.inf as u64) as u32;
        const MAX: u32 = u32::MAX;
        Ok(self.d.count(
            &[self.st.preorder(u), 0, mr, 0, ll],
            &[self.st.max_preorder(u), mr, MAX, ll, MAX],
        ))
    }

    pub fn total_points(&self) -> u64 {
        self.d.total()
    }
}

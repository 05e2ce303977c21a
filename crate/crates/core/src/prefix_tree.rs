//! Compact tries over the leftward readings of member positions.
//!
//! The reading of a member position p spells the text before p from right
//! to left and ends with the terminator, so it is exactly a suffix of the
//! reversed text. A reading is kept only up to the first excision marker:
//! a capped member stops there (its longer left contexts are not clean and
//! some other occurrence serves them), while an uncapped member's reading
//! is a complete reversed prefix and matches left extents of any length,
//! which its depth coordinate records as the unbounded value.
//!
//! Each trie node v covers the band of extents (depth(parent(v)), depth(v)]:
//! for extents l in that band the distinct left string of every member below
//! v is the length-l prefix of v's path, counted once per node. Counting
//! structures therefore need only three numbers per node: the band's lower
//! end `sdp1`, its upper end `sd` (unbounded for uncapped leaves), and the
//! subtree maximum `phi` of the member values supplied by the caller. A
//! node whose band is empty (`sdp1 > sd`) arises when a capped reading ends
//! exactly at an existing branching depth; it counts nothing itself and
//! only feeds its `phi` upward.

use crate::suffix::{invert_raw, kasai_raw, suffix_array_raw, Lce};
use crate::text::{reverse_text, Text};

/// Shared reverse-side structures: suffix ranks and longest common
/// extensions of the reversed text, giving reading order and pairwise
/// shared-reading lengths in constant time.
pub(crate) struct ReverseContext {
    rank: Vec<u32>,
    lce: Lce,
    n: usize,
}

impl ReverseContext {
    pub(crate) fn new(s: &Text) -> ReverseContext {
        let y = reverse_text(s);
        let pos = suffix_array_raw(y.as_bytes());
        let rank = invert_raw(&pos);
        let lcp = kasai_raw(y.as_bytes(), &pos, &rank);
        let lce = Lce::from_raw(rank.clone(), &lcp);
        ReverseContext { rank, lce, n: s.n() }
    }

    /// Start of member p's reading inside the reversed text.
    fn start(&self, p: u32) -> usize {
        self.n + 1 - p as usize
    }

    pub(crate) fn rank_of(&self, p: u32) -> u32 {
        self.rank[self.start(p)]
    }

    /// Letters shared by the readings of members a and b (markers and the
    /// terminator are ordinary bytes here).
    pub(crate) fn shared(&self, a: u32, b: u32) -> usize {
        self.lce.lce(self.start(a), self.start(b))
    }
}

/// Clean letters immediately left of each position: `caps[p]` is the
/// distance from p back to the nearest excision marker strictly before it,
/// at most p-1. Slot 0 is unused.
pub(crate) fn left_clean_caps(s: &Text) -> Vec<u32> {
    let n = s.n();
    let mut caps = vec![0u32; n + 1];
    let mut last_marker = 0usize;
    for p in 1..=n {
        caps[p] = (p - 1 - last_marker) as u32;
        if s.letter(p) == s.hash() {
            last_marker = p;
        }
    }
    caps
}

/// Clean letters at and right of each position before the first excision
/// marker, or `inf` when no marker follows. Slot 0 is unused.
pub(crate) fn right_clean_runs(s: &Text, inf: u32) -> Vec<u32> {
    let n = s.n();
    let mut out = vec![0u32; n + 1];
    let mut next_marker: Option<usize> = None;
    for p in (1..=n).rev() {
        if s.letter(p) == s.hash() {
            next_marker = Some(p);
        }
        out[p] = match next_marker {
            Some(q) => (q - p) as u32,
            None => inf,
        };
    }
    out
}

pub(crate) struct PrefixTree {
    /// Band lower end: parent's structural depth plus one (root: 0).
    pub(crate) sdp1: Vec<u32>,
    /// Band upper end: structural depth, or `inf` for uncapped leaves.
    pub(crate) sd: Vec<u32>,
    /// Subtree maximum of the member values.
    pub(crate) phi: Vec<u32>,
}

impl PrefixTree {
    pub(crate) fn len(&self) -> usize {
        self.sdp1.len()
    }

    pub(crate) fn alive(&self, v: usize) -> bool {
        self.sdp1[v] <= self.sd[v]
    }
}

/// Builds the trie for `members` (pairs of position and phi value) by
/// inserting readings in rank order with a stack of the rightmost path.
/// Adjacent shared lengths are capped at both members' effective lengths;
/// marker bytes inside readings make capped strings self-delimiting, so
/// rank order is insertion order for the truncated strings as well.
pub(crate) fn build_prefix_tree(
    members: &[(u32, u32)],
    rc: &ReverseContext,
    caps: &[u32],
    inf: u32,
) -> PrefixTree {
    let mut ms: Vec<(u32, u32)> = members.to_vec();
    ms.sort_by_key(|&(p, _)| rc.rank_of(p));

    // Effective reading length and depth coordinate: a clean reading keeps
    // its terminator (length p) and an unbounded coordinate, a capped one
    // stops at the clean-run length.
    let eff = |p: u32| -> (u32, u32) {
        let cap = caps[p as usize];
        if cap >= p - 1 {
            (p, inf)
        } else {
            (cap, cap)
        }
    };

    let mut parent = vec![0u32];
    let mut depth = vec![0u32];
    let mut sdp1 = vec![0u32];
    let mut sd = vec![0u32];
    let mut phi = vec![0u32];
    let mut stack: Vec<u32> = vec![0];
    let mut prev: Option<(u32, u32)> = None;

    for &(p, member_phi) in &ms {
        let (len, sd_coord) = eff(p);
        let lcp = match prev {
            None => 0,
            Some((q, qlen)) => (rc.shared(q, p) as u32).min(qlen).min(len),
        };
        prev = Some((p, len));

        let mut last_popped = u32::MAX;
        while depth[*stack.last().unwrap() as usize] > lcp {
            last_popped = stack.pop().unwrap();
        }
        let top = *stack.last().unwrap();
        let attach = if depth[top as usize] == lcp {
            top
        } else {
            debug_assert_ne!(last_popped, u32::MAX);
            let mid = parent.len() as u32;
            parent.push(top);
            depth.push(lcp);
            sdp1.push(depth[top as usize] + 1);
            sd.push(lcp);
            phi.push(0);
            parent[last_popped as usize] = mid;
            sdp1[last_popped as usize] = lcp + 1;
            stack.push(mid);
            mid
        };

        let leaf = parent.len() as u32;
        parent.push(attach);
        depth.push(len);
        sdp1.push(depth[attach as usize] + 1);
        sd.push(sd_coord);
        phi.push(member_phi);
        stack.push(leaf);
    }

    // Fold phi toward the root. A child is never structurally shallower
    // than its parent and within equal depth it was created later, so
    // (depth desc, id desc) visits children first.
    let count = parent.len();
    let mut order: Vec<u32> = (1..count as u32).collect();
    order.sort_by(|&a, &b| (depth[b as usize], b).cmp(&(depth[a as usize], a)));
    for &v in &order {
        let pa = parent[v as usize] as usize;
        if phi[v as usize] > phi[pa] {
            phi[pa] = phi[v as usize];
        }
    }

    PrefixTree { sdp1, sd, phi }
}

//! Compact suffix trees built from a suffix array plus LCP table, with
//! support for cutting every branch at the first excision marker.
//!
//! Nodes live in one flat vector; ids are indices into it and the root is
//! node 0. Children are kept in increasing order of their first edge letter,
//! so a preorder walk enumerates leaves in suffix-array order. Preorder ranks
//! are 1-based.
//!
//! Leaves carry the inclusive range of suffix-array ranks they stand for: a
//! plain leaf covers exactly its own rank, while a leaf created by cutting an
//! edge covers every rank that sat below the cut.

use crate::suffix::{LcpArray, SuffixArray};
use crate::text::Text;

pub const NO_NODE: u32 = u32::MAX;

/// String depth with the convention that a full suffix leaf is unbounded:
/// an occurrence that runs into the end of the text supports right contexts
/// of any requested length (they come out truncated but still distinct).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StringDepth {
    Finite(u32),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    /// The path spells a complete suffix, terminator included.
    Full,
    /// The path was cut just before an excision marker; depth is finite.
    Cut,
}

#[derive(Clone, Debug)]
struct Node {
    parent: u32,
    /// 1-based start of the edge label in the indexed string.
    edge_start: u32,
    edge_len: u32,
    /// Finite string depth; for `Full` leaves this is the suffix length.
    depth: u32,
    children: Vec<u32>,
    leaf: Option<(LeafKind, u32, u32)>,
}

#[derive(Clone, Debug)]
pub struct SuffixTree {
    text_len: usize,
    nodes: Vec<Node>,
    /// 1-based preorder rank per node.
    preorder: Vec<u32>,
    /// Node id per preorder rank (inverse of `preorder`).
    order: Vec<u32>,
    /// Largest preorder rank in each node's subtree.
    max_pre: Vec<u32>,
    /// Smallest / largest covered suffix-array rank in each subtree.
    rank_lo: Vec<u32>,
    rank_hi: Vec<u32>,
}

impl SuffixTree {
    /// Builds the suffix tree of `t` by left-to-right insertion of ranks.
    pub fn build(t: &Text, sa: &SuffixArray, lcp: &LcpArray) -> SuffixTree {
        let n = t.n();
        let mut nodes: Vec<Node> = Vec::with_capacity(2 * n);
        nodes.push(Node {
            parent: NO_NODE,
            edge_start: 0,
            edge_len: 0,
            depth: 0,
            children: Vec::new(),
            leaf: None,
        });
        let mut stack: Vec<u32> = vec![0];

        for r in 1..=n {
            let pos = sa.at(r) as u32;
            let leaf_depth = (n as u32) - pos + 1;
            let l = if r == 1 { 0 } else { lcp.at(r) };
            debug_assert!(l < leaf_depth, "terminator keeps suffixes prefix-free");

            let mut last_popped = NO_NODE;
            while nodes[*stack.last().unwrap() as usize].depth > l {
                last_popped = stack.pop().unwrap();
            }
            let top = *stack.last().unwrap();
            let attach = if nodes[top as usize].depth == l {
                top
            } else {
                // Split the edge between `top` and the node just popped.
                let mid = nodes.len() as u32;
                let cut = l - nodes[top as usize].depth;
                let child = last_popped;
                debug_assert_ne!(child, NO_NODE);
                let child_edge_start = nodes[child as usize].edge_start;
                nodes.push(Node {
                    parent: top,
                    edge_start: child_edge_start,
                    edge_len: cut,
                    depth: l,
                    children: vec![child],
                    leaf: None,
                });
                let c = &mut nodes[child as usize];
                c.parent = mid;
                c.edge_start += cut;
                c.edge_len -= cut;
                let slot = nodes[top as usize].children.last_mut().unwrap();
                debug_assert_eq!(*slot, child);
                *slot = mid;
                stack.push(mid);
                mid
            };

            let leaf = nodes.len() as u32;
            nodes.push(Node {
                parent: attach,
                edge_start: pos + l,
                edge_len: leaf_depth - l,
                depth: leaf_depth,
                children: Vec::new(),
                leaf: Some((LeafKind::Full, r as u32, r as u32)),
            });
            nodes[attach as usize].children.push(leaf);
            stack.push(leaf);
        }

        SuffixTree::finish(t.n(), nodes)
    }

    pub fn from_text(t: &Text) -> SuffixTree {
        let sa = SuffixArray::build(t);
        let isa = sa.invert();
        let lcp = LcpArray::build(t, &sa, &isa);
        SuffixTree::build(t, &sa, &lcp)
    }

    /// Derives the tree with every path cut just before its first `marker`
    /// byte. An edge with the marker mid-label becomes a `Cut` leaf covering
    /// the removed subtree's ranks. An edge whose label starts with the
    /// marker is removed entirely, but its subtree's ranks strand on the
    /// parent: suffixes whose clean run ends exactly at a branching node
    /// keep their coverage there, carried as `Cut` rank data on an internal
    /// node. Only valid on a tree whose leaves each cover a single rank.
    pub fn cut_at_marker(&self, s: &[u8], marker: u8) -> SuffixTree {
        let mut nodes: Vec<Node> = Vec::with_capacity(self.nodes.len());
        nodes.push(Node {
            parent: NO_NODE,
            edge_start: 0,
            edge_len: 0,
            depth: 0,
            children: Vec::new(),
            leaf: None,
        });
        // (old node, new parent); explicit stack keeps child order by
        // pushing in reverse.
        let mut work: Vec<(u32, u32)> = Vec::new();
        for &c in self.nodes[0].children.iter().rev() {
            work.push((c, 0));
        }
        while let Some((old, np)) = work.pop() {
            let o = &self.nodes[old as usize];
            let label = &s[(o.edge_start - 1) as usize..(o.edge_start - 1 + o.edge_len) as usize];
            let hit = label.iter().position(|&b| b == marker);
            match hit {
                Some(0) => {
                    // At most one child per node starts with the marker, so
                    // the parent cannot already hold stranded ranks; full
                    // leaves are never parents.
                    debug_assert!(nodes[np as usize].leaf.is_none());
                    nodes[np as usize].leaf =
                        Some((LeafKind::Cut, self.rank_lo[old as usize], self.rank_hi[old as usize]));
                }
                Some(k) => {
                    let id = nodes.len() as u32;
                    let parent_depth = nodes[np as usize].depth;
                    nodes.push(Node {
                        parent: np,
                        edge_start: o.edge_start,
                        edge_len: k as u32,
                        depth: parent_depth + k as u32,
                        children: Vec::new(),
                        leaf: Some((LeafKind::Cut, self.rank_lo[old as usize], self.rank_hi[old as usize])),
                    });
                    nodes[np as usize].children.push(id);
                }
                None => {
                    let id = nodes.len() as u32;
                    nodes.push(Node {
                        parent: np,
                        edge_start: o.edge_start,
                        edge_len: o.edge_len,
                        depth: o.depth,
                        children: Vec::new(),
                        leaf: o.leaf,
                    });
                    nodes[np as usize].children.push(id);
                    for &c in o.children.iter().rev() {
                        work.push((c, id));
                    }
                }
            }
        }
        SuffixTree::finish(self.text_len, nodes)
    }

    /// Preorder numbering, subtree ends and covered rank spans.
    fn finish(text_len: usize, nodes: Vec<Node>) -> SuffixTree {
        let count = nodes.len();
        let mut st = SuffixTree {
            text_len,
            nodes,
            preorder: vec![0; count],
            order: vec![0; count],
            max_pre: vec![0; count],
            rank_lo: vec![u32::MAX; count],
            rank_hi: vec![0; count],
        };
        let mut next: u32 = 0;
        let mut stack: Vec<u32> = vec![0];
        while let Some(v) = stack.pop() {
            next += 1;
            st.preorder[v as usize] = next;
            st.order[next as usize - 1] = v;
            for &c in st.nodes[v as usize].children.iter().rev() {
                stack.push(c);
            }
        }
        debug_assert_eq!(next as usize, count);
        // Children have larger preorder than parents: walk ranks backwards.
        for r in (1..=count).rev() {
            let v = st.order[r - 1] as usize;
            let mut mp = st.preorder[v];
            let (mut lo, mut hi) = (u32::MAX, 0u32);
            if let Some((_, a, b)) = st.nodes[v].leaf {
                lo = a;
                hi = b;
            }
            for ci in 0..st.nodes[v].children.len() {
                let c = st.nodes[v].children[ci] as usize;
                mp = mp.max(st.max_pre[c]);
                lo = lo.min(st.rank_lo[c]);
                hi = hi.max(st.rank_hi[c]);
            }
            st.max_pre[v] = mp;
            st.rank_lo[v] = lo;
            st.rank_hi[v] = hi;
        }
        st
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn text_len(&self) -> usize {
        self.text_len
    }

    pub fn parent(&self, v: u32) -> u32 {
        self.nodes[v as usize].parent
    }

    /// Finite depth; for `Full` leaves this is the concrete suffix length.
    pub fn depth(&self, v: u32) -> u32 {
        self.nodes[v as usize].depth
    }

    pub fn string_depth(&self, v: u32) -> StringDepth {
        match self.nodes[v as usize].leaf {
            Some((LeafKind::Full, _, _)) => StringDepth::Infinite,
            _ => StringDepth::Finite(self.nodes[v as usize].depth),
        }
    }

    pub fn children(&self, v: u32) -> &[u32] {
        &self.nodes[v as usize].children
    }

    /// Structurally childless. Internal nodes of cut trees may still carry
    /// covered ranks; see [`SuffixTree::covered`].
    pub fn is_leaf(&self, v: u32) -> bool {
        self.nodes[v as usize].children.is_empty()
    }

    pub fn leaf_kind(&self, v: u32) -> Option<LeafKind> {
        self.nodes[v as usize].leaf.map(|(k, _, _)| k)
    }

    /// Inclusive suffix-array rank range whose clean runs end at this node:
    /// a leaf's own range, or ranks stranded on an internal node of a cut
    /// tree because their paths continued with a marker right below it.
    pub fn covered(&self, v: u32) -> Option<(u32, u32)> {
        self.nodes[v as usize].leaf.map(|(_, a, b)| (a, b))
    }

    /// Smallest and largest covered rank in the subtree. Contiguous (and
    /// therefore the exact leaf range) on trees without removed branches.
    pub fn rank_span(&self, v: u32) -> (u32, u32) {
        (self.rank_lo[v as usize], self.rank_hi[v as usize])
    }

    /// 1-based edge label interval into the indexed string.
    pub fn edge(&self, v: u32) -> (u32, u32) {
        let n = &self.nodes[v as usize];
        (n.edge_start, n.edge_len)
    }

    /// 1-based preorder rank; the root is 1.
    pub fn preorder(&self, v: u32) -> u32 {
        self.preorder[v as usize]
    }

    pub fn max_preorder(&self, v: u32) -> u32 {
        self.max_pre[v as usize]
    }

    pub fn node_at_preorder(&self, r: u32) -> u32 {
        self.order[r as usize - 1]
    }

    /// Rightmost (preorder-last) leaf of `v`'s subtree.
    pub fn rleaf(&self, v: u32) -> u32 {
        self.order[self.max_pre[v as usize] as usize - 1]
    }

    /// A 1-based position whose suffix starts with this node's path label.
    pub fn rep_pos(&self, v: u32) -> u32 {
        if v == 0 {
            return 1;
        }
        let n = &self.nodes[v as usize];
        n.edge_start - self.nodes[n.parent as usize].depth
    }

    /// Shallowest node whose path label has `pat` as a prefix.
    pub fn locus(&self, s: &[u8], pat: &[u8]) -> Option<u32> {
        let mut v = 0u32;
        let mut matched = 0usize;
        while matched < pat.len() {
            let want = pat[matched];
            let node = &self.nodes[v as usize];
            let child = *node
                .children
                .iter()
                .find(|&&c| s[(self.nodes[c as usize].edge_start - 1) as usize] == want)?;
            let c = &self.nodes[child as usize];
            let label = &s[(c.edge_start - 1) as usize..(c.edge_start - 1 + c.edge_len) as usize];
            let take = label.len().min(pat.len() - matched);
            if label[..take] != pat[matched..matched + take] {
                return None;
            }
            matched += take;
            v = child;
        }
        Some(v)
    }

    /// Walks the whole tree, visiting nodes in preorder.
    pub fn preorder_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.order.iter().copied()
    }

    /// Flat per-node image for serialization, in preorder. Children are not
    /// stored: a parent precedes its children in preorder and siblings keep
    /// their stored order, so re-attaching each record to its parent in file
    /// order reproduces every children vector. Parent references are 0-based
    /// preorder positions.
    pub(crate) fn to_records(&self) -> Vec<NodeRecord> {
        self.preorder_nodes()
            .map(|v| {
                let n = &self.nodes[v as usize];
                let (kind, cov_lo, cov_hi) = match n.leaf {
                    None => (0, 0, 0),
                    Some((LeafKind::Full, a, b)) => (1, a, b),
                    Some((LeafKind::Cut, a, b)) if n.children.is_empty() => (2, a, b),
                    Some((LeafKind::Cut, a, b)) => (3, a, b),
                };
                let parent = if n.parent == NO_NODE {
                    NO_NODE
                } else {
                    self.preorder[n.parent as usize] - 1
                };
                NodeRecord {
                    parent,
                    edge_start: n.edge_start,
                    edge_len: n.edge_len,
                    kind,
                    cov_lo,
                    cov_hi,
                }
            })
            .collect()
    }

    /// Rebuilds a tree from records over a string of `text_len` bytes.
    /// Returns `None` when the records are structurally impossible.
    pub(crate) fn assemble(text_len: usize, recs: &[NodeRecord]) -> Option<SuffixTree> {
        let first = recs.first()?;
        if first.parent != NO_NODE || first.kind > 3 || first.kind == 1 || first.kind == 2 {
            return None;
        }
        if first.edge_len != 0 {
            return None;
        }
        let root_leaf = match first.kind {
            0 => None,
            _ => Some((LeafKind::Cut, first.cov_lo, first.cov_hi)),
        };
        if matches!(root_leaf, Some((_, a, b)) if a > b || a == 0) {
            return None;
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(recs.len());
        nodes.push(Node {
            parent: NO_NODE,
            edge_start: first.edge_start,
            edge_len: 0,
            depth: 0,
            children: Vec::new(),
            leaf: root_leaf,
        });
        // Kinds 1 and 2 are structural leaves and cannot parent anything.
        let mut childless = vec![first.kind == 1 || first.kind == 2];
        for (id, r) in recs.iter().enumerate().skip(1) {
            let ok = (r.parent as usize) < id
                && r.kind <= 3
                && r.edge_len >= 1
                && r.edge_start >= 1
                && r.edge_start as u64 - 1 + r.edge_len as u64 <= text_len as u64
                && !childless[r.parent as usize];
            if !ok {
                return None;
            }
            let depth = nodes[r.parent as usize].depth.checked_add(r.edge_len)?;
            let leaf = match r.kind {
                0 => None,
                1 => Some((LeafKind::Full, r.cov_lo, r.cov_hi)),
                _ => Some((LeafKind::Cut, r.cov_lo, r.cov_hi)),
            };
            if matches!(leaf, Some((_, a, b)) if a > b || a == 0) {
                return None;
            }
            nodes.push(Node {
                parent: r.parent,
                edge_start: r.edge_start,
                edge_len: r.edge_len,
                depth,
                children: Vec::new(),
                leaf,
            });
            childless.push(r.kind == 1 || r.kind == 2);
            nodes[r.parent as usize].children.push(id as u32);
        }
        Some(SuffixTree::finish(text_len, nodes))
    }
}

/// Serialized form of one node; see [`SuffixTree::to_records`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct NodeRecord {
    pub parent: u32,
    pub edge_start: u32,
    pub edge_len: u32,
    /// 0 internal, 1 full leaf, 2 cut leaf.
    pub kind: u8,
    pub cov_lo: u32,
    pub cov_hi: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{SentinelPolicy, Text};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn text(s: &[u8]) -> Text {
        Text::from_bytes(s, SentinelPolicy::AppendIfMissing).unwrap()
    }

    fn label(st: &SuffixTree, s: &[u8], v: u32) -> Vec<u8> {
        // Path label from the root, rebuilt edge by edge.
        let mut parts: Vec<(u32, u32)> = Vec::new();
        let mut w = v;
        while w != st.root() {
            parts.push(st.edge(w));
            w = st.parent(w);
        }
        parts.reverse();
        let mut out = Vec::new();
        for (es, el) in parts {
            out.extend_from_slice(&s[(es - 1) as usize..(es - 1 + el) as usize]);
        }
        out
    }

    #[test]
    fn banana_shape_and_preorders() {
        let t = text(b"banana");
        let st = SuffixTree::from_text(&t);
        assert_eq!(st.node_count(), 11);
        let s = t.as_bytes();

        let u1 = st.locus(s, b"a").unwrap();
        assert_eq!(st.preorder(u1), 3);
        assert_eq!(st.depth(u1), 1);
        assert_eq!(st.rank_span(u1), (2, 4));
        assert_eq!(st.preorder(st.rleaf(u1)), 7);

        let u2 = st.locus(s, b"an").unwrap();
        assert_eq!(st.depth(u2), 3);
        assert_eq!(label(&st, s, u2), b"ana");
        assert_eq!(st.preorder(u2), 5);

        assert_eq!(st.locus(s, b"nana").map(|v| st.string_depth(v)), Some(StringDepth::Infinite));
        assert_eq!(st.locus(s, b"x"), None);
        assert_eq!(st.locus(s, b"annn"), None);
        assert_eq!(st.locus(s, b""), Some(st.root()));
    }

    #[test]
    fn string_depth_orders_infinite_last() {
        assert!(StringDepth::Finite(7) < StringDepth::Infinite);
        assert!(StringDepth::Finite(3) < StringDepth::Finite(4));
    }

    fn verify_tree(t: &Text) {
        let st = SuffixTree::from_text(t);
        let s = t.as_bytes();
        let n = t.n();
        let sa = crate::suffix::SuffixArray::build(t);

        let mut leaf_ranks = Vec::new();
        for v in st.preorder_nodes() {
            let node_children = st.children(v);
            if let Some((a, b)) = st.covered(v) {
                assert_eq!(st.leaf_kind(v), Some(LeafKind::Full));
                assert_eq!(a, b);
                leaf_ranks.push(a);
                // A leaf's path label is exactly its suffix.
                assert_eq!(label(&st, s, v), &s[sa.at(a as usize) - 1..]);
            } else {
                if v != st.root() {
                    assert!(node_children.len() >= 2, "internal nodes branch");
                }
                // Children strictly ordered by first edge letter.
                let firsts: Vec<u8> = node_children
                    .iter()
                    .map(|&c| s[(st.edge(c).0 - 1) as usize])
                    .collect();
                for w in firsts.windows(2) {
                    assert!(w[0] < w[1]);
                }
                // Rank span is the concatenation of the children's spans.
                let (lo, hi) = st.rank_span(v);
                let mut expect = lo;
                for &c in node_children {
                    let (clo, chi) = st.rank_span(c);
                    assert_eq!(clo, expect);
                    expect = chi + 1;
                }
                assert_eq!(expect, hi + 1);
            }
            // Preorder interval [pre(v), max_pre(v)] is exactly the subtree.
            let (pre, mp) = (st.preorder(v), st.max_preorder(v));
            assert!(pre <= mp);
            if v != st.root() {
                let p = st.parent(v);
                assert!(st.preorder(p) < pre && mp <= st.max_preorder(p));
                assert_eq!(st.depth(v), st.depth(p) + st.edge(v).1);
            }
        }
        // Leaves appear in suffix-array order under preorder traversal.
        let expect: Vec<u32> = (1..=n as u32).collect();
        assert_eq!(leaf_ranks, expect);
    }

    #[test]
    fn random_trees_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for case in 0..30 {
            let n = 1 + (case * 11) % 80;
            let sigma = [1usize, 2, 4][case % 3];
            let raw: Vec<u8> = (0..n).map(|_| b'a' + rng.gen_range(0..sigma) as u8).collect();
            verify_tree(&text(&raw));
        }
    }

    #[test]
    fn cut_drops_marker_initial_edges() {
        // Marker '!' plays the excision byte; positions of '!' split paths.
        let t = text(b"ab!ab");
        let s = t.as_bytes();
        let st = SuffixTree::from_text(&t);
        let cut = st.cut_at_marker(s, b'!');
        // The "!ab$" suffix strands at the root; "ab!ab$" and "b!ab$" strand
        // on the "ab" and "b" nodes where their clean runs end. No nodes are
        // added or kept for the marker continuations themselves.
        assert_eq!(cut.node_count(), 6);
        let ab = cut.locus(s, b"ab").unwrap();
        assert_eq!(cut.children(ab).len(), 1);
        assert!(!cut.is_leaf(ab));
        assert_eq!(cut.leaf_kind(ab), Some(LeafKind::Cut));
        assert_eq!(cut.covered(ab), Some((4, 4)));
        assert_eq!(cut.covered(cut.root()), Some((2, 2)));
        let b = cut.locus(s, b"b").unwrap();
        assert_eq!(cut.covered(b), Some((6, 6)));
        assert!(cut.locus(s, b"ab!").is_none());
        assert!(cut.locus(s, b"!").is_none());
        for v in cut.preorder_nodes() {
            if cut.is_leaf(v) {
                assert_eq!(cut.leaf_kind(v), Some(LeafKind::Full));
            }
        }
    }

    #[test]
    fn cut_mid_edge_builds_covering_leaf() {
        let t = text(b"aa!a");
        let s = t.as_bytes();
        let st = SuffixTree::from_text(&t);
        let cut = st.cut_at_marker(s, b'!');
        // Path "aa" survives as a cut leaf of depth 2 covering one rank.
        let v = cut.locus(s, b"aa").unwrap();
        assert_eq!(cut.leaf_kind(v), Some(LeafKind::Cut));
        assert_eq!(cut.depth(v), 2);
        assert_eq!(cut.string_depth(v), StringDepth::Finite(2));
        assert_eq!(cut.covered(v), Some((5, 5)));
        assert!(cut.locus(s, b"aa!").is_none());
        // The plain "a$" suffix is still a full leaf.
        let a_dollar = cut.locus(s, &[b'a', t.dollar()]).unwrap();
        assert_eq!(cut.leaf_kind(a_dollar), Some(LeafKind::Full));
    }
}

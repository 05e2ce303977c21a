//! Heavy-path decomposition of suffix trees.
//!
//! Every non-leaf node points at the child with the most leaves below it
//! (ties go to the child with the smallest first edge letter, which is the
//! first child in stored order). A node is light if it is the root or not its
//! parent's heavy child. Following heavy children from any light node traces
//! that node's heavy path down to a leaf.

use crate::suffix_tree::{SuffixTree, NO_NODE};

pub struct HeavyPaths {
    heavy_child: Vec<u32>,
    light: Vec<bool>,
    /// Nearest light ancestor-or-self.
    lowest_light: Vec<u32>,
    /// For light nodes: the leaf terminating their heavy path.
    heavy_leaf: Vec<u32>,
    /// Light node ids in preorder.
    lights: Vec<u32>,
    leaf_count: Vec<u32>,
}

pub fn decompose(st: &SuffixTree) -> HeavyPaths {
    let count = st.node_count();
    let mut leaf_count = vec![0u32; count];
    for r in (1..=count as u32).rev() {
        let v = st.node_at_preorder(r);
        if st.is_leaf(v) {
            leaf_count[v as usize] = 1;
        }
        if v != st.root() {
            leaf_count[st.parent(v) as usize] += leaf_count[v as usize];
        }
    }

    let mut heavy_child = vec![NO_NODE; count];
    for v in 0..count as u32 {
        let mut best = NO_NODE;
        let mut best_count = 0u32;
        for &c in st.children(v) {
            // Strict comparison keeps the earliest (smallest-letter) child
            // on ties.
            if leaf_count[c as usize] > best_count {
                best = c;
                best_count = leaf_count[c as usize];
            }
        }
        heavy_child[v as usize] = best;
    }

    let mut light = vec![false; count];
    let mut lowest_light = vec![0u32; count];
    let mut lights = Vec::new();
    for r in 1..=count as u32 {
        let v = st.node_at_preorder(r);
        let is_light = v == st.root() || heavy_child[st.parent(v) as usize] != v;
        light[v as usize] = is_light;
        lowest_light[v as usize] =
            if is_light { v } else { lowest_light[st.parent(v) as usize] };
        if is_light {
            lights.push(v);
        }
    }

    let mut heavy_leaf = vec![NO_NODE; count];
    for &l in &lights {
        let mut w = l;
        while heavy_child[w as usize] != NO_NODE {
            w = heavy_child[w as usize];
        }
        heavy_leaf[l as usize] = w;
    }

    HeavyPaths { heavy_child, light, lowest_light, heavy_leaf, lights, leaf_count }
}

impl HeavyPaths {
    pub fn heavy_child(&self, v: u32) -> u32 {
        self.heavy_child[v as usize]
    }

    pub fn is_light(&self, v: u32) -> bool {
        self.light[v as usize]
    }

    pub fn lowest_light(&self, v: u32) -> u32 {
        self.lowest_light[v as usize]
    }

    /// Leaf ending the heavy path rooted at light node `v`.
    pub fn heavy_leaf(&self, v: u32) -> u32 {
        debug_assert!(self.light[v as usize]);
        self.heavy_leaf[v as usize]
    }

    pub fn lights(&self) -> &[u32] {
        &self.lights
    }

    pub fn leaf_count(&self, v: u32) -> u32 {
        self.leaf_count[v as usize]
    }

    /// Largest number of light nodes on any root-to-leaf path.
    pub fn max_lights_on_path(&self, st: &SuffixTree) -> u32 {
        let mut cnt = vec![0u32; st.node_count()];
        let mut best = 0;
        for r in 1..=st.node_count() as u32 {
            let v = st.node_at_preorder(r);
            let up = if v == st.root() { 0 } else { cnt[st.parent(v) as usize] };
            cnt[v as usize] = up + u32::from(self.light[v as usize]);
            if st.is_leaf(v) {
                best = best.max(cnt[v as usize]);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suffix_tree::SuffixTree;
    use crate::text::{SentinelPolicy, Text};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn text(s: &[u8]) -> Text {
        Text::from_bytes(s, SentinelPolicy::AppendIfMissing).unwrap()
    }

    #[test]
    fn banana_heavy_spine() {
        let t = text(b"banana");
        let st = SuffixTree::from_text(&t);
        let hp = decompose(&st);
        let s = t.as_bytes();
        let root = st.root();
        let u1 = st.locus(s, b"a").unwrap();
        let u2 = st.locus(s, b"ana").unwrap();
        assert!(hp.is_light(root));
        assert_eq!(hp.heavy_child(root), u1);
        assert!(!hp.is_light(u1));
        assert_eq!(hp.heavy_child(u1), u2);
        // Tie between the two leaves under "ana": smallest first letter is
        // the terminator edge, i.e. the "ana$" leaf.
        let hl = hp.heavy_leaf(root);
        assert_eq!(st.depth(hl), 4);
        assert_eq!(hp.lowest_light(u2), root);
        assert_eq!(hp.leaf_count(root), 7);
        assert_eq!(hp.leaf_count(u1), 3);
    }

    #[test]
    fn light_count_respects_log_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for case in 0..25 {
            let n = 2 + (case * 37) % 400;
            let sigma = [1usize, 2, 6][case % 3];
            let raw: Vec<u8> = (0..n).map(|_| b'a' + rng.gen_range(0..sigma) as u8).collect();
            let t = text(&raw);
            let st = SuffixTree::from_text(&t);
            let hp = decompose(&st);
            let bound = (t.n() as f64).log2().floor() as u32 + 1;
            assert!(
                hp.max_lights_on_path(&st) <= bound,
                "n={} lights={} bound={}",
                t.n(),
                hp.max_lights_on_path(&st),
                bound
            );
            // Exactly one heavy child per internal node; heavy paths
            // partition the node set.
            let mut on_path = vec![false; st.node_count()];
            for &l in hp.lights() {
                let mut w = l;
                loop {
                    assert!(!on_path[w as usize]);
                    on_path[w as usize] = true;
                    if hp.heavy_child(w) == crate::suffix_tree::NO_NODE {
                        break;
                    }
                    w = hp.heavy_child(w);
                }
            }
            assert!(on_path.iter().all(|&x| x));
        }
    }
}

//! Exact orthogonal range counting over multisets of integer points.
//!
//! Points are fixed-arity arrays of `u32`. Duplicates are collapsed into a
//! (point, multiplicity) pair at build time; queries are axis-aligned boxes
//! with inclusive bounds and report the total multiplicity inside. The
//! structure is a balanced spatial partition tree: each node halves its point
//! set at the median of the widest coordinate and stores its bounding box and
//! total count, so fully-contained boxes are answered without descending.
//!
//! Unbounded query ends are expressed as `0` / `u32::MAX`; depth sentinels
//! (one past the largest finite coordinate) are ordinary values here.

const LEAF_SIZE: usize = 64;
const NO_CHILD: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct TreeNode<const D: usize> {
    lo: [u32; D],
    hi: [u32; D],
    count: u64,
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

#[derive(Clone, Debug)]
pub struct RangeCounter<const D: usize> {
    pts: Vec<[u32; D]>,
    mult: Vec<u32>,
    nodes: Vec<TreeNode<D>>,
}

impl<const D: usize> RangeCounter<D> {
    /// Builds from an arbitrary multiset of points.
    pub fn build(mut pts: Vec<[u32; D]>) -> RangeCounter<D> {
        pts.sort_unstable();
        let mut dedup: Vec<[u32; D]> = Vec::new();
        let mut mult: Vec<u32> = Vec::new();
        for p in pts {
            if dedup.last() == Some(&p) {
                *mult.last_mut().unwrap() += 1;
            } else {
                dedup.push(p);
                mult.push(1);
            }
        }
        RangeCounter::from_collapsed(dedup, mult)
    }

    /// Builds from already collapsed (sorted, distinct) points. Used when
    /// deserializing; the invariants are the serializer's responsibility.
    pub(crate) fn from_collapsed(pts: Vec<[u32; D]>, mult: Vec<u32>) -> RangeCounter<D> {
        debug_assert_eq!(pts.len(), mult.len());
        debug_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let mut rc = RangeCounter { pts, mult, nodes: Vec::new() };
        if !rc.pts.is_empty() {
            let mut idx: Vec<u32> = (0..rc.pts.len() as u32).collect();
            rc.build_node(&mut idx, 0);
            // Rearrange the collapsed arrays into tree order so leaves scan
            // contiguous slices.
            let pts = std::mem::take(&mut rc.pts);
            let mult = std::mem::take(&mut rc.mult);
            rc.pts = idx.iter().map(|&i| pts[i as usize]).collect();
            rc.mult = idx.iter().map(|&i| mult[i as usize]).collect();
        }
        rc
    }

    fn build_node(&mut self, idx: &mut [u32], offset: usize) -> u32 {
        let mut lo = [u32::MAX; D];
        let mut hi = [0u32; D];
        let mut count = 0u64;
        for &i in idx.iter() {
            let p = &self.pts[i as usize];
            for d in 0..D {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
            count += self.mult[i as usize] as u64;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(TreeNode {
            lo,
            hi,
            count,
            start: offset as u32,
            end: (offset + idx.len()) as u32,
            left: NO_CHILD,
            right: NO_CHILD,
        });
        if idx.len() > LEAF_SIZE {
            // Split the widest dimension; points are distinct so the
            // (coordinate, point) key is a total order.
            let mut dim = 0;
            for d in 1..D {
                if hi[d] - lo[d] > hi[dim] - lo[dim] {
                    dim = d;
                }
            }
            let mid = idx.len() / 2;
            let pts = &self.pts;
            idx.select_nth_unstable_by_key(mid, |&i| (pts[i as usize][dim], pts[i as usize]));
            let (a, b) = idx.split_at_mut(mid);
            let left = self.build_node(a, offset);
            let right = self.build_node(b, offset + mid);
            self.nodes[id as usize].left = left;
            self.nodes[id as usize].right = right;
        }
        id
    }

    /// Total multiplicity inside the inclusive box `[lo, hi]`.
    pub fn count(&self, lo: &[u32; D], hi: &[u32; D]) -> u64 {
        if self.nodes.is_empty() {
            return 0;
        }
        self.count_node(0, lo, hi)
    }

    fn count_node(&self, id: u32, lo: &[u32; D], hi: &[u32; D]) -> u64 {
        let node = &self.nodes[id as usize];
        let mut inside = true;
        for d in 0..D {
            if node.lo[d] > hi[d] || node.hi[d] < lo[d] {
                return 0;
            }
            inside &= lo[d] <= node.lo[d] && node.hi[d] <= hi[d];
        }
        if inside {
            return node.count;
        }
        if node.left == NO_CHILD {
            let mut c = 0u64;
            for i in node.start..node.end {
                let p = &self.pts[i as usize];
                if (0..D).all(|d| lo[d] <= p[d] && p[d] <= hi[d]) {
                    c += self.mult[i as usize] as u64;
                }
            }
            return c;
        }
        self.count_node(node.left, lo, hi) + self.count_node(node.right, lo, hi)
    }

    /// Total multiplicity stored.
    pub fn total(&self) -> u64 {
        self.nodes.first().map_or(0, |n| n.count)
    }

    pub fn distinct_points(&self) -> usize {
        self.pts.len()
    }

    /// Collapsed points in the internal order, paired with multiplicities.
    /// The order is deterministic for a given build input.
    pub(crate) fn collapsed(&self) -> (Vec<[u32; D]>, Vec<u32>) {
        let mut pairs: Vec<([u32; D], u32)> =
            self.pts.iter().copied().zip(self.mult.iter().copied()).collect();
        pairs.sort_unstable();
        (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }
}

/// Linear-scan reference used by tests and the checking subcommand.
pub fn scan_count<const D: usize>(pts: &[[u32; D]], lo: &[u32; D], hi: &[u32; D]) -> u64 {
    pts.iter().filter(|p| (0..D).all(|d| lo[d] <= p[d] && p[d] <= hi[d])).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn six_point_plane_fixture() {
        let pts: Vec<[u32; 2]> = vec![[1, 1], [1, 3], [2, 2], [4, 1], [4, 2], [5, 3]];
        let rc = RangeCounter::build(pts);
        assert_eq!(rc.count(&[1, 1], &[3, 3]), 3);
        assert_eq!(rc.count(&[0, 0], &[u32::MAX, u32::MAX]), 6);
        assert_eq!(rc.count(&[6, 0], &[9, 9]), 0);
        assert_eq!(rc.count(&[4, 1], &[4, 1]), 1);
    }

    #[test]
    fn duplicates_count_with_multiplicity() {
        let pts: Vec<[u32; 3]> = vec![[5, 2, 3], [5, 2, 3], [1, 1, 1]];
        let rc = RangeCounter::build(pts);
        assert_eq!(rc.count(&[5, 2, 3], &[5, 2, 3]), 2);
        assert_eq!(rc.total(), 3);
        assert_eq!(rc.distinct_points(), 2);
    }

    #[test]
    fn empty_and_single() {
        let rc = RangeCounter::<5>::build(Vec::new());
        assert_eq!(rc.count(&[0; 5], &[u32::MAX; 5]), 0);
        let rc = RangeCounter::build(vec![[7u32, 7, 7, 7, 7]]);
        assert_eq!(rc.count(&[7; 5], &[7; 5]), 1);
        assert_eq!(rc.count(&[8; 5], &[9; 5]), 0);
    }

    fn random_check<const D: usize>(seed: u64, n_pts: usize, coord_max: u32, queries: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<[u32; D]> = (0..n_pts)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0..=coord_max)))
            .collect();
        let rc = RangeCounter::build(pts.clone());
        for _ in 0..queries {
            let mut lo = [0u32; D];
            let mut hi = [0u32; D];
            for d in 0..D {
                let a = rng.gen_range(0..=coord_max);
                let b = rng.gen_range(0..=coord_max);
                lo[d] = a.min(b);
                hi[d] = a.max(b);
            }
            assert_eq!(rc.count(&lo, &hi), scan_count(&pts, &lo, &hi));
        }
    }

    #[test]
    fn random_queries_match_scan() {
        random_check::<2>(41, 500, 30, 300);
        random_check::<3>(42, 800, 12, 300);
        random_check::<5>(43, 1200, 8, 300);
        // Heavy duplication.
        random_check::<3>(44, 2000, 3, 300);
    }
}

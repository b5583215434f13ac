//! Loose-similarity multi-pass recovery (the baseline).
//!
//! A pass walks the remaining edges in rank order, recovers every edge that
//! no earlier recovery of the same pass has marked, and marks each later edge
//! with an endpoint in the recovered edge's cover. Marks reset between
//! passes. Passes repeat until the budget is met.

use super::{clamp_budget, OffTreeEdge, RecoveryResult};
use crate::treeindex::TreeIndex;

/// Union of the covers recovered so far in one pass.
///
/// An edge is marked exactly when one of its endpoints is covered, because
/// every recovered edge precedes the edges it marks. `reach[v]` is the largest
/// number of hops still available when some cover reached `v`, which lets the
/// flood skip regions that are already covered at least as far.
struct CoverSet {
    reach: Vec<i32>,
    touched: Vec<usize>,
    stack: Vec<(usize, i32)>,
}

impl CoverSet {
    fn new(n: usize) -> Self {
        CoverSet {
            reach: vec![-1; n],
            touched: Vec::new(),
            stack: Vec::new(),
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.reach[v] >= 0
    }

    fn cover_ball(&mut self, idx: &TreeIndex, center: usize, radius: usize) {
        let radius = radius.min(i32::MAX as usize) as i32;
        self.stack.push((center, radius));
        while let Some((x, hops)) = self.stack.pop() {
            if self.reach[x] >= hops {
                continue;
            }
            if self.reach[x] < 0 {
                self.touched.push(x);
            }
            self.reach[x] = hops;
            if hops == 0 {
                continue;
            }
            let p = idx.parent(x);
            if p != crate::NONE {
                self.stack.push((p, hops - 1));
            }
            for &c in idx.children(x) {
                self.stack.push((c, hops - 1));
            }
        }
    }

    fn clear(&mut self) {
        for &v in &self.touched {
            self.reach[v] = -1;
        }
        self.touched.clear();
    }
}

/// Multi-pass recovery under loose similarity with fixed radius `c`.
///
/// `recovered` lists edges in recovery order (pass by pass, rank order
/// within a pass) and `marked_counts` holds one entry per pass.
pub fn recover_loose_multipass(sorted: &[OffTreeEdge], idx: &TreeIndex, budget: usize, c: usize) -> RecoveryResult {
    let budget = clamp_budget(budget, sorted.len());
    let mut result = RecoveryResult {
        budget,
        ..Default::default()
    };
    let mut remaining: Vec<usize> = (0..sorted.len()).collect();
    let mut cover = CoverSet::new(idx.n_vertices());
    let mut taken = vec![false; sorted.len()];

    while result.recovered.len() < budget && !remaining.is_empty() {
        result.passes += 1;
        for &r in &remaining {
            if result.recovered.len() == budget {
                break;
            }
            let e = &sorted[r];
            if cover.contains(e.u) || cover.contains(e.v) {
                continue;
            }
            taken[r] = true;
            result.recovered.push(e.edge_id);
            cover.cover_ball(idx, e.u, c);
            cover.cover_ball(idx, e.v, c);
        }
        remaining.retain(|&r| !taken[r]);
        let marked = remaining
            .iter()
            .filter(|&&r| cover.contains(sorted[r].u) || cover.contains(sorted[r].v))
            .count();
        result.marked_counts.push(marked);
        cover.clear();
    }
    result.survivors = result.recovered.len();
    result.shortfall = budget - result.recovered.len();
    log::debug!("loose recovery: {} edges in {} passes", result.recovered.len(), result.passes);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::{loose_similar, strict_similar};
    use crate::NONE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn offtree(idx: &TreeIndex, pairs: &[(usize, usize)]) -> Vec<OffTreeEdge> {
        pairs
            .iter()
            .enumerate()
            .map(|(rank, &(u, v))| OffTreeEdge {
                edge_id: 100 + rank,
                u,
                v,
                w: 1.0,
                lca: idx.lca(u, v),
                r_dist: idx.resistance_distance(u, v),
                rank,
            })
            .collect()
    }

    /// Per-pass mark arrays and explicit neighborhood sets, straight from the
    /// definition.
    fn literal(sorted: &[OffTreeEdge], idx: &TreeIndex, budget: usize, c: usize) -> (Vec<usize>, Vec<usize>, usize) {
        let mut remaining: Vec<usize> = (0..sorted.len()).collect();
        let mut recovered = Vec::new();
        let mut marked_counts = Vec::new();
        let mut passes = 0;
        while recovered.len() < budget && !remaining.is_empty() {
            passes += 1;
            let mut marks = vec![false; remaining.len()];
            let mut kept = Vec::new();
            for i in 0..remaining.len() {
                let e = &sorted[remaining[i]];
                if marks[i] {
                    kept.push(remaining[i]);
                    continue;
                }
                if recovered.len() == budget {
                    kept.extend_from_slice(&remaining[i..]);
                    break;
                }
                recovered.push(e.edge_id);
                let cover: HashSet<usize> = idx
                    .tree_neighborhood(e.u, c)
                    .into_iter()
                    .chain(idx.tree_neighborhood(e.v, c))
                    .collect();
                for j in i + 1..remaining.len() {
                    if loose_similar(&cover, sorted[remaining[j]].endpoints()) {
                        marks[j] = true;
                    }
                }
            }
            marked_counts.push(marks.iter().filter(|&&m| m).count());
            remaining = kept;
        }
        (recovered, marked_counts, passes)
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> (TreeIndex, Vec<OffTreeEdge>) {
        let n = rng.random_range(2..50);
        let mut parent = vec![NONE; n];
        for v in 1..n {
            parent[v] = rng.random_range(0..v);
        }
        let idx = TreeIndex::from_parents(0, &parent, &vec![1.0; n]).unwrap();
        let k = rng.random_range(1..60);
        let pairs: Vec<(usize, usize)> = (0..k)
            .map(|_| {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                (a.min(b), a.max(b))
            })
            .collect();
        let edges = offtree(&idx, &pairs);
        (idx, edges)
    }

    #[test]
    fn budget_one_takes_rank_zero() {
        let parent = [NONE, 0, 1, 2, 3, 0, 5, 6, 7];
        let idx = TreeIndex::from_parents(0, &parent, &[1.0; 9]).unwrap();
        let e = offtree(&idx, &[(4, 8), (1, 5), (3, 7)]);
        let r = recover_loose_multipass(&e, &idx, 1, 8);
        assert_eq!(r.recovered, vec![100]);
        assert_eq!(r.passes, 1);
        assert_eq!(r.shortfall, 0);
    }

    #[test]
    fn star_needs_one_pass_per_edge() {
        // every vertex of a star is within 2 hops of every other
        let n = 12;
        let mut parent = vec![0; n];
        parent[0] = NONE;
        let idx = TreeIndex::from_parents(0, &parent, &vec![1.0; n]).unwrap();
        let pairs: Vec<(usize, usize)> = (1..n - 1).map(|i| (i, i + 1)).collect();
        let e = offtree(&idx, &pairs);
        let r = recover_loose_multipass(&e, &idx, 6, 8);
        assert_eq!(r.passes, 6);
        assert_eq!(r.recovered, (100..106).collect::<Vec<_>>());
        assert_eq!(r.marked_counts[0], pairs.len() - 1);
    }

    #[test]
    fn matches_literal_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let (idx, edges) = random_instance(&mut rng);
            let budget = rng.random_range(1..=edges.len());
            let c = rng.random_range(0..6);
            let r = recover_loose_multipass(&edges, &idx, budget, c);
            let (rec, marked, passes) = literal(&edges, &idx, budget, c);
            assert_eq!(r.recovered, rec);
            assert_eq!(r.marked_counts, marked);
            assert_eq!(r.passes, passes);
            let distinct: HashSet<usize> = r.recovered.iter().copied().collect();
            assert_eq!(distinct.len(), r.recovered.len());
        }
    }

    #[test]
    fn strict_similarity_implies_loose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = 0;
        for _ in 0..1000 {
            let (idx, edges) = random_instance(&mut rng);
            let c = rng.random_range(1..9);
            let e = &edges[0];
            let beta = idx.beta_star(e.u, e.v, c);
            let su: HashSet<usize> = idx.tree_neighborhood(e.u, beta).into_iter().collect();
            let sv: HashSet<usize> = idx.tree_neighborhood(e.v, beta).into_iter().collect();
            let cover: HashSet<usize> = idx
                .tree_neighborhood(e.u, c)
                .into_iter()
                .chain(idx.tree_neighborhood(e.v, c))
                .collect();
            for cand in &edges[1..] {
                if strict_similar(&su, &sv, cand.endpoints()) {
                    hits += 1;
                    assert!(loose_similar(&cover, cand.endpoints()));
                }
            }
        }
        assert!(hits > 100);
    }
}

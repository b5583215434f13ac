//! Off-tree edge recovery.
//!
//! Off-tree edges are annotated with their tree LCA and resistance distance,
//! ranked by descending criticality, and then recovered greedily: a recovered
//! edge marks later edges that are *similar* to it, and marked edges are
//! skipped.
//!
//! Two similarity rules are provided:
//!
//! * **strict**: a candidate `(u', v')` is similar to a recovered `(u, v)` when
//!   its endpoints fall into *opposite* radius-`β*` tree balls around `u` and
//!   `v`, with `β* = min(depth(u) - depth(lca), depth(v) - depth(lca), c)`.
//!   Both balls stay inside the LCA's subtree on their own side, so similar
//!   edges always share the LCA. Edges are therefore grouped into per-LCA
//!   subtasks that never mark each other and can be processed independently.
//! * **loose**: a candidate is similar when *either* endpoint falls in the
//!   union of radius-`c` balls around `u` and `v`. This is the multi-pass
//!   baseline.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::graph::Graph;
use crate::parallel::Parallelism;
use crate::treeindex::TreeIndex;

mod loose;
mod rect;
mod strict;

pub use loose::recover_loose_multipass;
pub use strict::{recover_strict, recover_subtask_blocked, recover_subtask_serial, BlockedOutcome};

pub const DEFAULT_CUTOFF_ABS: usize = 100_000;
pub const DEFAULT_CUTOFF_FRAC: f64 = 0.10;

/// Criticality measure used to rank off-tree edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortKey {
    /// Tree resistance distance between the endpoints.
    #[default]
    ResistanceDistance,
    /// Edge stretch, `w * R_T(u, v)`.
    Stretch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffTreeEdge {
    pub edge_id: usize,
    pub u: usize,
    pub v: usize,
    pub w: f64,
    pub lca: usize,
    pub r_dist: f64,
    /// Position in the global descending-criticality order.
    pub rank: usize,
}

impl OffTreeEdge {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.u, self.v)
    }

    fn key(&self, key: SortKey) -> f64 {
        match key {
            SortKey::ResistanceDistance => self.r_dist,
            SortKey::Stretch => self.w * self.r_dist,
        }
    }
}

/// Annotates off-tree edges with LCA and resistance distance and sorts them by
/// descending `key`. Ties keep ascending edge-id order.
pub fn annotate_and_sort(
    g: &Graph,
    offtree: &[usize],
    idx: &TreeIndex,
    key: SortKey,
    exec: &Parallelism,
) -> Vec<OffTreeEdge> {
    let mut ids = offtree.to_vec();
    ids.sort_unstable();
    let annotate = |&id: &usize| {
        let e = g.edge(id);
        let lca = idx.lca(e.u, e.v);
        OffTreeEdge {
            edge_id: id,
            u: e.u,
            v: e.v,
            w: e.w,
            lca,
            r_dist: idx.resistance_distance_via(e.u, e.v, lca),
            rank: 0,
        }
    };
    let by_key = |a: &OffTreeEdge, b: &OffTreeEdge| b.key(key).total_cmp(&a.key(key));
    let mut edges: Vec<OffTreeEdge> = if exec.is_serial() {
        let mut v: Vec<_> = ids.iter().map(annotate).collect();
        v.sort_by(by_key);
        v
    } else {
        exec.install(|| {
            let mut v: Vec<_> = ids.par_iter().map(annotate).collect();
            v.par_sort_by(by_key);
            v
        })
    };
    for (rank, e) in edges.iter_mut().enumerate() {
        e.rank = rank;
    }
    edges
}

/// Off-tree edges sharing one LCA, by ascending rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtask {
    pub lca: usize,
    pub ranks: Vec<usize>,
    pub large: bool,
}

impl Subtask {
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtaskPartition {
    /// Size-descending; ties by LCA id.
    pub subtasks: Vec<Subtask>,
    pub large_cutoff: usize,
}

impl SubtaskPartition {
    pub fn n_edges(&self) -> usize {
        self.subtasks.iter().map(Subtask::len).sum()
    }
}

/// `min(cutoff_abs, ceil(cutoff_frac * n_offtree))`
pub fn large_cutoff(n_offtree: usize, cutoff_abs: usize, cutoff_frac: f64) -> usize {
    let frac = (cutoff_frac * n_offtree as f64).ceil();
    cutoff_abs.min(frac as usize)
}

/// Groups ranked edges by LCA.
pub fn partition_subtasks(sorted: &[OffTreeEdge], cutoff_abs: usize, cutoff_frac: f64) -> SubtaskPartition {
    let large_cutoff = large_cutoff(sorted.len(), cutoff_abs, cutoff_frac);
    let n_slots = sorted.iter().map(|e| e.lca + 1).max().unwrap_or(0);
    let mut slot = vec![usize::MAX; n_slots];
    let mut subtasks: Vec<Subtask> = Vec::new();
    for e in sorted {
        if slot[e.lca] == usize::MAX {
            slot[e.lca] = subtasks.len();
            subtasks.push(Subtask {
                lca: e.lca,
                ranks: Vec::new(),
                large: false,
            });
        }
        subtasks[slot[e.lca]].ranks.push(e.rank);
    }
    subtasks.sort_by(|a, b| b.len().cmp(&a.len()).then(a.lca.cmp(&b.lca)));
    for s in &mut subtasks {
        s.large = s.len() >= large_cutoff;
    }
    SubtaskPartition {
        subtasks,
        large_cutoff,
    }
}

/// Vertex-set membership.
pub trait Membership {
    fn contains(&self, v: usize) -> bool;
}

impl Membership for HashSet<usize> {
    fn contains(&self, v: usize) -> bool {
        HashSet::contains(self, &v)
    }
}

impl Membership for BTreeSet<usize> {
    fn contains(&self, v: usize) -> bool {
        BTreeSet::contains(self, &v)
    }
}

impl Membership for [usize] {
    fn contains(&self, v: usize) -> bool {
        <[usize]>::contains(self, &v)
    }
}

/// The radius-`radius` tree ball around `center`, tested through hop
/// distances instead of materializing the set.
#[derive(Debug, Clone, Copy)]
pub struct TreeBall<'a> {
    pub idx: &'a TreeIndex,
    pub center: usize,
    pub radius: usize,
}

impl Membership for TreeBall<'_> {
    fn contains(&self, v: usize) -> bool {
        v == self.center || (self.radius > 0 && self.idx.hop_distance(self.center, v) <= self.radius)
    }
}

/// Strict similarity of `candidate` to a recovered edge `(u, v)` whose
/// neighborhoods are `su` and `sv`: both endpoints must fall in opposite
/// neighborhoods.
pub fn strict_similar<S: Membership + ?Sized>(su: &S, sv: &S, candidate: (usize, usize)) -> bool {
    let (a, b) = candidate;
    (su.contains(a) && sv.contains(b)) || (sv.contains(a) && su.contains(b))
}

/// Loose similarity: either endpoint inside the recovered edge's cover
/// `S_u ∪ S_v`.
pub fn loose_similar<S: Membership + ?Sized>(cover: &S, candidate: (usize, usize)) -> bool {
    cover.contains(candidate.0) || cover.contains(candidate.1)
}

/// Outcome of a recovery run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RecoveryResult {
    /// Recovered edge ids. Strict mode lists them by rank; loose mode in
    /// recovery order.
    pub recovered: Vec<usize>,
    /// Strict mode: edges marked similar per subtask, in partition order.
    /// Loose mode: edges marked similar per pass.
    pub marked_counts: Vec<usize>,
    pub passes: usize,
    pub budget: usize,
    /// Edges that would be recovered with an unlimited budget (strict mode).
    /// Equals `recovered.len()` in loose mode.
    pub survivors: usize,
    pub shortfall: usize,
    /// Tentative marks thrown away during blocked reconciliation.
    pub discarded_tentative: usize,
}

/// `floor(alpha * n)`, robust to representation error in `alpha`.
pub fn budget_for(alpha: f64, n_vertices: usize) -> usize {
    (alpha * n_vertices as f64 + 1e-9).floor().max(0.0) as usize
}

pub(crate) fn clamp_budget(budget: usize, n_offtree: usize) -> usize {
    if budget > n_offtree {
        log::warn!("budget {budget} exceeds {n_offtree} off-tree edges; clamping");
        n_offtree
    } else {
        budget
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};
    use crate::spanning::build_spanning_tree;
    use crate::NONE;

    fn chain_branch() -> TreeIndex {
        let parent = [NONE, 0, 1, 2, 3, 0, 5, 6, 7];
        TreeIndex::from_parents(0, &parent, &[1.0; 9]).unwrap()
    }

    fn edge(idx: &TreeIndex, edge_id: usize, u: usize, v: usize, rank: usize) -> OffTreeEdge {
        let lca = idx.lca(u, v);
        OffTreeEdge {
            edge_id,
            u,
            v,
            w: 1.0,
            lca,
            r_dist: idx.resistance_distance(u, v),
            rank,
        }
    }

    #[test]
    fn ranks_descend_and_ties_keep_id_order() {
        // path 0-1-2 (w 2, 4) plus off-tree (0,2) and (0,1)-(1,2)-like ties
        let g = Graph::from_edges(4, [(0, 1, 2.0), (1, 2, 4.0), (0, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)])
            .unwrap()
            .0;
        // tree: 0-1, 1-2, 2-3 rooted at 0
        let idx = TreeIndex::from_parents(0, &[NONE, 0, 1, 2], &[0.0, 2.0, 4.0, 1.0]).unwrap();
        let ids: Vec<usize> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| (e.u, e.v) == (0, 2) || (e.u, e.v) == (1, 3))
            .map(|(i, _)| i)
            .collect();
        let sorted = annotate_and_sort(&g, &ids, &idx, SortKey::ResistanceDistance, &Parallelism::serial());
        // R(1,3) = 1/4 + 1 = 1.25 ; R(0,2) = 0.75
        assert_eq!((sorted[0].u, sorted[0].v), (1, 3));
        assert_eq!(sorted[0].rank, 0);
        assert!((sorted[1].r_dist - 0.75).abs() < 1e-15);
        assert_eq!(sorted[1].rank, 1);

        let star = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)])
            .unwrap()
            .0;
        let sidx = TreeIndex::from_parents(0, &[NONE, 0, 0, 0], &[0.0, 1.0, 1.0, 1.0]).unwrap();
        let off = [5, 3, 4];
        let sorted = annotate_and_sort(&star, &off, &sidx, SortKey::ResistanceDistance, &Parallelism::serial());
        let order: Vec<usize> = sorted.iter().map(|e| e.edge_id).collect();
        assert_eq!(order, vec![3, 4, 5]);
    }

    #[test]
    fn stretch_key_weighs_resistance() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 10.0)]).unwrap().0;
        let idx = TreeIndex::from_parents(0, &[NONE, 0, 0], &[0.0, 1.0, 1.0]).unwrap();
        let s = annotate_and_sort(&g, &[2], &idx, SortKey::Stretch, &Parallelism::serial());
        assert_eq!(s[0].r_dist, 2.0);
        assert_eq!(s[0].key(SortKey::Stretch), 20.0);
    }

    #[test]
    fn parallel_annotation_matches_serial() {
        let g = generate(GraphKind::RandomConnected { n: 300, m: 1200, seed: 2 }, 5).unwrap();
        let t = build_spanning_tree(&g, &Parallelism::serial()).unwrap();
        let idx = TreeIndex::build(&t).unwrap();
        let a = annotate_and_sort(&g, &t.offtree_edge_ids, &idx, SortKey::ResistanceDistance, &Parallelism::serial());
        let b = annotate_and_sort(
            &g,
            &t.offtree_edge_ids,
            &idx,
            SortKey::ResistanceDistance,
            &Parallelism::new(4).unwrap(),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn partition_groups_by_lca() {
        let idx = chain_branch();
        let sorted = vec![
            edge(&idx, 0, 4, 8, 0),
            edge(&idx, 1, 2, 4, 1),
            edge(&idx, 2, 1, 5, 2),
        ];
        let p = partition_subtasks(&sorted, DEFAULT_CUTOFF_ABS, DEFAULT_CUTOFF_FRAC);
        assert_eq!(p.large_cutoff, 1);
        assert_eq!(p.subtasks.len(), 2);
        assert_eq!(p.subtasks[0], Subtask { lca: 0, ranks: vec![0, 2], large: true });
        assert_eq!(p.subtasks[1].lca, 2);
        assert_eq!(p.n_edges(), 3);
    }

    #[test]
    fn single_lca_is_one_large_subtask() {
        let idx = chain_branch();
        let sorted: Vec<_> = [(4, 8), (3, 7), (1, 5)]
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| edge(&idx, i, u, v, i))
            .collect();
        let p = partition_subtasks(&sorted, 3, 1.0);
        assert_eq!(p.subtasks.len(), 1);
        assert!(p.subtasks[0].large);
        // cutoff min(4, ceil(2.0 * 3)) = 4 exceeds the subtask size
        let p = partition_subtasks(&sorted, 4, 2.0);
        assert!(!p.subtasks[0].large);
    }

    #[test]
    fn cutoff_is_min_of_both_rules() {
        assert_eq!(large_cutoff(2000, DEFAULT_CUTOFF_ABS, DEFAULT_CUTOFF_FRAC), 200);
        assert_eq!(large_cutoff(5_000_000, DEFAULT_CUTOFF_ABS, DEFAULT_CUTOFF_FRAC), 100_000);
        assert_eq!(large_cutoff(15, DEFAULT_CUTOFF_ABS, DEFAULT_CUTOFF_FRAC), 2);
    }

    #[test]
    fn strict_similarity_is_order_dependent() {
        let idx = chain_branch();
        // recover labels (5, 9) first: β* = 4
        let b = idx.beta_star(4, 8, 8);
        assert_eq!(b, 4);
        let s5: BTreeSet<usize> = idx.tree_neighborhood(4, b).into_iter().collect();
        let s9: BTreeSet<usize> = idx.tree_neighborhood(8, b).into_iter().collect();
        assert_eq!(s5, BTreeSet::from([4, 3, 2, 1, 0]));
        assert_eq!(s9, BTreeSet::from([8, 7, 6, 5, 0]));
        assert!(strict_similar(&s5, &s9, (1, 5)));

        // recover labels (2, 6) first: β* = 1
        let b = idx.beta_star(1, 5, 8);
        assert_eq!(b, 1);
        let s2: BTreeSet<usize> = idx.tree_neighborhood(1, b).into_iter().collect();
        let s6: BTreeSet<usize> = idx.tree_neighborhood(5, b).into_iter().collect();
        assert_eq!(s2, BTreeSet::from([1, 0, 2]));
        assert_eq!(s6, BTreeSet::from([5, 0, 6]));
        assert!(!strict_similar(&s2, &s6, (4, 8)));
        assert!(!strict_similar(&s5, &s9, (2, 2 + 100)));
    }

    #[test]
    fn tree_ball_agrees_with_bfs_sets() {
        let idx = chain_branch();
        for center in 0..9 {
            for radius in 0..6 {
                let set: HashSet<usize> = idx.tree_neighborhood(center, radius).into_iter().collect();
                let ball = TreeBall { idx: &idx, center, radius };
                for v in 0..9 {
                    assert_eq!(ball.contains(v), set.contains(&v), "c={center} r={radius} v={v}");
                }
            }
        }
    }

    #[test]
    fn loose_similarity() {
        let cover: HashSet<usize> = [1, 2, 3].into_iter().collect();
        assert!(loose_similar(&cover, (3, 9)));
        assert!(loose_similar(&cover, (9, 1)));
        assert!(!loose_similar(&cover, (7, 9)));
    }

    #[test]
    fn budget_rounding() {
        assert_eq!(budget_for(0.02, 2001), 40);
        assert_eq!(budget_for(0.29, 100), 29);
        assert_eq!(budget_for(0.10, 900), 90);
        assert_eq!(budget_for(0.3, 3), 0);
    }
}

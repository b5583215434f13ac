//! Maximum effective-weight spanning tree.
//!
//! Edges are scored by `w(u, v) * log(max(deg u, deg v)) / (d(u) + d(v))`,
//! where `d` is the unweighted BFS distance from the maximum-degree root, and
//! Kruskal's algorithm keeps the highest-scoring acyclic set.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::parallel::Parallelism;
use crate::NONE;

/// Rooted spanning tree plus the complementary off-tree edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub root: usize,
    /// Parent vertex; `NONE` for the root.
    pub parent: Vec<usize>,
    /// Weight of the edge to the parent; 0 for the root.
    pub parent_weight: Vec<f64>,
    /// Tree edge ids, ascending.
    pub tree_edge_ids: Vec<usize>,
    /// Off-tree edge ids in descending score order.
    pub offtree_edge_ids: Vec<usize>,
}

impl SpanningTree {
    pub fn n_vertices(&self) -> usize {
        self.parent.len()
    }
}

/// A vertex of maximum degree, smallest id on ties.
pub fn select_root(g: &Graph) -> Result<usize> {
    (0..g.n_vertices())
        .max_by(|&a, &b| g.degree(a).cmp(&g.degree(b)).then(b.cmp(&a)))
        .ok_or_else(|| Error::Validation("graph has no vertices".into()))
}

pub fn bfs_hop_distances(g: &Graph, root: usize) -> Result<Vec<usize>> {
    let mut dist = vec![NONE; g.n_vertices()];
    let mut queue = VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        for &(y, _) in g.neighbors(x) {
            if dist[y] == NONE {
                dist[y] = dist[x] + 1;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    if reached != g.n_vertices() {
        return Err(Error::Connectivity(format!(
            "{} of {} vertices unreachable from root {root}",
            g.n_vertices() - reached,
            g.n_vertices()
        )));
    }
    Ok(dist)
}

/// Effective weight of every edge, natural logarithm.
pub fn effective_weights(g: &Graph, dist: &[usize], exec: &Parallelism) -> Vec<f64> {
    effective_weights_with(g, dist, exec, f64::ln)
}

/// Effective weight with a caller-chosen logarithm.
///
/// An edge whose endpoints both have degree below 2 (only possible in a
/// two-vertex graph) scores its raw weight.
pub fn effective_weights_with<L>(g: &Graph, dist: &[usize], exec: &Parallelism, log: L) -> Vec<f64>
where
    L: Fn(f64) -> f64 + Sync,
{
    let score = |id: usize| {
        let e = g.edge(id);
        let deg = g.degree(e.u).max(g.degree(e.v));
        if deg < 2 {
            return e.w;
        }
        e.w * log(deg as f64) / (dist[e.u] + dist[e.v]) as f64
    };
    if exec.is_serial() {
        (0..g.n_edges()).map(score).collect()
    } else {
        exec.install(|| (0..g.n_edges()).into_par_iter().map(score).collect())
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal over edges by descending score (ties: ascending edge id), with
/// parent pointers oriented toward `root`.
pub fn max_spanning_tree(g: &Graph, scores: &[f64], root: usize) -> Result<SpanningTree> {
    let n = g.n_vertices();
    assert_eq!(scores.len(), g.n_edges());
    let mut order: Vec<usize> = (0..g.n_edges()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut dsu = DisjointSet::new(n);
    let mut in_tree = vec![false; g.n_edges()];
    let mut offtree_edge_ids = Vec::with_capacity(g.n_edges().saturating_sub(n.saturating_sub(1)));
    let mut tree_count = 0;
    for &id in &order {
        let e = g.edge(id);
        if dsu.union(e.u, e.v) {
            in_tree[id] = true;
            tree_count += 1;
        } else {
            offtree_edge_ids.push(id);
        }
    }
    if tree_count + 1 != n.max(1) {
        return Err(Error::Connectivity(format!(
            "spanning forest has {tree_count} edges, expected {}",
            n.saturating_sub(1)
        )));
    }

    let mut parent = vec![NONE; n];
    let mut parent_weight = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(x) = queue.pop_front() {
        for &(y, id) in g.neighbors(x) {
            if in_tree[id] && !seen[y] {
                seen[y] = true;
                parent[y] = x;
                parent_weight[y] = g.edge(id).w;
                queue.push_back(y);
            }
        }
    }
    let tree_edge_ids = (0..g.n_edges()).filter(|&id| in_tree[id]).collect();
    Ok(SpanningTree {
        root,
        parent,
        parent_weight,
        tree_edge_ids,
        offtree_edge_ids,
    })
}

/// Root selection, BFS, scoring and Kruskal in one call.
pub fn build_spanning_tree(g: &Graph, exec: &Parallelism) -> Result<SpanningTree> {
    let root = select_root(g)?;
    let dist = bfs_hop_distances(g, root)?;
    let scores = effective_weights(g, &dist, exec);
    max_spanning_tree(g, &scores, root)
}

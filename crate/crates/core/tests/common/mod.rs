//! Brute-force oracles shared by the integration and acceptance tests. None
//! of these use the library's tree index.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use pdgrass::{OffTreeEdge, TreeIndex, NONE};
use rand::Rng;

/// Random rooted tree on `n` vertices, root 0. `chain_bias` is the chance of
/// attaching to the previous vertex, which makes deep paths common.
pub fn random_parents<R: Rng>(rng: &mut R, n: usize, chain_bias: f64) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    for v in 1..n {
        parent[v] = if rng.random_bool(chain_bias) {
            v - 1
        } else {
            rng.random_range(0..v)
        };
    }
    parent
}

pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(1.0..10.0)).collect()
}

/// Plain adjacency lists of a parent-pointer tree.
pub fn tree_adjacency(parent: &[usize]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); parent.len()];
    for (v, &p) in parent.iter().enumerate() {
        if p != NONE {
            adj[v].push(p);
            adj[p].push(v);
        }
    }
    adj
}

pub fn naive_depth(parent: &[usize], mut v: usize) -> usize {
    let mut d = 0;
    while parent[v] != NONE {
        v = parent[v];
        d += 1;
    }
    d
}

/// LCA by collecting the ancestors of `u` and walking up from `v`.
pub fn naive_lca(parent: &[usize], u: usize, v: usize) -> usize {
    let mut seen = HashSet::new();
    let mut x = u;
    loop {
        seen.insert(x);
        if parent[x] == NONE {
            break;
        }
        x = parent[x];
    }
    let mut y = v;
    while !seen.contains(&y) {
        y = parent[y];
    }
    y
}

/// Sum of `1 / w` along the walk from `u` to `v` through their LCA.
pub fn naive_resistance(parent: &[usize], weight: &[f64], u: usize, v: usize) -> f64 {
    let l = naive_lca(parent, u, v);
    let mut r = 0.0;
    for mut x in [u, v] {
        while x != l {
            r += 1.0 / weight[x];
            x = parent[x];
        }
    }
    r
}

/// Vertices within `beta` hops of `u`, by BFS over explicit adjacency.
pub fn bfs_ball(adj: &[Vec<usize>], u: usize, beta: usize) -> HashSet<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut out = HashSet::new();
    let mut queue = VecDeque::from([u]);
    dist[u] = 0;
    while let Some(x) = queue.pop_front() {
        out.insert(x);
        if dist[x] == beta {
            continue;
        }
        for &y in &adj[x] {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    out
}

/// Neighborhood radius for recovered edge `(u, v)`, from explicit depths.
pub fn naive_beta(parent: &[usize], u: usize, v: usize, c: usize) -> usize {
    let dl = naive_depth(parent, naive_lca(parent, u, v));
    (naive_depth(parent, u) - dl).min(naive_depth(parent, v) - dl).min(c)
}

/// Both neighborhoods of a recovered edge as explicit sets.
pub fn naive_neighborhoods(parent: &[usize], adj: &[Vec<usize>], u: usize, v: usize, c: usize) -> (HashSet<usize>, HashSet<usize>) {
    let beta = naive_beta(parent, u, v, c);
    (bfs_ball(adj, u, beta), bfs_ball(adj, v, beta))
}

pub fn naive_strict(su: &HashSet<usize>, sv: &HashSet<usize>, (a, b): (usize, usize)) -> bool {
    (su.contains(&a) && sv.contains(&b)) || (sv.contains(&a) && su.contains(&b))
}

/// Strict recovery of one ordered edge list straight from the definition:
/// explicit BFS sets, a full scan of every later edge, marks in an array.
pub fn literal_strict_recovery(parent: &[usize], pairs: &[(usize, usize)], c: usize) -> Vec<usize> {
    let adj = tree_adjacency(parent);
    let mut marks = vec![false; pairs.len()];
    let mut survivors = Vec::new();
    for i in 0..pairs.len() {
        if marks[i] {
            continue;
        }
        survivors.push(i);
        let (u, v) = pairs[i];
        let (su, sv) = naive_neighborhoods(parent, &adj, u, v, c);
        for j in i + 1..pairs.len() {
            if !marks[j] && naive_strict(&su, &sv, pairs[j]) {
                marks[j] = true;
            }
        }
    }
    survivors
}

/// Off-tree edges in the given order, annotated with the library index.
pub fn annotate(idx: &TreeIndex, pairs: &[(usize, usize)]) -> Vec<OffTreeEdge> {
    pairs
        .iter()
        .enumerate()
        .map(|(rank, &(u, v))| OffTreeEdge {
            edge_id: rank,
            u,
            v,
            w: 1.0,
            lca: idx.lca(u, v),
            r_dist: idx.resistance_distance(u, v),
            rank,
        })
        .collect()
}

/// Every vertex of the subtree rooted at `v`.
pub fn subtree(parent: &[usize], v: usize) -> Vec<usize> {
    (0..parent.len())
        .filter(|&x| {
            let mut y = x;
            loop {
                if y == v {
                    return true;
                }
                if parent[y] == NONE {
                    return false;
                }
                y = parent[y];
            }
        })
        .collect()
}

/// Random subtask: up to `max_edges` distinct pairs whose tree LCA is one
/// vertex with at least two children. Pairs may use the LCA itself as an
/// endpoint. Returns `None` if the tree has no such vertex.
pub fn random_subtask<R: Rng>(rng: &mut R, parent: &[usize], max_edges: usize) -> Option<Vec<(usize, usize)>> {
    let n = parent.len();
    let mut children = vec![Vec::new(); n];
    for (v, &p) in parent.iter().enumerate() {
        if p != NONE {
            children[p].push(v);
        }
    }
    let hubs: Vec<usize> = (0..n).filter(|&v| children[v].len() >= 2).collect();
    if hubs.is_empty() {
        return None;
    }
    let l = hubs[rng.random_range(0..hubs.len())];
    let branches: Vec<Vec<usize>> = children[l].iter().map(|&c| subtree(parent, c)).collect();
    let want = rng.random_range(1..=max_edges);
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for _ in 0..want * 4 {
        if pairs.len() == want {
            break;
        }
        let a = rng.random_range(0..branches.len());
        let x = branches[a][rng.random_range(0..branches[a].len())];
        let y = if rng.random_bool(0.1) {
            l
        } else {
            let mut b = rng.random_range(0..branches.len() - 1);
            if b >= a {
                b += 1;
            }
            branches[b][rng.random_range(0..branches[b].len())]
        };
        let pair = (x.min(y), x.max(y));
        if seen.insert(pair) {
            pairs.push(pair);
        }
    }
    Some(pairs)
}

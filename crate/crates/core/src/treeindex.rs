//! Rooted spanning-tree index.
//!
//! Answers LCA queries by binary lifting, tree hop distances from depths, and
//! resistance distances from prefix sums of `1 / w` toward the root. All
//! queries take `&self` and can run from any number of threads.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::spanning::SpanningTree;
use crate::NONE;

/// Default hop bound `c` for neighborhood radii.
pub const DEFAULT_HOP_BOUND: usize = 8;

#[derive(Debug, Clone)]
pub struct TreeIndex {
    root: usize,
    parent: Vec<usize>,
    depth: Vec<usize>,
    /// `levels` rows of `n` entries: `up[k * n + v]` is the `2^k`-th ancestor.
    up: Vec<usize>,
    levels: usize,
    res_to_root: Vec<f64>,
    child_offsets: Vec<usize>,
    children: Vec<usize>,
    /// Preorder number; the subtree of `v` is `tin[v]..=tout[v]`.
    tin: Vec<usize>,
    tout: Vec<usize>,
}

impl TreeIndex {
    pub fn build(tree: &SpanningTree) -> Result<Self> {
        Self::from_parents(tree.root, &tree.parent, &tree.parent_weight)
    }

    /// Builds the index from raw parent pointers. `parent[root]` must be
    /// `NONE` and every other vertex must reach the root.
    pub fn from_parents(root: usize, parent: &[usize], parent_weight: &[f64]) -> Result<Self> {
        let n = parent.len();
        if root >= n || parent_weight.len() != n {
            return Err(Error::Structure(format!("root {root} / sizes inconsistent for {n} vertices")));
        }
        if parent[root] != NONE {
            return Err(Error::Structure(format!("root {root} has a parent")));
        }
        let mut child_count = vec![0usize; n];
        for (v, &p) in parent.iter().enumerate() {
            if v == root {
                continue;
            }
            if p >= n || p == v {
                return Err(Error::Structure(format!("vertex {v} has invalid parent")));
            }
            if !(parent_weight[v] > 0.0 && parent_weight[v].is_finite()) {
                return Err(Error::Structure(format!("vertex {v} has non-positive parent weight")));
            }
            child_count[p] += 1;
        }
        let mut child_offsets = vec![0usize; n + 1];
        for v in 0..n {
            child_offsets[v + 1] = child_offsets[v] + child_count[v];
        }
        let mut cursor = child_offsets.clone();
        let mut children = vec![0usize; n.saturating_sub(1)];
        for (v, &p) in parent.iter().enumerate() {
            if v != root {
                children[cursor[p]] = v;
                cursor[p] += 1;
            }
        }

        // Top-down order; vertices never reached sit on a cycle.
        let mut depth = vec![NONE; n];
        let mut res_to_root = vec![0.0; n];
        let mut queue = VecDeque::from([root]);
        depth[root] = 0;
        let mut reached = 1;
        while let Some(x) = queue.pop_front() {
            for &c in &children[child_offsets[x]..child_offsets[x + 1]] {
                depth[c] = depth[x] + 1;
                res_to_root[c] = res_to_root[x] + 1.0 / parent_weight[c];
                reached += 1;
                queue.push_back(c);
            }
        }
        if reached != n {
            return Err(Error::Structure(format!(
                "{} vertices do not reach the root (cyclic parent pointers)",
                n - reached
            )));
        }

        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let levels = (usize::BITS - max_depth.leading_zeros()).max(1) as usize;
        let mut up = vec![NONE; levels * n];
        up[..n].copy_from_slice(parent);
        for k in 1..levels {
            let (lower, upper) = up.split_at_mut(k * n);
            let prev = &lower[(k - 1) * n..];
            for v in 0..n {
                let mid = prev[v];
                upper[v] = if mid == NONE { NONE } else { prev[mid] };
            }
        }
        let mut tin = vec![0; n];
        let mut tout = vec![0; n];
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            tin[x] = preorder.len();
            preorder.push(x);
            stack.extend(children[child_offsets[x]..child_offsets[x + 1]].iter().rev());
        }
        // children come after their parent in preorder
        for &v in preorder.iter().rev() {
            tout[v] = tout[v].max(tin[v]);
            if v != root {
                let p = parent[v];
                tout[p] = tout[p].max(tout[v]);
            }
        }
        Ok(TreeIndex {
            root,
            parent: parent.to_vec(),
            depth,
            up,
            levels,
            res_to_root,
            child_offsets,
            children,
            tin,
            tout,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn res_to_root(&self, v: usize) -> f64 {
        self.res_to_root[v]
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `2^k`-th ancestor of `v`, or `NONE` above the root.
    pub fn ancestor_pow2(&self, k: usize, v: usize) -> usize {
        if k >= self.levels {
            return NONE;
        }
        self.up[k * self.n_vertices() + v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[self.child_offsets[v]..self.child_offsets[v + 1]]
    }

    /// Preorder number of `v`.
    pub fn preorder(&self, v: usize) -> usize {
        self.tin[v]
    }

    /// Preorder interval `(first, last)` covered by the subtree of `v`.
    pub fn subtree_range(&self, v: usize) -> (usize, usize) {
        (self.tin[v], self.tout[v])
    }

    fn lift(&self, mut v: usize, mut steps: usize) -> usize {
        let n = self.n_vertices();
        let mut k = 0;
        while steps > 0 {
            if steps & 1 == 1 {
                v = self.up[k * n + v];
            }
            steps >>= 1;
            k += 1;
        }
        v
    }

    /// Ancestor of `v` at depth `d`; `d` must not exceed `depth(v)`.
    pub fn ancestor_at_depth(&self, v: usize, d: usize) -> usize {
        self.lift(v, self.depth[v] - d)
    }

    pub fn lca(&self, u: usize, v: usize) -> usize {
        let (mut a, mut b) = if self.depth[u] >= self.depth[v] { (u, v) } else { (v, u) };
        a = self.lift(a, self.depth[a] - self.depth[b]);
        if a == b {
            return a;
        }
        let n = self.n_vertices();
        for k in (0..self.levels).rev() {
            let (pa, pb) = (self.up[k * n + a], self.up[k * n + b]);
            if pa != pb {
                a = pa;
                b = pb;
            }
        }
        self.parent[a]
    }

    /// Number of tree edges between `u` and `v`.
    pub fn hop_distance(&self, u: usize, v: usize) -> usize {
        let l = self.lca(u, v);
        self.depth[u] + self.depth[v] - 2 * self.depth[l]
    }

    /// Sum of `1 / w` along the tree path between `u` and `v`.
    pub fn resistance_distance(&self, u: usize, v: usize) -> f64 {
        self.resistance_distance_via(u, v, self.lca(u, v))
    }

    pub(crate) fn resistance_distance_via(&self, u: usize, v: usize, lca: usize) -> f64 {
        let r = self.res_to_root[u] + self.res_to_root[v] - 2.0 * self.res_to_root[lca];
        r.max(0.0)
    }

    /// Neighborhood radius for a recovered edge: the smaller endpoint depth
    /// below the LCA, capped at `c`.
    pub fn beta_star(&self, u: usize, v: usize, c: usize) -> usize {
        self.beta_star_via(u, v, self.lca(u, v), c)
    }

    pub(crate) fn beta_star_via(&self, u: usize, v: usize, lca: usize, c: usize) -> usize {
        let d = self.depth[lca];
        (self.depth[u] - d).min(self.depth[v] - d).min(c)
    }

    /// All vertices within `beta` tree hops of `u`, in BFS order.
    pub fn tree_neighborhood(&self, u: usize, beta: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        self.for_each_within(u, beta, &mut scratch, |x| out.push(x));
        out
    }

    /// Visits every vertex within `beta` tree hops of `u` exactly once.
    ///
    /// `queue` is caller-owned scratch; it is cleared on entry.
    pub fn for_each_within<F: FnMut(usize)>(
        &self,
        u: usize,
        beta: usize,
        queue: &mut Vec<(usize, usize, usize)>,
        mut visit: F,
    ) {
        // (vertex, hops, vertex we came from); a tree needs no visited set.
        queue.clear();
        queue.push((u, 0, NONE));
        let mut head = 0;
        while head < queue.len() {
            let (x, hops, from) = queue[head];
            head += 1;
            visit(x);
            if hops == beta {
                continue;
            }
            let p = self.parent[x];
            if p != NONE && p != from {
                queue.push((p, hops + 1, x));
            }
            for &c in self.children(x) {
                if c != from {
                    queue.push((c, hops + 1, x));
                }
            }
        }
    }
}

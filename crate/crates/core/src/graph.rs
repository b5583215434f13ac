//! Undirected weighted graphs and their Laplacians.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A canonical undirected edge, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Counters collected while canonicalizing a raw edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

/// Immutable undirected weighted graph.
///
/// Edges are stored in lexicographic `(u, v)` order with `u < v`; an edge id is
/// its position in that order. Adjacency is kept in CSR form as
/// `(neighbor, edge id)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj_offsets: Vec<usize>,
    adj: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from raw `(u, v, w)` triples.
    ///
    /// Self-loops are dropped and duplicate pairs (in either orientation) are
    /// merged by summing their weights. Every surviving weight must be finite
    /// and strictly positive.
    pub fn from_edges<I>(n: usize, raw: I) -> Result<(Self, BuildStats)>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut stats = BuildStats::default();
        let mut edges = Vec::new();
        for (a, b, w) in raw {
            if a >= n || b >= n {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                stats.self_loops_dropped += 1;
                continue;
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            edges.push(Edge { u, v, w });
        }
        edges.sort_by_key(|e| (e.u, e.v));

        let mut merged: Vec<Edge> = Vec::with_capacity(edges.len());
        for e in edges {
            match merged.last_mut() {
                Some(last) if last.u == e.u && last.v == e.v => {
                    last.w += e.w;
                    stats.duplicates_merged += 1;
                }
                _ => merged.push(e),
            }
        }
        for e in &merged {
            if !(e.w.is_finite() && e.w > 0.0) {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) has non-positive or non-finite weight {}",
                    e.u, e.v, e.w
                )));
            }
        }
        Ok((Self::from_canonical(n, merged), stats))
    }

    /// Builds a graph from edges that are already canonical, sorted and unique.
    pub(crate) fn from_canonical(n: usize, edges: Vec<Edge>) -> Self {
        debug_assert!(edges.windows(2).all(|p| (p[0].u, p[0].v) < (p[1].u, p[1].v)));
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut adj_offsets = vec![0usize; n + 1];
        for v in 0..n {
            adj_offsets[v + 1] = adj_offsets[v] + degree[v];
        }
        let mut cursor = adj_offsets.clone();
        let mut adj = vec![(0usize, 0usize); 2 * edges.len()];
        for (id, e) in edges.iter().enumerate() {
            adj[cursor[e.u]] = (e.v, id);
            cursor[e.u] += 1;
            adj[cursor[e.v]] = (e.u, id);
            cursor[e.v] += 1;
        }
        Graph {
            n,
            edges,
            adj_offsets,
            adj,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// `(neighbor, edge id)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[self.adj_offsets[v]..self.adj_offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj_offsets[v + 1] - self.adj_offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Component label per vertex (labels in order of first appearance) and
    /// the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in self.neighbors(x) {
                    if label[y] == usize::MAX {
                        label[y] = count;
                        queue.push_back(y);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().1 == 1
    }

    pub fn ensure_connected(&self) -> Result<()> {
        let (_, count) = self.components();
        if self.n > 1 && count != 1 {
            return Err(Error::Connectivity(format!(
                "{count} components over {} vertices",
                self.n
            )));
        }
        Ok(())
    }

    /// Induced subgraph on the largest connected component (ties: the
    /// component containing the smallest vertex id). Vertices are renumbered
    /// preserving their relative order; the returned map sends new ids to old.
    pub fn largest_component(&self) -> (Graph, Vec<usize>) {
        let (label, count) = self.components();
        if count <= 1 {
            return (self.clone(), (0..self.n).collect());
        }
        let mut sizes = vec![0usize; count];
        for &l in &label {
            sizes[l] += 1;
        }
        let best = (0..count)
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        let mut new_id = vec![usize::MAX; self.n];
        let mut old_id = Vec::with_capacity(sizes[best]);
        for v in 0..self.n {
            if label[v] == best {
                new_id[v] = old_id.len();
                old_id.push(v);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| label[e.u] == best)
            .map(|e| Edge {
                u: new_id[e.u],
                v: new_id[e.v],
                w: e.w,
            })
            .collect();
        (Graph::from_canonical(old_id.len(), edges), old_id)
    }

    /// Subgraph on the same vertex set keeping only the listed edge ids.
    pub fn edge_subgraph(&self, ids: impl IntoIterator<Item = usize>) -> Graph {
        let mut ids: Vec<usize> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        let edges = ids.into_iter().map(|id| self.edges[id]).collect();
        Graph::from_canonical(self.n, edges)
    }

    pub fn laplacian(&self) -> Laplacian {
        Laplacian::from_graph(self)
    }
}

/// Graph Laplacian in CSR form with sorted column indices per row.
///
/// Diagonal entries hold the weighted degree; off-diagonal `(i, j)` holds
/// `-w(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Laplacian {
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n_vertices();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n + 2 * g.n_edges());
        let mut values = Vec::with_capacity(n + 2 * g.n_edges());
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            row.clear();
            let mut diag = 0.0;
            for &(j, id) in g.neighbors(i) {
                let w = g.edge(id).w;
                diag += w;
                row.push((j, -w));
            }
            row.push((i, diag));
            row.sort_unstable_by_key(|&(j, _)| j);
            for &(j, x) in &row {
                col_idx.push(j);
                values.push(x);
            }
            row_ptr.push(col_idx.len());
        }
        Laplacian {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = L x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, x) in self.row(i) {
                m[(i, j)] = x;
            }
        }
        m
    }

    /// Whether the off-diagonal pattern connects every vertex.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for (j, x) in self.row(i) {
                if j != i && x != 0.0 && !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.n
    }

    /// Copy with row and column `ground` removed, as a CSR matrix of size
    /// `n - 1`.
    pub(crate) fn grounded_csr(&self, ground: usize) -> sprs::CsMat<f64> {
        let m = self.n - 1;
        let shift = |j: usize| if j > ground { j - 1 } else { j };
        let mut indptr = Vec::with_capacity(m + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for i in (0..self.n).filter(|&i| i != ground) {
            for (j, x) in self.row(i) {
                if j != ground {
                    indices.push(shift(j));
                    data.push(x);
                }
            }
            indptr.push(indices.len());
        }
        sprs::CsMat::new((m, m), indptr, indices, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
            .unwrap()
            .0
    }

    #[test]
    fn canonical_order_and_adjacency() {
        let g = triangle();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
        for v in 0..3 {
            assert_eq!(g.degree(v), 2);
        }
        // every edge appears in exactly two adjacency rows
        let mut seen = vec![0; g.n_edges()];
        for v in 0..3 {
            for &(_, id) in g.neighbors(v) {
                seen[id] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 2));
    }

    #[test]
    fn merges_duplicates_and_drops_loops() {
        let (g, stats) =
            Graph::from_edges(3, [(1, 0, 2.0), (0, 1, 3.0), (2, 2, 9.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.edges()[0], Edge { u: 0, v: 1, w: 5.0 });
        assert_eq!(stats.self_loops_dropped, 1);
        assert_eq!(stats.duplicates_merged, 1);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            Graph::from_edges(2, [(0, 1, -1.0)]),
            Err(Error::Validation(_))
        ));
        assert!(Graph::from_edges(2, [(0, 1, f64::NAN)]).is_err());
        assert!(Graph::from_edges(2, [(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn laplacian_of_triangle() {
        let l = triangle().laplacian();
        assert_eq!(l.diagonal(), vec![2.0, 2.0, 2.0]);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(l.get(i, j), -1.0);
                }
            }
        }
    }

    #[test]
    fn laplacian_single_edge() {
        let g = Graph::from_edges(2, [(0, 1, 4.0)]).unwrap().0;
        let d = g.laplacian().to_dense();
        assert_eq!(d, nalgebra::DMatrix::from_row_slice(2, 2, &[4.0, -4.0, -4.0, 4.0]));
    }

    #[test]
    fn laplacian_weighted_path() {
        let g = Graph::from_edges(3, [(0, 1, 2.0), (1, 2, 4.0)]).unwrap().0;
        let l = g.laplacian();
        assert_eq!(l.diagonal(), vec![2.0, 6.0, 4.0]);
        assert_eq!(l.get(0, 1), -2.0);
        assert_eq!(l.get(1, 2), -4.0);
        assert_eq!(l.get(0, 2), 0.0);
    }

    #[test]
    fn components_and_largest() {
        let g = Graph::from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 2.0)])
            .unwrap()
            .0;
        assert!(!g.is_connected());
        assert!(matches!(g.ensure_connected(), Err(Error::Connectivity(_))));
        let (big, map) = g.largest_component();
        assert_eq!(map, vec![2, 3, 4]);
        assert_eq!(big.n_vertices(), 3);
        assert_eq!(big.edges()[1], Edge { u: 1, v: 2, w: 2.0 });
        assert!(big.is_connected());
    }

    #[test]
    fn grounded_matrix_drops_row_and_column() {
        let g = Graph::from_edges(3, [(0, 1, 2.0), (1, 2, 4.0)]).unwrap().0;
        let m = g.laplacian().grounded_csr(0);
        let dense = m.to_dense();
        assert_eq!(dense[[0, 0]], 6.0);
        assert_eq!(dense[[0, 1]], -4.0);
        assert_eq!(dense[[1, 1]], 4.0);
    }
}

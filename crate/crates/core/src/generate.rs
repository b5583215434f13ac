//! Synthetic connected graphs for tests and benchmarks.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mtx::{reweight_uniform, WEIGHT_HI, WEIGHT_LO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// `rows x cols` 4-neighbor lattice; vertex `r * cols + c`.
    Grid2d { rows: usize, cols: usize },
    /// Vertex 0 adjacent to `spokes` vertices, optionally with a cycle
    /// through the spokes. A small-scale stand-in for highly skewed graphs.
    Hub { spokes: usize, ring: bool },
    /// Random spanning tree plus uniformly random extra edges, `m` in total.
    RandomConnected { n: usize, m: usize, seed: u64 },
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphKind::Grid2d { rows, cols } => write!(f, "grid2d_{rows}x{cols}"),
            GraphKind::Hub { spokes, ring } => {
                write!(f, "hub_{spokes}{}", if ring { "_ring" } else { "" })
            }
            GraphKind::RandomConnected { n, m, seed } => write!(f, "random_{n}_{m}_s{seed}"),
        }
    }
}

/// Builds the graph topology and assigns uniform weights in `[1, 10]` drawn
/// from `weight_seed`.
pub fn generate(kind: GraphKind, weight_seed: u64) -> Result<Graph> {
    let (n, pairs) = topology(kind)?;
    let (g, _) = Graph::from_edges(n, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))?;
    Ok(reweight_uniform(&g, weight_seed, WEIGHT_LO, WEIGHT_HI))
}

fn topology(kind: GraphKind) -> Result<(usize, Vec<(usize, usize)>)> {
    match kind {
        GraphKind::Grid2d { rows, cols } => {
            if rows == 0 || cols == 0 {
                return Err(Error::Validation("grid2d needs rows, cols >= 1".into()));
            }
            let id = |r: usize, c: usize| r * cols + c;
            let mut pairs = Vec::with_capacity(2 * rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        pairs.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        pairs.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            Ok((rows * cols, pairs))
        }
        GraphKind::Hub { spokes, ring } => {
            if spokes == 0 || (ring && spokes < 3) {
                return Err(Error::Validation(
                    "hub needs at least 1 spoke, or 3 with a ring".into(),
                ));
            }
            let mut pairs: Vec<(usize, usize)> = (1..=spokes).map(|s| (0, s)).collect();
            if ring {
                pairs.extend((1..=spokes).map(|s| (s, s % spokes + 1)));
            }
            Ok((spokes + 1, pairs))
        }
        GraphKind::RandomConnected { n, m, seed } => {
            if n == 0 {
                return Err(Error::Validation("random_connected needs n >= 1".into()));
            }
            let max_edges = n * (n - 1) / 2;
            if m + 1 < n || m > max_edges {
                return Err(Error::Validation(format!(
                    "random_connected({n}, {m}): need n - 1 <= m <= {max_edges}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
            let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(m);
            let mut pairs = Vec::with_capacity(m);
            for i in 1..n {
                let j = rng.random_range(0..i);
                let e = key(order[i], order[j]);
                present.insert(e);
                pairs.push(e);
            }
            let extra = m - pairs.len();
            if 2 * m > max_edges {
                let mut pool: Vec<(usize, usize)> = (0..n)
                    .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                    .filter(|e| !present.contains(e))
                    .collect();
                pool.shuffle(&mut rng);
                pairs.extend(pool.into_iter().take(extra));
            } else {
                while pairs.len() < m {
                    let a = rng.random_range(0..n);
                    let b = rng.random_range(0..n);
                    if a != b && present.insert(key(a, b)) {
                        pairs.push(key(a, b));
                    }
                }
            }
            Ok((n, pairs))
        }
    }
}

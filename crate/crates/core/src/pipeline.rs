//! End-to-end sparsification: spanning tree, tree index, off-tree recovery.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::parallel::Parallelism;
use crate::recovery::{
    annotate_and_sort, budget_for, partition_subtasks, recover_loose_multipass, recover_strict, RecoveryResult,
    SortKey, DEFAULT_CUTOFF_ABS, DEFAULT_CUTOFF_FRAC,
};
use crate::spanning::{build_spanning_tree, SpanningTree};
use crate::treeindex::{TreeIndex, DEFAULT_HOP_BOUND};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Strict similarity over LCA subtasks, single pass.
    #[default]
    Strict,
    /// Loose similarity, multi-pass baseline.
    Loose,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Loose => "loose",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "loose" => Ok(Mode::Loose),
            _ => Err(Error::Validation(format!("unknown mode {s:?} (expected strict or loose)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyConfig {
    /// Recovery budget as a fraction of the vertex count.
    pub alpha: f64,
    /// Hop bound for neighborhoods.
    pub c: usize,
    pub mode: Mode,
    pub sort_key: SortKey,
    pub cutoff_abs: usize,
    pub cutoff_frac: f64,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig {
            alpha: 0.02,
            c: DEFAULT_HOP_BOUND,
            mode: Mode::Strict,
            sort_key: SortKey::ResistanceDistance,
            cutoff_abs: DEFAULT_CUTOFF_ABS,
            cutoff_frac: DEFAULT_CUTOFF_FRAC,
        }
    }
}

impl SparsifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Validation(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.c < 1 {
            return Err(Error::Validation("c must be at least 1".into()));
        }
        if self.cutoff_abs < 1 {
            return Err(Error::Validation("cutoff_abs must be at least 1".into()));
        }
        if !(self.cutoff_frac > 0.0 && self.cutoff_frac <= 1.0) {
            return Err(Error::Validation(format!(
                "cutoff_frac must lie in (0, 1], got {}",
                self.cutoff_frac
            )));
        }
        Ok(())
    }
}

/// Spanning tree and its index, reusable across recovery runs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub tree: SpanningTree,
    pub index: TreeIndex,
}

pub fn prepare(g: &Graph, exec: &Parallelism) -> Result<Prepared> {
    g.ensure_connected()?;
    let tree = build_spanning_tree(g, exec)?;
    let index = TreeIndex::build(&tree)?;
    Ok(Prepared { tree, index })
}

/// Runs off-tree recovery only. The returned duration covers annotation,
/// sorting, partitioning and recovery, and nothing else.
pub fn recover(g: &Graph, prep: &Prepared, cfg: &SparsifyConfig, exec: &Parallelism) -> Result<(RecoveryResult, Duration)> {
    cfg.validate()?;
    let budget = budget_for(cfg.alpha, g.n_vertices());
    let start = Instant::now();
    let sorted = annotate_and_sort(g, &prep.tree.offtree_edge_ids, &prep.index, cfg.sort_key, exec);
    let result = match cfg.mode {
        Mode::Strict => {
            let partition = partition_subtasks(&sorted, cfg.cutoff_abs, cfg.cutoff_frac);
            recover_strict(&sorted, &partition, &prep.index, budget, cfg.c, exec)
        }
        Mode::Loose => recover_loose_multipass(&sorted, &prep.index, budget, cfg.c),
    };
    Ok((result, start.elapsed()))
}

/// Tree edges plus recovered edges, original weights.
pub fn assemble(g: &Graph, tree: &SpanningTree, recovered: &[usize]) -> Graph {
    g.edge_subgraph(tree.tree_edge_ids.iter().chain(recovered).copied())
}

#[derive(Debug, Clone)]
pub struct SparsifyOutcome {
    pub tree: SpanningTree,
    pub result: RecoveryResult,
    pub recovery_time: Duration,
    pub sparsifier: Graph,
}

pub fn sparsify(g: &Graph, cfg: &SparsifyConfig, exec: &Parallelism) -> Result<SparsifyOutcome> {
    cfg.validate()?;
    let prep = prepare(g, exec)?;
    let (result, recovery_time) = recover(g, &prep, cfg, exec)?;
    let sparsifier = assemble(g, &prep.tree, &result.recovered);
    Ok(SparsifyOutcome {
        tree: prep.tree,
        result,
        recovery_time,
        sparsifier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};

    #[test]
    fn triangle_with_zero_budget_is_a_tree() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap().0;
        let cfg = SparsifyConfig {
            alpha: 0.2,
            ..Default::default()
        };
        let out = sparsify(&g, &cfg, &Parallelism::serial()).unwrap();
        assert_eq!(out.result.budget, 0);
        assert_eq!(out.sparsifier.n_edges(), 2);
        assert!(out.sparsifier.is_connected());
    }

    #[test]
    fn size_contract() {
        let g = generate(GraphKind::RandomConnected { n: 500, m: 1500, seed: 3 }, 3).unwrap();
        for mode in [Mode::Strict, Mode::Loose] {
            for alpha in [0.02, 0.05, 0.10, 1.0] {
                let cfg = SparsifyConfig {
                    alpha,
                    mode,
                    ..Default::default()
                };
                let out = sparsify(&g, &cfg, &Parallelism::serial()).unwrap();
                let budget = budget_for(alpha, 500).min(1001);
                let expected = 499 + budget.min(out.result.survivors);
                assert_eq!(out.sparsifier.n_edges(), expected, "{mode} {alpha}");
                assert_eq!(out.result.shortfall, budget - out.result.recovered.len());
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let g = generate(GraphKind::Hub { spokes: 300, ring: true }, 5).unwrap();
        let base = sparsify(&g, &SparsifyConfig::default(), &Parallelism::serial()).unwrap();
        for t in [2, 4] {
            let out = sparsify(&g, &SparsifyConfig::default(), &Parallelism::new(t).unwrap()).unwrap();
            assert_eq!(out.result.recovered, base.result.recovered);
            assert_eq!(out.sparsifier, base.sparsifier);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap().0;
        for cfg in [
            SparsifyConfig { alpha: 0.0, ..Default::default() },
            SparsifyConfig { alpha: 1.5, ..Default::default() },
            SparsifyConfig { c: 0, ..Default::default() },
        ] {
            assert!(matches!(sparsify(&g, &cfg, &Parallelism::serial()), Err(Error::Validation(_))));
        }
        assert_eq!("loose".parse::<Mode>().unwrap(), Mode::Loose);
        assert!("fast".parse::<Mode>().is_err());
    }
}

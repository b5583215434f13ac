//! Strict-similarity recovery over LCA subtasks.
//!
//! Within a subtask edges must be visited in rank order, since strict
//! similarity is not symmetric. Across subtasks there is no interaction at
//! all, so small subtasks run as independent tasks (outer parallelism) and
//! large ones run one at a time with their similarity scans spread over the
//! pool in blocks (inner parallelism). Every schedule returns exactly the
//! serial result.

use rayon::prelude::*;

use super::{clamp_budget, strict_similar, OffTreeEdge, RecoveryResult, SubtaskPartition, TreeBall};
use crate::parallel::Parallelism;
use super::rect::RectIndex;
use crate::treeindex::TreeIndex;

/// Subtasks up to this size are scanned pairwise.
const LINEAR_SCAN_MAX: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum ScanStrategy {
    Auto,
    Linear,
    Indexed,
}

/// Candidate lookup for one subtask.
///
/// For a recovered edge `(u, v)` with LCA `l`, `β*` never exceeds the depth
/// of `u` below `l`, so every vertex of `S_u` other than `l` sits in the
/// subtree of `u`'s ancestor `min(β*, depth below l - 1)` levels up.
/// Storing each candidate as the point (preorder `u'`, preorder `v'`) in
/// both orientations turns the search into at most three rectangle queries,
/// whose hits are then tested exactly.
pub(crate) struct SubtaskScan<'a> {
    edges: &'a [OffTreeEdge],
    rects: Option<RectIndex>,
}

impl<'a> SubtaskScan<'a> {
    pub(crate) fn new(edges: &'a [OffTreeEdge], idx: &TreeIndex, strategy: ScanStrategy) -> Self {
        let indexed = match strategy {
            ScanStrategy::Auto => edges.len() > LINEAR_SCAN_MAX,
            ScanStrategy::Linear => false,
            ScanStrategy::Indexed => true,
        };
        let rects = indexed.then(|| {
            assert!(idx.n_vertices() <= u32::MAX as usize && edges.len() <= u32::MAX as usize);
            let mut points = Vec::with_capacity(2 * edges.len());
            for (j, e) in edges.iter().enumerate() {
                let (a, b) = (idx.preorder(e.u) as u32, idx.preorder(e.v) as u32);
                points.push((a, b, j as u32));
                points.push((b, a, j as u32));
            }
            RectIndex::new(points)
        });
        SubtaskScan { edges, rects }
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    /// Calls `hit(j)` for every position `j > i` not excluded by `skip` whose
    /// edge is strictly similar to edge `i`. A position may be reported more
    /// than once.
    fn similar_after<S, H>(&self, i: usize, idx: &TreeIndex, c: usize, skip: S, mut hit: H)
    where
        S: Fn(usize) -> bool,
        H: FnMut(usize),
    {
        let e = &self.edges[i];
        let beta = idx.beta_star_via(e.u, e.v, e.lca, c);
        let su = TreeBall {
            idx,
            center: e.u,
            radius: beta,
        };
        let sv = TreeBall {
            idx,
            center: e.v,
            radius: beta,
        };
        let mut check = |j: usize| {
            if j > i && !skip(j) && strict_similar(&su, &sv, self.edges[j].endpoints()) {
                hit(j);
            }
        };
        let Some(rects) = &self.rects else {
            (i + 1..self.len()).for_each(&mut check);
            return;
        };

        let l = e.lca;
        let dl = idx.depth(l);
        // Preorder range holding S_x minus l; None when x is l.
        let side = |x: usize| {
            (x != l).then(|| {
                let dx = idx.depth(x);
                let up = beta.min(dx - dl - 1);
                let (a, b) = idx.subtree_range(idx.ancestor_at_depth(x, dx - up));
                (a as u32, b as u32)
            })
        };
        // Whether l itself lies in S_x.
        let reaches_lca = |x: usize| idx.depth(x) - dl <= beta;
        let at_l = (idx.preorder(l) as u32, idx.preorder(l) as u32);
        let mut report = |j: u32| check(j as usize);
        let (ru, rv) = (side(e.u), side(e.v));
        if let (Some(ru), Some(rv)) = (ru, rv) {
            rects.query(ru, rv, &mut report);
        }
        if let Some(rv) = rv.filter(|_| reaches_lca(e.u)) {
            rects.query(at_l, rv, &mut report);
        }
        if let Some(ru) = ru.filter(|_| reaches_lca(e.v)) {
            rects.query(ru, at_l, &mut report);
        }
    }
}

fn run_serial(scan: &SubtaskScan<'_>, idx: &TreeIndex, c: usize, marks: &mut [bool]) -> Vec<usize> {
    let mut survivors = Vec::new();
    for i in 0..scan.len() {
        if marks[i] {
            continue;
        }
        survivors.push(i);
        let mut newly = Vec::new();
        scan.similar_after(i, idx, c, |j| marks[j], |j| newly.push(j));
        for j in newly {
            marks[j] = true;
        }
    }
    survivors
}

/// Greedy recovery of one subtask, in rank order.
///
/// `edges` holds the subtask's edges by ascending rank and `marks[i]` flags
/// edge `i` as already similar to a recovered edge. Returns the positions of
/// recovered edges.
pub fn recover_subtask_serial(edges: &[OffTreeEdge], idx: &TreeIndex, c: usize, marks: &mut [bool]) -> Vec<usize> {
    assert_eq!(edges.len(), marks.len());
    let scan = SubtaskScan::new(edges, idx, ScanStrategy::Auto);
    run_serial(&scan, idx, c, marks)
}

#[cfg(test)]
pub(crate) fn recover_subtask_serial_with(
    edges: &[OffTreeEdge],
    idx: &TreeIndex,
    c: usize,
    marks: &mut [bool],
    strategy: ScanStrategy,
) -> Vec<usize> {
    let scan = SubtaskScan::new(edges, idx, strategy);
    run_serial(&scan, idx, c, marks)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockedOutcome {
    pub survivors: Vec<usize>,
    /// Block members whose tentative marks were thrown away because an
    /// earlier member of the same block marked them.
    pub discarded: usize,
    pub blocks: usize,
}

/// Blocked recovery of one subtask; same output as [`recover_subtask_serial`].
///
/// Each round first collects the next `block_size` unmarked edges serially,
/// so no worker is handed an edge it would skip. The members then scan for
/// similar edges concurrently, and a serial pass in rank order confirms
/// members that no earlier confirmed member marked and applies their marks.
pub fn recover_subtask_blocked(
    edges: &[OffTreeEdge],
    idx: &TreeIndex,
    c: usize,
    marks: &mut [bool],
    block_size: usize,
    exec: &Parallelism,
) -> BlockedOutcome {
    let scan = SubtaskScan::new(edges, idx, ScanStrategy::Auto);
    run_blocked(&scan, idx, c, marks, block_size, exec)
}

fn run_blocked(
    scan: &SubtaskScan<'_>,
    idx: &TreeIndex,
    c: usize,
    marks: &mut [bool],
    block_size: usize,
    exec: &Parallelism,
) -> BlockedOutcome {
    assert_eq!(scan.len(), marks.len());
    let block_size = block_size.max(1);
    let mut out = BlockedOutcome::default();
    let mut cursor = 0;
    let mut block = Vec::with_capacity(block_size);
    loop {
        block.clear();
        while cursor < scan.len() && block.len() < block_size {
            if !marks[cursor] {
                block.push(cursor);
            }
            cursor += 1;
        }
        if block.is_empty() {
            break;
        }
        out.blocks += 1;

        let frozen: &[bool] = marks;
        let tentative: Vec<Vec<usize>> = if exec.is_serial() || block.len() == 1 {
            block
                .iter()
                .map(|&b| {
                    let mut t = Vec::new();
                    scan.similar_after(b, idx, c, |j| frozen[j], |j| t.push(j));
                    t
                })
                .collect()
        } else {
            exec.install(|| {
                block
                    .par_iter()
                    .map(|&b| {
                        let mut t = Vec::new();
                        scan.similar_after(b, idx, c, |j| frozen[j], |j| t.push(j));
                        t
                    })
                    .collect()
            })
        };

        for (&b, marked) in block.iter().zip(tentative) {
            if marks[b] {
                out.discarded += 1;
                continue;
            }
            out.survivors.push(b);
            for j in marked {
                marks[j] = true;
            }
        }
    }
    out
}

struct SubtaskOutcome {
    survivor_ranks: Vec<usize>,
    marked: usize,
    discarded: usize,
}

fn gather(sorted: &[OffTreeEdge], ranks: &[usize]) -> Vec<OffTreeEdge> {
    ranks.iter().map(|&r| sorted[r]).collect()
}

fn small_subtask(sorted: &[OffTreeEdge], ranks: &[usize], idx: &TreeIndex, c: usize) -> SubtaskOutcome {
    if ranks.len() == 1 {
        return SubtaskOutcome {
            survivor_ranks: ranks.to_vec(),
            marked: 0,
            discarded: 0,
        };
    }
    let edges = gather(sorted, ranks);
    let scan = SubtaskScan::new(&edges, idx, ScanStrategy::Auto);
    let mut marks = vec![false; edges.len()];
    let survivors = run_serial(&scan, idx, c, &mut marks);
    SubtaskOutcome {
        survivor_ranks: survivors.into_iter().map(|p| ranks[p]).collect(),
        marked: marks.iter().filter(|&&m| m).count(),
        discarded: 0,
    }
}

/// Strict-mode recovery with the mixed schedule.
///
/// Large subtasks run one by one with blocks of `exec.threads()` edges; the
/// remaining subtasks are distributed over the pool. Survivors from all
/// subtasks are merged by rank and truncated to `budget`.
pub fn recover_strict(
    sorted: &[OffTreeEdge],
    partition: &SubtaskPartition,
    idx: &TreeIndex,
    budget: usize,
    c: usize,
    exec: &Parallelism,
) -> RecoveryResult {
    debug_assert_eq!(partition.n_edges(), sorted.len());
    let budget = clamp_budget(budget, sorted.len());
    let mut outcomes: Vec<Option<SubtaskOutcome>> = partition.subtasks.iter().map(|_| None).collect();

    for (k, sub) in partition.subtasks.iter().enumerate().filter(|(_, s)| s.large) {
        let edges = gather(sorted, &sub.ranks);
        let scan = SubtaskScan::new(&edges, idx, ScanStrategy::Auto);
        let mut marks = vec![false; edges.len()];
        let blocked = run_blocked(&scan, idx, c, &mut marks, exec.threads(), exec);
        outcomes[k] = Some(SubtaskOutcome {
            survivor_ranks: blocked.survivors.into_iter().map(|p| sub.ranks[p]).collect(),
            marked: marks.iter().filter(|&&m| m).count(),
            discarded: blocked.discarded,
        });
    }

    let small: Vec<usize> = (0..partition.subtasks.len())
        .filter(|&k| !partition.subtasks[k].large)
        .collect();
    let small_outcomes: Vec<SubtaskOutcome> = if exec.is_serial() {
        small
            .iter()
            .map(|&k| small_subtask(sorted, &partition.subtasks[k].ranks, idx, c))
            .collect()
    } else {
        exec.install(|| {
            small
                .par_iter()
                .map(|&k| small_subtask(sorted, &partition.subtasks[k].ranks, idx, c))
                .collect()
        })
    };
    for (k, o) in small.into_iter().zip(small_outcomes) {
        outcomes[k] = Some(o);
    }

    let mut result = RecoveryResult {
        passes: 1,
        budget,
        ..Default::default()
    };
    let mut survivor_ranks = Vec::new();
    for o in outcomes.into_iter().flatten() {
        result.marked_counts.push(o.marked);
        result.discarded_tentative += o.discarded;
        survivor_ranks.extend(o.survivor_ranks);
    }
    survivor_ranks.sort_unstable();
    result.survivors = survivor_ranks.len();
    survivor_ranks.truncate(budget);
    result.recovered = survivor_ranks.iter().map(|&r| sorted[r].edge_id).collect();
    result.shortfall = budget - result.recovered.len();
    if result.shortfall > 0 {
        log::warn!(
            "only {} of {budget} budgeted edges survive strict similarity",
            result.recovered.len()
        );
    }
    result
}

//! Parallel density-aware graph spectral sparsification.
//!
//! The pipeline has two phases:
//!
//! 1. a maximum spanning tree over effective edge weights ([`spanning`]),
//! 2. recovery of spectrally critical off-tree edges ([`recovery`]).
//!
//! Recovery uses a *strict* similarity test whose marks never cross edges
//! with different tree LCAs, so off-tree edges split into independent
//! subtasks that run in parallel. A loose, vertex-cover style multi-pass
//! baseline is included for comparison. Sparsifier quality is measured with
//! a PCG solver preconditioned by the sparsifier Laplacian ([`pcg`]).

pub mod cli;
pub mod error;
pub mod generate;
pub mod graph;
pub mod mtx;
pub mod parallel;
pub mod pcg;
pub mod pipeline;
pub mod recovery;
pub mod spanning;
pub mod treeindex;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, Laplacian};
pub use parallel::Parallelism;
pub use pipeline::{Mode, SparsifyConfig, SparsifyOutcome};
pub use recovery::{OffTreeEdge, RecoveryResult, SortKey, SubtaskPartition};
pub use spanning::SpanningTree;
pub use treeindex::TreeIndex;

/// Sentinel for "no vertex" (the root's parent, ancestors above the root).
pub const NONE: usize = usize::MAX;

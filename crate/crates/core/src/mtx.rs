//! Matrix Market coordinate files as undirected graphs.
//!
//! Reads `real`, `integer` and `pattern` coordinate matrices in `symmetric`
//! or `general` layout and writes graphs back as `real symmetric` lower
//! triangles. Indices are 1-based on disk and 0-based in memory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const WEIGHT_LO: f64 = 1.0;
pub const WEIGHT_HI: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightPolicy {
    /// Use the file's values. Pattern files are rejected.
    Keep,
    /// Replace every surviving edge weight with an independent draw from
    /// `[lo, hi]`, in canonical edge order.
    Uniform { seed: u64, lo: f64, hi: f64 },
}

impl WeightPolicy {
    pub fn uniform(seed: u64) -> Self {
        WeightPolicy::Uniform {
            seed,
            lo: WEIGHT_LO,
            hi: WEIGHT_HI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub weights: WeightPolicy,
    /// Keep only the largest component instead of failing on disconnected
    /// input.
    pub largest_component: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            weights: WeightPolicy::Keep,
            largest_component: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub entries: usize,
    pub self_loops_dropped: usize,
    pub zeros_dropped: usize,
    pub duplicates_merged: usize,
    pub mirrored_pairs: usize,
    /// Vertices discarded by largest-component extraction.
    pub vertices_dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    Symmetric,
    General,
}

#[derive(Debug, Clone, Copy)]
struct Header {
    field: Field,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(Error::format(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(Error::format(1, "only 'matrix coordinate' files are supported"));
    }
    let field = match tokens[3].as_str() {
        "real" | "integer" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(Error::format(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "symmetric" => Symmetry::Symmetric,
        "general" => Symmetry::General,
        other => return Err(Error::format(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header { field, symmetry })
}

/// Parses Matrix Market text into a graph.
pub fn parse_str(text: &str, opts: LoadOptions) -> Result<(Graph, LoadStats)> {
    parse_lines(text.lines().map(|l| Ok(l.to_owned())), opts)
}

/// Loads a Matrix Market file into a graph.
///
/// Duplicate entries for the same position are summed; in `general` files an
/// entry and its mirror are averaged into one undirected edge. Self-loops and
/// explicit zeros are dropped.
pub fn load(path: impl AsRef<Path>, opts: LoadOptions) -> Result<(Graph, LoadStats)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    parse_lines(reader.lines().map(|l| l.map_err(|e| Error::io(path, e))), opts)
}

fn parse_lines<I>(lines: I, opts: LoadOptions) -> Result<(Graph, LoadStats)>
where
    I: Iterator<Item = Result<String>>,
{
    let mut lines = lines.enumerate().map(|(i, l)| l.map(|l| (i + 1, l)));
    let header = match lines.next() {
        Some(line) => parse_header(&line?.1)?,
        None => return Err(Error::format(1, "empty file")),
    };
    if header.field == Field::Pattern && opts.weights == WeightPolicy::Keep {
        return Err(Error::Validation(
            "pattern matrix has no weights; use a uniform weight policy".into(),
        ));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut stats = LoadStats::default();
    // Keyed by the on-disk (row, col) so mirrors in general files can be paired.
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for line in lines {
        let (lineno, line) = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tok = trimmed.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            tok.next()
                .ok_or_else(|| Error::format(lineno, format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::format(lineno, format!("bad {what}: {e}")))
        };
        match size {
            None => {
                let rows = next_usize("row count")?;
                let cols = next_usize("column count")?;
                let nnz = next_usize("entry count")?;
                if rows != cols {
                    return Err(Error::format(lineno, format!("matrix is {rows}x{cols}, not square")));
                }
                size = Some((rows, nnz));
            }
            Some((n, _)) => {
                let i = next_usize("row index")?;
                let j = next_usize("column index")?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::format(lineno, format!("index ({i}, {j}) outside 1..={n}")));
                }
                let value = match header.field {
                    Field::Pattern => 1.0,
                    Field::Real => tok
                        .next()
                        .ok_or_else(|| Error::format(lineno, "missing value"))?
                        .parse::<f64>()
                        .map_err(|e| Error::format(lineno, format!("bad value: {e}")))?,
                };
                stats.entries += 1;
                if i == j {
                    stats.self_loops_dropped += 1;
                    continue;
                }
                if value == 0.0 {
                    stats.zeros_dropped += 1;
                    continue;
                }
                if opts.weights == WeightPolicy::Keep && !(value > 0.0 && value.is_finite()) {
                    return Err(Error::Validation(format!(
                        "line {lineno}: non-positive weight {value} for edge ({i}, {j})"
                    )));
                }
                let key = match header.symmetry {
                    Symmetry::Symmetric => (i.max(j) - 1, i.min(j) - 1),
                    Symmetry::General => (i - 1, j - 1),
                };
                entries
                    .entry(key)
                    .and_modify(|w| {
                        *w += value;
                        stats.duplicates_merged += 1;
                    })
                    .or_insert(value);
            }
        }
    }
    let (n, declared) = size.ok_or_else(|| Error::format(1, "missing size line"))?;
    if stats.entries != declared {
        log::warn!("header declares {declared} entries, found {}", stats.entries);
    }

    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    match header.symmetry {
        Symmetry::Symmetric => raw.extend(entries.iter().map(|(&(i, j), &w)| (j, i, w))),
        Symmetry::General => {
            for (&(i, j), &w) in &entries {
                match entries.get(&(j, i)) {
                    Some(&mirror) if i < j => {
                        stats.mirrored_pairs += 1;
                        raw.push((i, j, 0.5 * (w + mirror)));
                    }
                    Some(_) => {}
                    None => raw.push((i.min(j), i.max(j), w)),
                }
            }
        }
    }

    let (mut graph, _) = Graph::from_edges(n, raw.iter().map(|&(u, v, w)| (u, v, w.abs())))?;
    if opts.largest_component {
        let (big, map) = graph.largest_component();
        stats.vertices_dropped = n - map.len();
        graph = big;
    } else {
        graph.ensure_connected()?;
    }
    if let WeightPolicy::Uniform { seed, lo, hi } = opts.weights {
        graph = reweight_uniform(&graph, seed, lo, hi);
    }
    Ok((graph, stats))
}

/// Assigns independent uniform weights from `[lo, hi]` in canonical edge order.
pub fn reweight_uniform(g: &Graph, seed: u64, lo: f64, hi: f64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = g
        .edges()
        .iter()
        .map(|e| crate::graph::Edge {
            w: rng.random_range(lo..=hi),
            ..*e
        })
        .collect();
    Graph::from_canonical(g.n_vertices(), edges)
}

/// Renders a graph as a `real symmetric` Matrix Market document (lower
/// triangle, canonical edge order).
pub fn to_string(g: &Graph) -> String {
    let mut out = String::with_capacity(32 + 24 * g.n_edges());
    out.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
    let _ = writeln!(out, "{} {} {}", g.n_vertices(), g.n_vertices(), g.n_edges());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.v + 1, e.u + 1, e.w);
    }
    out
}

pub fn write(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(to_string(g).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

//! Command-line front end: `sparsify`, `evaluate`, `bench` and `gen`.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{generate, GraphKind};
use crate::graph::Graph;
use crate::mtx::{self, LoadOptions, WeightPolicy};
use crate::parallel::{available_threads, Parallelism};
use crate::pcg::{make_rhs, pcg_solve, relative_condition_number, Preconditioner, SolveReport, DEFAULT_MAX_ITER, DENSE_LIMIT};
use crate::pipeline::{self, Mode, SparsifyConfig};
use crate::recovery::{SortKey, DEFAULT_CUTOFF_ABS, DEFAULT_CUTOFF_FRAC};
use crate::spanning::select_root;

/// Environment variable that sets the default thread count.
pub const THREADS_ENV: &str = "PDGRASS_THREADS";

const STATS_SCHEMA: &str = "\
Stats CSV columns, in order:
  graph             input name (file stem or generator name)
  n_vertices        vertex count after loading
  n_edges           edge count of the input graph
  mode              strict | loose
  alpha             recovery budget fraction; budget = floor(alpha * n_vertices)
  threads           worker threads used for recovery
  recovery_time_ms  off-tree recovery phase only (bench: minimum over trials)
  passes            recovery passes (always 1 in strict mode)
  recovered         off-tree edges added to the spanning tree
  shortfall         budget minus recovered, when positive
  pcg_iterations    PCG iterations with the sparsifier preconditioner (empty if not run)
  converged         whether PCG reached the tolerance (empty if not run)";

#[derive(Debug, Parser)]
#[command(name = "pdgrass", version, about = "Spectral graph sparsification by spanning tree plus off-tree edge recovery")]
pub struct Cli {
    /// Worker threads; 1 runs without a thread pool.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a sparsifier and write it as Matrix Market.
    #[command(after_help = STATS_SCHEMA)]
    Sparsify(SparsifyArgs),
    /// Measure PCG iterations with a sparsifier as preconditioner.
    Evaluate(EvaluateArgs),
    /// Time recovery over a directory of Matrix Market graphs.
    #[command(after_help = STATS_SCHEMA)]
    Bench(BenchArgs),
    /// Write a synthetic graph.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Loose,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Loose => Mode::Loose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SortKeyArg {
    /// Tree resistance distance.
    Rdist,
    /// Weight times tree resistance distance.
    Stretch,
}

impl From<SortKeyArg> for SortKey {
    fn from(k: SortKeyArg) -> Self {
        match k {
            SortKeyArg::Rdist => SortKey::ResistanceDistance,
            SortKeyArg::Stretch => SortKey::Stretch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    /// Random weights for pattern files, file values otherwise.
    Auto,
    /// File values; pattern files are rejected.
    Keep,
    /// Random weights in [1, 10] from --seed.
    Uniform,
}

/// Options shared by every command that loads graphs.
#[derive(Debug, Clone, Args)]
pub struct LoadArgs {
    /// Weight policy.
    #[arg(long, value_enum, default_value_t = WeightsArg::Auto)]
    pub weights: WeightsArg,
    /// Seed for random weights.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the largest connected component instead of rejecting
    /// disconnected input.
    #[arg(long)]
    pub largest_component: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RecoveryArgs {
    /// Budget as a fraction of the vertex count.
    #[arg(long, default_value_t = 0.02)]
    pub alpha: f64,
    /// Hop bound for tree neighborhoods.
    #[arg(long = "c", default_value_t = crate::treeindex::DEFAULT_HOP_BOUND)]
    pub c: usize,
    #[arg(long, value_enum, default_value_t = SortKeyArg::Rdist)]
    pub sort_key: SortKeyArg,
    /// Absolute size at which a subtask counts as large.
    #[arg(long, default_value_t = DEFAULT_CUTOFF_ABS)]
    pub cutoff_abs: usize,
    /// Fraction of off-tree edges at which a subtask counts as large.
    #[arg(long, default_value_t = DEFAULT_CUTOFF_FRAC)]
    pub cutoff_frac: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SparsifyArgs {
    /// Input graph (Matrix Market).
    pub input: PathBuf,
    /// Output sparsifier (Matrix Market).
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub recovery: RecoveryArgs,
    #[command(flatten)]
    pub load: LoadArgs,
    /// Also write the stats record to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Original graph (Matrix Market).
    pub graph: PathBuf,
    /// Sparsifier on the same vertex set (Matrix Market).
    pub sparsifier: PathBuf,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = crate::pcg::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Seed of the random right-hand side.
    #[arg(long, default_value_t = 1)]
    pub rhs_seed: u64,
    /// Also compute the relative condition number (dense, small graphs only).
    #[arg(long)]
    pub kappa: bool,
    /// Weight policy for the original graph. The sparsifier always keeps its
    /// file weights.
    #[arg(long, value_enum, default_value_t = WeightsArg::Auto)]
    pub weights: WeightsArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of .mtx files, processed in name order.
    pub suite_dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [0.02, 0.05, 0.10])]
    pub alphas: Vec<f64>,
    /// Thread counts to time; defaults to the global thread count.
    #[arg(long, value_delimiter = ',')]
    pub thread_list: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::Strict, ModeArg::Loose])]
    pub modes: Vec<ModeArg>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Timed trials per cell; the minimum is reported.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Skip the PCG evaluation columns.
    #[arg(long)]
    pub no_pcg: bool,
    #[arg(long, default_value_t = crate::pcg::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub rhs_seed: u64,
    #[command(flatten)]
    pub recovery: RecoveryArgs,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// grid2d ROWS COLS
    Grid2d,
    /// hub SPOKES
    Hub,
    /// random N M
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Size parameters for the chosen kind.
    #[arg(required = true)]
    pub params: Vec<usize>,
    /// Seed for topology (random kind) and weights.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hub without the cycle through the spokes.
    #[arg(long)]
    pub no_ring: bool,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// One row of the stats CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRecord {
    pub graph: String,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub mode: String,
    pub alpha: f64,
    pub threads: usize,
    pub recovery_time_ms: f64,
    pub passes: usize,
    pub recovered: usize,
    pub shortfall: usize,
    pub pcg_iterations: Option<usize>,
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateRecord {
    pub graph: String,
    pub n_vertices: usize,
    pub graph_edges: usize,
    pub sparsifier_edges: usize,
    pub pcg_iterations: usize,
    pub converged: bool,
    pub final_relative_residual: f64,
    pub kappa: Option<f64>,
}

fn graph_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn is_pattern_file(path: &Path) -> Result<bool> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    Ok(first.to_ascii_lowercase().split_whitespace().any(|t| t == "pattern"))
}

fn load_graph(path: &Path, weights: WeightsArg, seed: u64, largest_component: bool) -> Result<Graph> {
    let policy = match weights {
        WeightsArg::Keep => WeightPolicy::Keep,
        WeightsArg::Uniform => WeightPolicy::uniform(seed),
        WeightsArg::Auto if is_pattern_file(path)? => WeightPolicy::uniform(seed),
        WeightsArg::Auto => WeightPolicy::Keep,
    };
    let (g, stats) = mtx::load(
        path,
        LoadOptions {
            weights: policy,
            largest_component,
        },
    )?;
    log::info!("loaded {}: {} vertices, {} edges ({stats:?})", path.display(), g.n_vertices(), g.n_edges());
    Ok(g)
}

fn write_csv<T: Serialize>(out: impl Write, rows: &[T], header_only: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(header_only)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

const STATS_HEADER: [&str; 12] = [
    "graph",
    "n_vertices",
    "n_edges",
    "mode",
    "alpha",
    "threads",
    "recovery_time_ms",
    "passes",
    "recovered",
    "shortfall",
    "pcg_iterations",
    "converged",
];

/// Writes stats rows as CSV with the fixed header.
pub fn write_stats(out: impl Write, rows: &[StatsRecord]) -> Result<()> {
    write_csv(out, rows, &STATS_HEADER)
}

fn write_stats_file(path: &Path, rows: &[StatsRecord]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_stats(io::BufWriter::new(file), rows)
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl RecoveryArgs {
    fn config(&self, mode: Mode, alpha: f64) -> SparsifyConfig {
        SparsifyConfig {
            alpha,
            c: self.c,
            mode,
            sort_key: self.sort_key.into(),
            cutoff_abs: self.cutoff_abs,
            cutoff_frac: self.cutoff_frac,
        }
    }
}

fn describe(cfg: &SparsifyConfig, threads: usize, load: &LoadArgs) -> String {
    format!(
        "alpha={} c={} mode={} threads={threads} seed={} sort_key={} cutoff_abs={} cutoff_frac={} weights={:?} largest_component={}",
        cfg.alpha,
        cfg.c,
        cfg.mode,
        load.seed,
        match cfg.sort_key {
            SortKey::ResistanceDistance => "rdist",
            SortKey::Stretch => "stretch",
        },
        cfg.cutoff_abs,
        cfg.cutoff_frac,
        load.weights,
        load.largest_component,
    )
    .to_lowercase()
}

/// Loads, sparsifies and writes the sparsifier. Returns the stats record.
pub fn cmd_sparsify(args: &SparsifyArgs, threads: usize) -> Result<StatsRecord> {
    let cfg = args.recovery.config(args.mode.into(), args.recovery.alpha);
    cfg.validate()?;
    eprintln!("run config: {}", describe(&cfg, threads, &args.load));
    let exec = Parallelism::new(threads)?;
    let g = load_graph(&args.input, args.load.weights, args.load.seed, args.load.largest_component)?;
    let out = pipeline::sparsify(&g, &cfg, &exec)?;
    mtx::write(&args.output, &out.sparsifier)?;
    if out.result.shortfall > 0 {
        log::warn!(
            "recovered {} of {} budgeted edges (shortfall {})",
            out.result.recovered.len(),
            out.result.budget,
            out.result.shortfall
        );
    }
    let record = StatsRecord {
        graph: graph_name(&args.input),
        n_vertices: g.n_vertices(),
        n_edges: g.n_edges(),
        mode: cfg.mode.to_string(),
        alpha: cfg.alpha,
        threads,
        recovery_time_ms: millis(out.recovery_time),
        passes: out.result.passes,
        recovered: out.result.recovered.len(),
        shortfall: out.result.shortfall,
        pcg_iterations: None,
        converged: None,
    };
    if let Some(path) = &args.csv {
        write_stats_file(path, std::slice::from_ref(&record))?;
    }
    Ok(record)
}

/// PCG on `g` preconditioned by `sparsifier`, grounded at the root the
/// spanning tree of `g` would use.
pub fn evaluate_pair(g: &Graph, sparsifier: &Graph, tol: f64, max_iter: usize, rhs_seed: u64) -> Result<SolveReport> {
    if g.n_vertices() != sparsifier.n_vertices() {
        return Err(Error::Validation(format!(
            "graph has {} vertices but sparsifier has {}",
            g.n_vertices(),
            sparsifier.n_vertices()
        )));
    }
    let pre = Preconditioner::new(&sparsifier.laplacian(), select_root(g)?)?;
    let b = make_rhs(g.n_vertices(), rhs_seed)?;
    let (_, report) = pcg_solve(&g.laplacian(), &b, &pre, tol, max_iter)?;
    Ok(report)
}

pub fn cmd_evaluate(args: &EvaluateArgs, threads: usize) -> Result<EvaluateRecord> {
    eprintln!(
        "run config: tol={} max_iter={} rhs_seed={} kappa={} weights={:?} seed={} threads={threads}",
        args.tol, args.max_iter, args.rhs_seed, args.kappa, args.weights, args.seed
    );
    let g = load_graph(&args.graph, args.weights, args.seed, false)?;
    let p = load_graph(&args.sparsifier, WeightsArg::Keep, 0, false)?;
    let report = evaluate_pair(&g, &p, args.tol, args.max_iter, args.rhs_seed)?;
    let kappa = if args.kappa {
        if g.n_vertices() > DENSE_LIMIT {
            log::warn!("skipping condition number: {} vertices exceeds {DENSE_LIMIT}", g.n_vertices());
            None
        } else {
            Some(relative_condition_number(&g.laplacian(), &p.laplacian())?)
        }
    } else {
        None
    };
    Ok(EvaluateRecord {
        graph: graph_name(&args.graph),
        n_vertices: g.n_vertices(),
        graph_edges: g.n_edges(),
        sparsifier_edges: p.n_edges(),
        pcg_iterations: report.iterations,
        converged: report.converged,
        final_relative_residual: report.final_relative_residual,
        kappa,
    })
}

fn bench_graph(
    path: &Path,
    args: &BenchArgs,
    pools: &[(usize, Parallelism)],
    rows: &mut Vec<StatsRecord>,
) -> Result<()> {
    let g = load_graph(path, args.load.weights, args.load.seed, args.load.largest_component)?;
    let widest = pools.iter().max_by_key(|(t, _)| *t).map(|(_, p)| p).expect("at least one pool");
    // One tree for every mode and alpha.
    let prep = pipeline::prepare(&g, widest)?;
    let name = graph_name(path);
    for &mode in &args.modes {
        for &alpha in &args.alphas {
            let cfg = args.recovery.config(mode.into(), alpha);
            let mut quality: Option<SolveReport> = None;
            for (threads, exec) in pools {
                let mut best = Duration::MAX;
                let mut result = None;
                for _ in 0..args.trials {
                    let (r, t) = pipeline::recover(&g, &prep, &cfg, exec)?;
                    best = best.min(t);
                    result.get_or_insert(r);
                }
                let result = result.expect("trials >= 1");
                if !args.no_pcg && quality.is_none() {
                    let sparsifier = pipeline::assemble(&g, &prep.tree, &result.recovered);
                    quality = Some(evaluate_pair(&g, &sparsifier, args.tol, DEFAULT_MAX_ITER, args.rhs_seed)?);
                }
                rows.push(StatsRecord {
                    graph: name.clone(),
                    n_vertices: g.n_vertices(),
                    n_edges: g.n_edges(),
                    mode: cfg.mode.to_string(),
                    alpha,
                    threads: *threads,
                    recovery_time_ms: millis(best),
                    passes: result.passes,
                    recovered: result.recovered.len(),
                    shortfall: result.shortfall,
                    pcg_iterations: quality.as_ref().map(|q| q.iterations),
                    converged: quality.as_ref().map(|q| q.converged),
                });
            }
        }
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs, threads: usize) -> Result<Vec<StatsRecord>> {
    if args.trials == 0 {
        return Err(Error::Validation("--trials must be at least 1".into()));
    }
    for &alpha in &args.alphas {
        args.recovery.config(Mode::Strict, alpha).validate()?;
    }
    let thread_list = if args.thread_list.is_empty() {
        vec![threads]
    } else {
        args.thread_list.clone()
    };
    eprintln!(
        "run config: alphas={:?} modes={:?} thread_list={thread_list:?} trials={} c={} sort_key={:?} cutoff_abs={} cutoff_frac={} weights={:?} seed={} pcg={} tol={} rhs_seed={}",
        args.alphas,
        args.modes,
        args.trials,
        args.recovery.c,
        args.recovery.sort_key,
        args.recovery.cutoff_abs,
        args.recovery.cutoff_frac,
        args.load.weights,
        args.load.seed,
        !args.no_pcg,
        args.tol,
        args.rhs_seed,
    );
    let pools = thread_list
        .iter()
        .map(|&t| Parallelism::new(t).map(|p| (t, p)))
        .collect::<Result<Vec<_>>>()?;

    let mut files: Vec<PathBuf> = fs::read_dir(&args.suite_dir)
        .map_err(|e| Error::io(&args.suite_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("mtx")))
        .collect();
    files.sort();

    let mut rows = Vec::new();
    for path in &files {
        let before = rows.len();
        if let Err(e) = bench_graph(path, args, &pools, &mut rows) {
            log::error!("skipping {}: {e}", path.display());
            rows.truncate(before);
        }
    }
    match &args.csv {
        Some(path) => write_stats_file(path, &rows)?,
        None => write_stats(io::stdout().lock(), &rows)?,
    }
    Ok(rows)
}

pub fn gen_kind(args: &GenArgs) -> Result<GraphKind> {
    let p = &args.params;
    let want = |k: usize, usage: &str| {
        if p.len() == k {
            Ok(())
        } else {
            Err(Error::Validation(format!("expected {usage}, got {} parameters", p.len())))
        }
    };
    Ok(match args.kind {
        GenKind::Grid2d => {
            want(2, "grid2d ROWS COLS")?;
            GraphKind::Grid2d { rows: p[0], cols: p[1] }
        }
        GenKind::Hub => {
            want(1, "hub SPOKES")?;
            GraphKind::Hub {
                spokes: p[0],
                ring: !args.no_ring,
            }
        }
        GenKind::Random => {
            want(2, "random N M")?;
            GraphKind::RandomConnected {
                n: p[0],
                m: p[1],
                seed: args.seed,
            }
        }
    })
}

pub fn cmd_gen(args: &GenArgs) -> Result<Graph> {
    let kind = gen_kind(args)?;
    eprintln!("run config: kind={kind} seed={}", args.seed);
    let g = generate(kind, args.seed)?;
    match &args.output {
        Some(path) => mtx::write(path, &g)?,
        None => io::stdout()
            .lock()
            .write_all(mtx::to_string(&g).as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(g)
}

/// Parses arguments, runs the command and prints its record.
pub fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.unwrap_or_else(available_threads);
    if threads == 0 {
        return Err(Error::Validation("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Sparsify(args) => {
            let record = cmd_sparsify(args, threads)?;
            write_stats(io::stdout().lock(), &[record])
        }
        Command::Evaluate(args) => {
            let record = cmd_evaluate(args, threads)?;
            write_csv(io::stdout().lock(), &[record], &[])
        }
        Command::Bench(args) => cmd_bench(args, threads).map(|_| ()),
        Command::Gen(args) => cmd_gen(args).map(|_| ()),
    }
}

//! The `xcsr` command line: `gen`, `transpose`, `verify`, `bench`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 backend failure.

use std::fs::File;
use std::io::BufWriter;
use std::net::{Ipv4Addr, SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{run_sweep, BenchConfig, BenchError, ScalingMode};
use crate::collectives::{tcp_connect, CommStats, TcpConfig};
use crate::io::{load_dataset, merge_shards, shard_file_name, write_dataset, write_shard_file, DatasetError, Manifest};
use crate::oracle::{gather_and_compare, generate, oracle_transpose, GenMode, GenSpec};
use crate::runner::{rank_program, run_transposes, Backend, RankReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("backend failure: {0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) => 2,
            CliError::Backend(_) => 3,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "xcsr", about = "Distributed transpose of XCSR multigraph matrices", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Subcmd,
}

#[derive(Debug, Subcommand)]
pub enum Subcmd {
    /// Generate a seeded dataset as per-rank shard files plus a manifest.
    Gen(GenArgs),
    /// Apply chained distributed transposes to a dataset.
    Transpose(TransposeArgs),
    /// Check an output dataset against the reference transpose of an input.
    Verify(VerifyArgs),
    /// Run a weak or strong scaling sweep and write CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Balanced,
    Heterogeneous,
}

/// Dataset shape flags shared by `gen` and `bench`. Unset column bounds
/// default to 64..256 (heterogeneous) or 512 (balanced), clamped to the
/// matrix dimension.
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Cells per row (balanced).
    #[arg(long)]
    pub cols: Option<u64>,
    /// Minimum cells per row (heterogeneous).
    #[arg(long)]
    pub cols_min: Option<u64>,
    /// Maximum cells per row (heterogeneous).
    #[arg(long)]
    pub cols_max: Option<u64>,
    /// Values per cell (balanced) or mean values per cell (heterogeneous).
    #[arg(long)]
    pub values: Option<f64>,
    /// Bytes per value.
    #[arg(long, default_value_t = 128)]
    pub value_size: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ShapeArgs {
    fn mode(&self, shape: Shape, dim: u64) -> Result<GenMode, CliError> {
        Ok(match shape {
            Shape::Balanced => {
                let values = self.values.unwrap_or(10.0);
                if values.fract() != 0.0 || values < 1.0 {
                    return Err(CliError::Config(format!(
                        "balanced --values must be a positive integer, got {values}"
                    )));
                }
                GenMode::Balanced { cols: self.cols.unwrap_or(512.min(dim)), values: values as u64 }
            }
            Shape::Heterogeneous => GenMode::Heterogeneous {
                cols_min: self.cols_min.unwrap_or(64.min(dim)),
                cols_max: self.cols_max.unwrap_or(256.min(dim)),
                value_count_mean: self.values.unwrap_or(5.0),
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = Shape::Heterogeneous)]
    pub mode: Shape,
    #[arg(long)]
    pub dim: u64,
    #[arg(long, default_value_t = 1)]
    pub ranks: usize,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value = "dataset")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value_t = Backend::Sim)]
    pub backend: Backend,
    /// Run as this single rank of a TCP group (otherwise all ranks are
    /// spawned locally).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Group size when running a single rank.
    #[arg(long)]
    pub ranks: Option<usize>,
    /// Rank 0's address; required with --rank.
    #[arg(long)]
    pub rendezvous: Option<SocketAddr>,
    #[arg(long, default_value_t = 30)]
    pub timeout_s: u64,
}

#[derive(Debug, Args)]
pub struct TransposeArgs {
    /// Input manifest.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Output dataset name; defaults to `<input>.t<repeat>`.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub mode: ScalingMode,
    /// Comma-separated rank counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ranks: Vec<usize>,
    #[arg(long, required_if_eq("mode", "weak"))]
    pub rows_per_rank: Option<u64>,
    #[arg(long, required_if_eq("mode", "strong"))]
    pub total_rows: Option<u64>,
    #[arg(long, value_enum, default_value_t = Shape::Balanced)]
    pub dataset: Shape,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[arg(long, value_enum, default_value_t = Backend::Sim)]
    pub backend: Backend,
    #[arg(long, default_value_t = 30)]
    pub timeout_s: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Collective statistics of one `transpose` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransposeStats {
    pub backend: Backend,
    pub ranks: usize,
    pub repeat: usize,
    pub wall_time_s: f64,
    pub allgather_calls: u64,
    pub alltoall_calls: u64,
    pub alltoallv_calls: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub per_rank: Vec<RankReport>,
}

impl TransposeStats {
    fn new(backend: Backend, repeat: usize, wall_time_s: f64, per_rank: Vec<RankReport>) -> Self {
        let total: CommStats = per_rank.iter().map(|r| r.stats).sum();
        TransposeStats {
            backend,
            ranks: per_rank.len(),
            repeat,
            wall_time_s,
            allgather_calls: total.allgather.calls,
            alltoall_calls: total.alltoall.calls,
            alltoallv_calls: total.alltoallv.calls,
            bytes_sent: total.bytes_sent(),
            bytes_received: total.bytes_received(),
            per_rank,
        }
    }

    pub fn stats_file(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.stats.json"))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::to_writer_pretty(BufWriter::new(f), value)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let f = File::open(path).map_err(|e| CliError::Backend(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(f))
        .map_err(|e| CliError::Backend(format!("{}: {e}", path.display())))
}

pub fn cmd_gen(args: &GenArgs) -> Result<PathBuf, CliError> {
    let spec = GenSpec {
        mode: args.shape.mode(args.mode, args.dim)?,
        global_dim: args.dim,
        ranks: args.ranks,
        value_size: args.shape.value_size,
        seed: args.shape.seed,
    };
    let data = generate(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let manifest = write_dataset(&args.out, &args.name, &data.shards, Some(spec), 0)?;
    println!(
        "wrote {} shards ({} cells, {} values) and {}",
        data.shards.len(),
        data.triplets.entries.len(),
        data.triplets.total_values(),
        manifest.display()
    );
    Ok(manifest)
}

pub fn cmd_transpose(args: &TransposeArgs) -> Result<PathBuf, CliError> {
    if args.repeat == 0 {
        return Err(CliError::Config("--repeat must be at least 1".into()));
    }
    let input = Manifest::load(&args.input)?;
    let name = args.name.clone().unwrap_or_else(|| format!("{}.t{}", input.name, args.repeat));
    let timeout = Duration::from_secs(args.backend.timeout_s);
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Config(format!("{}: {e}", args.out.display())))?;

    if let Some(rank) = args.backend.rank {
        return transpose_one_rank(args, &input, &name, rank, timeout);
    }

    let (manifest, shards) = load_dataset(&args.input)?;
    let (out_shards, reports, wall) = match args.backend.backend {
        Backend::Sim => run_in_process(Backend::Sim, &shards, args.repeat, timeout)?,
        Backend::Tcp => {
            drop(shards);
            return transpose_multi_process(args, &manifest, &name);
        }
    };
    let path =
        write_dataset(&args.out, &name, &out_shards, manifest.spec.clone(), manifest.transposes + args.repeat as u64)?;
    let stats = TransposeStats::new(args.backend.backend, args.repeat, wall, reports);
    write_json(&TransposeStats::stats_file(&args.out, &name), &stats)?;
    print_summary(&stats, &path);
    Ok(path)
}

fn run_in_process(
    backend: Backend,
    shards: &[crate::xcsr::XcsrShard],
    repeat: usize,
    timeout: Duration,
) -> Result<(Vec<crate::xcsr::XcsrShard>, Vec<RankReport>, f64), CliError> {
    let run = run_transposes(backend, shards, repeat, timeout).map_err(|e| CliError::Backend(e.to_string()))?;
    let wall = run.wall_time.as_secs_f64();
    Ok((run.shards, run.reports, wall))
}

fn print_summary(stats: &TransposeStats, manifest: &Path) {
    println!(
        "{} x transpose on {} ranks ({}): {:.6} s, calls allgather={} alltoall={} alltoallv={}, bytes sent={} recv={}",
        stats.repeat,
        stats.ranks,
        stats.backend,
        stats.wall_time_s,
        stats.allgather_calls,
        stats.alltoall_calls,
        stats.alltoallv_calls,
        stats.bytes_sent,
        stats.bytes_received
    );
    println!("wrote {}", manifest.display());
}

fn rank_stats_file(dir: &Path, name: &str, rank: usize) -> PathBuf {
    dir.join(format!("{name}.r{rank}.stats.json"))
}

/// One process of a TCP group: loads its own shard, runs, writes its output
/// shard and stats. Rank 0 also writes the output manifest.
fn transpose_one_rank(
    args: &TransposeArgs,
    input: &Manifest,
    name: &str,
    rank: usize,
    timeout: Duration,
) -> Result<PathBuf, CliError> {
    if args.backend.backend != Backend::Tcp {
        return Err(CliError::Config("--rank requires --backend tcp".into()));
    }
    let ranks = args.backend.ranks.unwrap_or(input.ranks);
    if ranks != input.ranks || rank >= ranks {
        return Err(CliError::Config(format!(
            "rank {rank} of {ranks} does not fit a dataset of {} shards",
            input.ranks
        )));
    }
    let rendezvous = args.backend.rendezvous.ok_or_else(|| CliError::Config("--rank requires --rendezvous".into()))?;
    let shard_path = input.shard_paths(&args.input)[rank].clone();
    let shard = crate::io::read_shard_file(&shard_path)?;

    let mut cfg = TcpConfig::new(rank, ranks, rendezvous);
    cfg.timeout = timeout;
    let comm = tcp_connect(&cfg).map_err(|e| CliError::Backend(e.to_string()))?;
    let (out, report) = rank_program(comm, &shard, args.repeat).map_err(|e| CliError::Backend(e.to_string()))?;

    let file = shard_file_name(name, rank);
    write_shard_file(&out, &args.out.join(&file))?;
    write_json(&rank_stats_file(&args.out, name, rank), &report)?;
    let manifest_path = args.out.join(Manifest::file_name(name));
    if rank == 0 {
        let manifest = Manifest {
            name: name.to_string(),
            files: (0..ranks).map(|r| shard_file_name(name, r)).collect(),
            transposes: input.transposes + args.repeat as u64,
            ..input.clone()
        };
        manifest.store(&manifest_path)?;
    }
    Ok(manifest_path)
}

fn free_loopback_port() -> Result<SocketAddr, CliError> {
    let l = TcpListener::bind((Ipv4Addr::LOCALHOST, 0)).map_err(|e| CliError::Backend(format!("no free port: {e}")))?;
    l.local_addr().map_err(|e| CliError::Backend(e.to_string()))
}

/// Spawns one child process per rank and joins them.
fn transpose_multi_process(args: &TransposeArgs, input: &Manifest, name: &str) -> Result<PathBuf, CliError> {
    let exe = std::env::current_exe().map_err(|e| CliError::Backend(format!("cannot locate executable: {e}")))?;
    let rendezvous = free_loopback_port()?;
    let started = Instant::now();
    let mut children = Vec::with_capacity(input.ranks);
    for rank in 0..input.ranks {
        let child = Command::new(&exe)
            .arg("transpose")
            .arg("--input")
            .arg(&args.input)
            .arg("--out")
            .arg(&args.out)
            .args(["--name", name])
            .args(["--repeat", &args.repeat.to_string()])
            .args(["--backend", "tcp"])
            .args(["--rank", &rank.to_string()])
            .args(["--ranks", &input.ranks.to_string()])
            .args(["--rendezvous", &rendezvous.to_string()])
            .args(["--timeout-s", &args.backend.timeout_s.to_string()])
            .stdout(std::process::Stdio::null())
            .spawn()
            .map_err(|e| CliError::Backend(format!("spawning rank {rank}: {e}")))?;
        children.push(child);
    }
    let mut failed = Vec::new();
    for (rank, mut child) in children.into_iter().enumerate() {
        match child.wait() {
            Ok(status) if status.success() => {}
            Ok(status) => failed.push(format!("rank {rank} exited with {status}")),
            Err(e) => failed.push(format!("rank {rank}: {e}")),
        }
    }
    if !failed.is_empty() {
        return Err(CliError::Backend(failed.join("; ")));
    }
    let elapsed = started.elapsed().as_secs_f64();
    let mut reports = Vec::with_capacity(input.ranks);
    for rank in 0..input.ranks {
        let path = rank_stats_file(&args.out, name, rank);
        reports.push(read_json::<RankReport>(&path)?);
        let _ = std::fs::remove_file(path);
    }
    let wall = reports.iter().map(|r| r.transpose_seconds).fold(0.0, f64::max).min(elapsed);
    let stats = TransposeStats::new(Backend::Tcp, args.repeat, wall, reports);
    write_json(&TransposeStats::stats_file(&args.out, name), &stats)?;
    let path = args.out.join(Manifest::file_name(name));
    print_summary(&stats, &path);
    Ok(path)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let (input, input_shards) = load_dataset(&args.input)?;
    let (output, output_shards) = load_dataset(&args.output)?;
    if output.transposes < input.transposes {
        return Err(CliError::Config(format!(
            "output records {} transposes, input {}: not derived from it",
            output.transposes, input.transposes
        )));
    }
    let applied = output.transposes - input.transposes;
    let original = merge_shards(&input_shards)?;
    let expected = if applied % 2 == 1 { oracle_transpose(&original) } else { original };
    merge_shards(&output_shards)?;
    let report = gather_and_compare(&output_shards, &expected).map_err(|e| CliError::Config(e.to_string()))?;
    let label = if applied % 2 == 1 { "transpose of input" } else { "input" };
    if report.matched {
        println!("PASS: output equals {label} after {applied} transposes ({report})");
        Ok(())
    } else {
        Err(CliError::Verify(format!("output differs from {label} after {applied} transposes: {report}")))
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let probe_rows = match args.mode {
        ScalingMode::Weak => args.rows_per_rank.unwrap_or(0) * args.ranks.iter().copied().min().unwrap_or(1) as u64,
        ScalingMode::Strong => args.total_rows.unwrap_or(0),
    };
    let cfg = BenchConfig {
        mode: args.mode,
        backend: args.backend,
        ranks: args.ranks.clone(),
        rows_per_rank: args.rows_per_rank.unwrap_or(0),
        total_rows: args.total_rows.unwrap_or(0),
        shape: args.shape.mode(args.dataset, probe_rows)?,
        value_size: args.shape.value_size,
        repetitions: args.repeat,
        seed: args.shape.seed,
        timeout: Duration::from_secs(args.timeout_s),
    };
    let result = match &args.csv {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            run_sweep(&cfg, f)
        }
        None => run_sweep(&cfg, std::io::stdout().lock()),
    };
    match result {
        Ok(records) => {
            for r in records {
                eprintln!(
                    "{} R={} rows={} time={:.6}s sent={} recv={}",
                    r.mode, r.ranks, r.total_rows, r.wall_time_seconds, r.bytes_sent_total, r.bytes_received_total
                );
            }
            Ok(())
        }
        Err(e @ BenchError::Backend { .. }) => Err(CliError::Backend(e.to_string())),
        Err(e) => Err(CliError::Config(e.to_string())),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Subcmd::Gen(a) => cmd_gen(a).map(|_| ()),
        Subcmd::Transpose(a) => cmd_transpose(a).map(|_| ()),
        Subcmd::Verify(a) => cmd_verify(a),
        Subcmd::Bench(a) => cmd_bench(a),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

//! Weak and strong scaling sweeps with CSV output.

use std::fmt;
use std::io::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collectives::CommStats;
use crate::oracle::{generate, GenMode, GenSpec, OracleError};
use crate::runner::{run_transposes, Backend, RunError};

pub const CSV_HEADER: [&str; 10] = [
    "mode",
    "backend",
    "ranks",
    "rows_per_rank",
    "total_rows",
    "value_size",
    "repetitions",
    "wall_time_s",
    "bytes_sent",
    "bytes_recv",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    /// Fixed rows per rank.
    Weak,
    /// Fixed total rows.
    Strong,
}

impl fmt::Display for ScalingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingMode::Weak => "weak",
            ScalingMode::Strong => "strong",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub mode: ScalingMode,
    pub backend: Backend,
    pub ranks: Vec<usize>,
    /// Used in weak mode.
    pub rows_per_rank: u64,
    /// Used in strong mode.
    pub total_rows: u64,
    /// Row shape of the generated matrix.
    pub shape: GenMode,
    pub value_size: u64,
    pub repetitions: usize,
    pub seed: u64,
    pub timeout: Duration,
}

impl BenchConfig {
    pub fn total_rows_for(&self, ranks: usize) -> u64 {
        match self.mode {
            ScalingMode::Weak => self.rows_per_rank * ranks as u64,
            ScalingMode::Strong => self.total_rows,
        }
    }
}

/// One sweep configuration's measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub mode: ScalingMode,
    pub backend: Backend,
    pub ranks: usize,
    pub rows_per_rank: u64,
    pub total_rows: u64,
    pub cols_spec: String,
    pub values_spec: String,
    pub value_size: u64,
    pub repetitions: usize,
    pub wall_time_seconds: f64,
    pub bytes_sent_total: u64,
    pub bytes_received_total: u64,
    /// Summed over ranks, as measured by the instrumented communicator.
    pub stats: CommStats,
}

impl BenchRecord {
    fn csv_row(&self) -> [String; 10] {
        [
            self.mode.to_string(),
            self.backend.to_string(),
            self.ranks.to_string(),
            self.rows_per_rank.to_string(),
            self.total_rows.to_string(),
            self.value_size.to_string(),
            self.repetitions.to_string(),
            format!("{:.9}", self.wall_time_seconds),
            self.bytes_sent_total.to_string(),
            self.bytes_received_total.to_string(),
        ]
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] OracleError),
    #[error("R={ranks}: {source}")]
    Backend { ranks: usize, source: RunError },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn describe(shape: &GenMode) -> (String, String) {
    match shape {
        GenMode::Balanced { cols, values } => (cols.to_string(), values.to_string()),
        GenMode::Heterogeneous { cols_min, cols_max, value_count_mean } => {
            (format!("U[{cols_min},{cols_max}]"), format!("1+Poisson({})", value_count_mean - 1.0))
        }
    }
}

/// Runs one configuration per entry of `cfg.ranks`, appending a CSV row to
/// `out` after each. On a backend failure the rows written so far are
/// already flushed.
pub fn run_sweep<W: Write>(cfg: &BenchConfig, out: W) -> Result<Vec<BenchRecord>, BenchError> {
    if cfg.ranks.is_empty() || cfg.ranks.contains(&0) {
        return Err(BenchError::Config("rank list must be nonempty with values >= 1".into()));
    }
    if cfg.repetitions == 0 {
        return Err(BenchError::Config("repetitions must be at least 1".into()));
    }
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(CSV_HEADER)?;
    csv.flush().map_err(csv::Error::from)?;

    let (cols_spec, values_spec) = describe(&cfg.shape);
    let mut records = Vec::with_capacity(cfg.ranks.len());
    for &ranks in &cfg.ranks {
        let total_rows = cfg.total_rows_for(ranks);
        let spec = GenSpec {
            mode: cfg.shape.clone(),
            global_dim: total_rows,
            ranks,
            value_size: cfg.value_size,
            seed: cfg.seed,
        };
        let data = generate(&spec)?;
        let run = run_transposes(cfg.backend, &data.shards, cfg.repetitions, cfg.timeout)
            .map_err(|source| BenchError::Backend { ranks, source })?;
        let stats = run.total_stats();
        let record = BenchRecord {
            mode: cfg.mode,
            backend: cfg.backend,
            ranks,
            rows_per_rank: total_rows / ranks as u64,
            total_rows,
            cols_spec: cols_spec.clone(),
            values_spec: values_spec.clone(),
            value_size: cfg.value_size,
            repetitions: cfg.repetitions,
            // Clamp so an empty run still reports a positive duration.
            wall_time_seconds: run.wall_time.as_secs_f64().max(1e-9),
            bytes_sent_total: stats.bytes_sent(),
            bytes_received_total: stats.bytes_received(),
            stats,
        };
        csv.write_record(record.csv_row())?;
        csv.flush().map_err(csv::Error::from)?;
        records.push(record);
    }
    Ok(records)
}

//! Runs chained transposes over a whole dataset on either backend.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collectives::{sim_spawn, tcp_spawn_local, CommStats, Communicator, Instrumented, SpawnError};
use crate::engine::{EngineError, Transposer};
use crate::xcsr::XcsrShard;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Sim,
    Tcp,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Sim => "sim",
            Backend::Tcp => "tcp",
        })
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("no shards to run")]
    Empty,
    #[error(transparent)]
    Ranks(#[from] SpawnError),
}

/// What one rank reports after its chain of transposes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    /// Collective traffic of the whole program, layout gathering included.
    pub stats: CommStats,
    /// Time spent in the transposes, layout gathering excluded.
    pub transpose_seconds: f64,
}

/// Gathers the layout once, then applies `repeat` transposes to `shard`.
pub fn rank_program<C: Communicator>(
    comm: C,
    shard: &XcsrShard,
    repeat: usize,
) -> Result<(XcsrShard, RankReport), EngineError> {
    let rank = comm.rank();
    let mut t = Transposer::new(Instrumented::new(comm), shard)?;
    let started = Instant::now();
    let out = t.transpose_n(shard, repeat)?;
    let elapsed = started.elapsed().as_secs_f64();
    Ok((out, RankReport { rank, stats: t.comm().stats(), transpose_seconds: elapsed }))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub shards: Vec<XcsrShard>,
    pub reports: Vec<RankReport>,
    /// Slowest rank's transpose time.
    pub wall_time: Duration,
}

impl RunOutcome {
    pub fn total_stats(&self) -> CommStats {
        self.reports.iter().map(|r| r.stats).sum()
    }
}

/// Runs `repeat` chained transposes of a dataset with one rank worker per
/// shard, in this process. The TCP backend connects the workers over
/// loopback sockets.
pub fn run_transposes(
    backend: Backend,
    shards: &[XcsrShard],
    repeat: usize,
    timeout: Duration,
) -> Result<RunOutcome, RunError> {
    if shards.is_empty() {
        return Err(RunError::Empty);
    }
    let results = match backend {
        Backend::Sim => sim_spawn(shards.len(), |c| {
            let shard = &shards[c.rank()];
            rank_program(c, shard, repeat)
        })?,
        Backend::Tcp => tcp_spawn_local(shards.len(), timeout, |c| {
            let shard = &shards[c.rank()];
            rank_program(c, shard, repeat)
        })?,
    };
    let (shards, reports): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let slowest = reports.iter().map(|r| r.transpose_seconds).fold(0.0, f64::max);
    Ok(RunOutcome { shards, reports, wall_time: Duration::from_secs_f64(slowest) })
}

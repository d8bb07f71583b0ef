//! Single-threaded reference: brute-force transpose, seeded dataset
//! generation and gathered comparison of distributed results.

mod compare;
mod generate;
mod rng;

pub(crate) use compare::{check_partition, covers};
pub use compare::{gather_and_compare, CellMismatch, MatchReport, MismatchKind};
pub use generate::{generate, partition_rows, Dataset, GenMode, GenSpec};
pub use rng::DatasetRng;

use thiserror::Error;

use crate::xcsr::{DenseTriplets, ShardError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("partition: {0}")]
    Partition(String),
    #[error(transparent)]
    Shard(#[from] ShardError),
}

/// `(r, c, payloads)` becomes `(c, r, payloads)` for every entry.
pub fn oracle_transpose(t: &DenseTriplets) -> DenseTriplets {
    t.transposed()
}

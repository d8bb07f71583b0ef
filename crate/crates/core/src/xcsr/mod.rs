//! The XCSR shard data model and its communication-free operations.

mod reorder;
mod shard;
mod transpose;
mod triplets;

pub use reorder::reorder_received;
pub use shard::{CellArrays, CellMeta, CellRef, Cells, View, Violation, XcsrShard};
pub use transpose::local_transpose;
pub use triplets::{DenseTriplets, Triplet};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShardError {
    #[error("invalid shard: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("structural mismatch: {0}")]
    Structure(String),
    #[error("out of range: {0}")]
    Range(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

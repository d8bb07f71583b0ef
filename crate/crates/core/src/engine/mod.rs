//! Distributed transpose: rank layout, send planning, view swap.

mod layout;
mod plan;
mod swap;

pub use layout::{compute_rank_layout, even_split, RankLayout};
pub use plan::{build_send_plan, Destination, SendPlan};
pub use swap::{distributed_transpose, view_swap, Transposer};

use thiserror::Error;

use crate::collectives::CollectiveError;
use crate::xcsr::ShardError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Collective(#[from] CollectiveError),
    #[error(transparent)]
    Shard(#[from] ShardError),
    #[error("layout: {0}")]
    Layout(String),
}

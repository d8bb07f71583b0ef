use super::{EngineError, RankLayout};
use crate::xcsr::{View, XcsrShard};

/// Outgoing traffic for one destination rank.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Destination {
    pub cell_count: u64,
    /// Packed 24-byte cell metadata records.
    pub meta: Vec<u8>,
    pub value_bytes: u64,
    pub values: Vec<u8>,
}

/// Per-destination buffers for one view swap, indexed by rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SendPlan {
    pub destinations: Vec<Destination>,
}

impl SendPlan {
    /// This rank's row of the dense cell-count matrix.
    pub fn cell_counts(&self) -> Vec<u64> {
        self.destinations.iter().map(|d| d.cell_count).collect()
    }

    pub fn value_byte_counts(&self) -> Vec<u64> {
        self.destinations.iter().map(|d| d.value_bytes).collect()
    }

    pub fn total_cells(&self) -> u64 {
        self.destinations.iter().map(|d| d.cell_count).sum()
    }

    /// Splits into the metadata and value send vectors.
    pub fn into_buffers(self) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
        self.destinations.into_iter().map(|d| (d.meta, d.values)).unzip()
    }
}

/// Assigns every cell to the rank that owns it after the view swap.
///
/// The routing coordinate is the one partitioned in the target view: the
/// row for a `ColumnView` shard (the usual, locally transposed input), the
/// column for a `RowView` shard. Cells keep storage order, so each
/// destination buffer is sorted by `(row, col)`. Self-addressed cells are
/// kept in the plan.
pub fn build_send_plan(shard: &XcsrShard, layout: &RankLayout) -> Result<SendPlan, EngineError> {
    if layout.global_dim() != shard.global_dim {
        return Err(EngineError::Layout(format!(
            "layout covers {} rows, shard global_dim is {}",
            layout.global_dim(),
            shard.global_dim
        )));
    }
    let mut destinations = vec![Destination::default(); layout.ranks()];
    for cell in shard.cells() {
        let key = match shard.view {
            View::ColumnView => cell.row,
            View::RowView => cell.col,
        };
        let d = &mut destinations[layout.owner_of(key)?];
        d.cell_count += 1;
        cell.meta().encode_into(&mut d.meta);
        d.value_bytes += cell.payload.len() as u64;
        d.values.extend_from_slice(cell.payload);
    }
    Ok(SendPlan { destinations })
}

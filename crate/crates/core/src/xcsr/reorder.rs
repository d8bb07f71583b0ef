use super::{CellArrays, CellMeta, ShardError};

/// Assembles cells received from several ranks into canonical line-grouped
/// arrays.
///
/// `metas` is the cell set announced in the metadata phase, `arrival_order`
/// lists the cells in the order their payloads arrived and `value_chunks[i]`
/// holds the payload of `arrival_order[i]`. Both cell lists must describe the
/// same multiset; the output is ordered by `(row, col)`.
pub fn reorder_received<B: AsRef<[u8]>>(
    metas: &[CellMeta],
    value_chunks: &[B],
    arrival_order: &[CellMeta],
    value_size: u64,
) -> Result<CellArrays, ShardError> {
    if value_chunks.len() != arrival_order.len() {
        return Err(ShardError::Structure(format!(
            "{} value chunks for {} arriving cells",
            value_chunks.len(),
            arrival_order.len()
        )));
    }
    if metas.len() != arrival_order.len() {
        return Err(ShardError::Structure(format!(
            "metadata announces {} cells, {} arrived",
            metas.len(),
            arrival_order.len()
        )));
    }
    for (i, (cell, chunk)) in arrival_order.iter().zip(value_chunks).enumerate() {
        let expected = cell.value_count as u128 * value_size as u128;
        if chunk.as_ref().len() as u128 != expected {
            return Err(ShardError::Structure(format!(
                "chunk {i} for cell ({}, {}) is {} bytes, expected {expected}",
                cell.row,
                cell.col,
                chunk.as_ref().len()
            )));
        }
    }

    let mut announced = metas.to_vec();
    announced.sort_unstable();
    let mut order: Vec<usize> = (0..arrival_order.len()).collect();
    order.sort_by_key(|&i| arrival_order[i]);
    for (k, (&a, &i)) in announced.iter().zip(&order).enumerate() {
        let b = arrival_order[i];
        if a != b {
            return Err(ShardError::Structure(format!("sorted cell {k}: metadata has {a:?}, arrivals have {b:?}")));
        }
    }
    if let Some(w) = announced.windows(2).find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col)) {
        return Err(ShardError::Structure(format!("duplicate cell ({}, {})", w[0].row, w[0].col)));
    }

    let mut arrays = CellArrays::default();
    for i in order {
        let c = arrival_order[i];
        arrays.push(c.row, c.col, c.value_count, value_chunks[i].as_ref());
    }
    Ok(arrays)
}

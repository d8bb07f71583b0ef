use super::{CellArrays, ShardError, XcsrShard};

/// Transposes the locally held submatrix without any communication.
///
/// Every cell `(row, col)` becomes `(col, row)` with its payload bytes
/// untouched, the cells are regrouped by their new row and the view flips.
/// The owned interval is unchanged: the axis that was partitioned keeps its
/// ids, they just move from the line position to the cell position (or back).
pub fn local_transpose(shard: &XcsrShard) -> Result<XcsrShard, ShardError> {
    shard.ensure_valid()?;

    let mut order: Vec<(u64, u64, usize, usize, u64)> = Vec::with_capacity(shard.cell_count());
    let mut offset = 0usize;
    for cell in shard.cells() {
        order.push((cell.col, cell.row, offset, cell.payload.len(), cell.value_count));
        offset += cell.payload.len();
    }
    // Keys are unique (no duplicate cells), so an unstable sort is canonical.
    order.sort_unstable_by_key(|&(row, col, ..)| (row, col));

    let mut arrays = CellArrays::default();
    arrays.values.reserve(shard.values.len());
    for (row, col, start, len, value_count) in order {
        arrays.push(row, col, value_count, &shard.values[start..start + len]);
    }
    Ok(arrays.into_shard(
        shard.view.flipped(),
        shard.global_dim,
        shard.major_start,
        shard.major_count,
        shard.value_size,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xcsr::{DenseTriplets, View};

    fn shard(cells: &[(u64, u64, &[u8])], dim: u64, start: u64, count: u64, value_size: u64) -> XcsrShard {
        let mut arrays = CellArrays::default();
        for &(r, c, p) in cells {
            arrays.push(r, c, p.len() as u64 / value_size, p);
        }
        arrays.into_shard(View::RowView, dim, start, count, value_size)
    }

    #[test]
    fn empty_flips_view_only() {
        let s = XcsrShard::empty(View::RowView, 8, 2, 3, 4);
        let t = local_transpose(&s).unwrap();
        assert_eq!(t, XcsrShard { view: View::ColumnView, ..s });
    }

    #[test]
    fn single_cell_keeps_payload() {
        let s = shard(&[(0, 5, b"abcd")], 6, 0, 1, 2);
        let t = local_transpose(&s).unwrap();
        assert_eq!(t.view, View::ColumnView);
        assert_eq!(t.line_ids, vec![5]);
        assert_eq!(t.cell_ids, vec![0]);
        assert_eq!(t.cell_value_counts, vec![2]);
        assert_eq!(t.values, b"abcd");
        assert!(t.validate().is_empty());
    }

    #[test]
    fn two_row_example_matches_triplet_oracle() {
        // {(0,1,[x]), (1,0,[y]), (1,1,[z,w])}
        let s = shard(&[(0, 1, b"x"), (1, 0, b"y"), (1, 1, b"zw")], 2, 0, 2, 1);
        let t = local_transpose(&s).unwrap();

        // Oracle: expand, swap, re-encode.
        let mut expected = DenseTriplets::from_shards(std::slice::from_ref(&s)).transposed();
        expected.sort();
        let oracle = expected.to_shard(View::ColumnView, 0, 2).unwrap();
        assert_eq!(t, oracle);

        // Frozen: lines are the old columns, cells are (1,0), (0,1), (1,1) in
        // (old row, old col) terms.
        assert_eq!(t.line_ids, vec![0, 1]);
        assert_eq!(t.line_cell_counts, vec![1, 2]);
        assert_eq!(t.cell_ids, vec![1, 0, 1]);
        assert_eq!(t.cell_value_counts, vec![1, 1, 2]);
        assert_eq!(t.values, b"yxzw");
    }

    #[test]
    fn double_application_is_identity() {
        let s = shard(&[(3, 0, b"aa"), (3, 7, b"bbcc"), (4, 2, b"dd"), (4, 3, b"ee")], 8, 3, 2, 2);
        let t = local_transpose(&local_transpose(&s).unwrap()).unwrap();
        assert_eq!(t, s);
    }

    #[test]
    fn invalid_input_is_rejected() {
        let mut s = shard(&[(0, 1, b"x")], 2, 0, 1, 1);
        s.cell_value_counts[0] = 0;
        assert!(matches!(local_transpose(&s), Err(ShardError::Invalid(_))));
    }
}

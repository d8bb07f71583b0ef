//! Transpose a single-rank block in memory and show the arrays before and after.

use xcsr::xcsr::{local_transpose, DenseTriplets, Triplet, View, XcsrShard};

fn dump(label: &str, s: &XcsrShard) {
    println!("{label} ({:?})", s.view);
    println!("  line_ids          {:?}", s.line_ids);
    println!("  line_cell_counts  {:?}", s.line_cell_counts);
    println!("  cell_ids          {:?}", s.cell_ids);
    println!("  cell_value_counts {:?}", s.cell_value_counts);
    println!("  values            {:?}", String::from_utf8_lossy(&s.values));
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 3x3 multigraph, one byte per edge label.
    let mut t = DenseTriplets::new(3, 1);
    for (row, col, labels) in [(0, 2, "ab"), (1, 0, "c"), (1, 1, "d"), (2, 0, "efg")] {
        t.entries.push(Triplet { row, col, value_count: labels.len() as u64, payload: labels.as_bytes().to_vec() });
    }
    let shard = t.to_shard(View::RowView, 0, 3)?;
    dump("original", &shard);

    let lt = local_transpose(&shard)?;
    dump("transposed", &lt);

    assert_eq!(local_transpose(&lt)?, shard);
    println!("transposing twice restores the original arrays");
    Ok(())
}

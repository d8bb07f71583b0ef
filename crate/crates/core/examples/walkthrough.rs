//! Step-by-step distributed transpose of a small multigraph on 3 simulated
//! ranks: local transpose, send plan, then the exchanged result.

use xcsr::collectives::{sim_spawn, Communicator};
use xcsr::engine::{build_send_plan, even_split, Transposer};
use xcsr::oracle::partition_rows;
use xcsr::xcsr::{local_transpose, DenseTriplets, Triplet, XcsrShard};

/// Six vertices, 17 edges labelled A..Q.
fn multigraph() -> DenseTriplets {
    let cells: [(u64, u64, &str); 12] = [
        (0, 1, "AB"),
        (0, 3, "C"),
        (1, 0, "D"),
        (1, 2, "EFG"),
        (2, 1, "H"),
        (2, 5, "IJ"),
        (3, 3, "K"),
        (3, 4, "LM"),
        (4, 0, "N"),
        (4, 2, "O"),
        (5, 1, "P"),
        (5, 4, "Q"),
    ];
    let mut t = DenseTriplets::new(6, 1);
    for (row, col, e) in cells {
        t.entries.push(Triplet { row, col, value_count: e.len() as u64, payload: e.as_bytes().to_vec() });
    }
    t
}

fn describe(s: &XcsrShard) -> String {
    s.cells()
        .map(|c| format!("({},{}):{}", c.row, c.col, String::from_utf8_lossy(c.payload)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shards = partition_rows(&multigraph(), 3)?;
    let layout = even_split(6, 3);

    println!("cells sent (row = source rank, column = destination)");
    for (r, shard) in shards.iter().enumerate() {
        let plan = build_send_plan(&local_transpose(shard)?, &layout)?;
        println!("  rank {r}: cells {:?} value bytes {:?}", plan.cell_counts(), plan.value_byte_counts());
    }

    let out = sim_spawn(3, |comm| {
        let shard = &shards[comm.rank()];
        Transposer::new(comm, shard)?.transpose(shard)
    })?;

    for (r, (before, after)) in shards.iter().zip(&out).enumerate() {
        println!("rank {r}");
        println!("  before {}", describe(before));
        println!("  after  {}", describe(after));
    }
    Ok(())
}

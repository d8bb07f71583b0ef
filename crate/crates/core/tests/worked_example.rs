//! The 6-vertex, 17-edge multigraph on 3 ranks, checked against counts and
//! layouts derived by hand.

use xcsr::collectives::{sim_spawn, Communicator};
use xcsr::engine::{build_send_plan, even_split, Transposer};
use xcsr::oracle::partition_rows;
use xcsr::xcsr::{local_transpose, DenseTriplets, Triplet, View, XcsrShard};

fn cells(list: &[(u64, u64, &str)]) -> Vec<Triplet> {
    list.iter()
        .map(|&(row, col, e)| Triplet { row, col, value_count: e.len() as u64, payload: e.as_bytes().to_vec() })
        .collect()
}

fn graph() -> DenseTriplets {
    DenseTriplets {
        global_dim: 6,
        value_size: 1,
        entries: cells(&[
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
        ]),
    }
}

fn shards() -> Vec<XcsrShard> {
    partition_rows(&graph(), 3).unwrap()
}

#[test]
fn rank0_arrays() {
    let s = &shards()[0];
    assert_eq!(s.view, View::RowView);
    assert_eq!((s.major_start, s.major_count), (0, 2));
    assert_eq!(s.line_ids, [0, 1]);
    assert_eq!(s.line_cell_counts, [2, 2]);
    assert_eq!(s.cell_ids, [1, 3, 0, 2]);
    assert_eq!(s.cell_value_counts, [2, 1, 1, 3]);
    assert_eq!(s.values, b"ABCDEFG");
}

#[test]
fn rank0_local_transpose() {
    let lt = local_transpose(&shards()[0]).unwrap();
    assert_eq!(lt.view, View::ColumnView);
    assert_eq!((lt.major_start, lt.major_count), (0, 2));
    // (0,1):AB (0,3):C (1,0):D (1,2):EFG swapped and re-sorted.
    assert_eq!(lt.line_ids, [0, 1, 2, 3]);
    assert_eq!(lt.line_cell_counts, [1, 1, 1, 1]);
    assert_eq!(lt.cell_ids, [1, 0, 1, 0]);
    assert_eq!(lt.cell_value_counts, [1, 2, 3, 1]);
    assert_eq!(lt.values, b"DABEFGC");
}

#[test]
fn send_counts() {
    let layout = even_split(6, 3);
    let mut cells = Vec::new();
    let mut bytes = Vec::new();
    for s in shards() {
        let plan = build_send_plan(&local_transpose(&s).unwrap(), &layout).unwrap();
        cells.push(plan.cell_counts());
        bytes.push(plan.value_byte_counts());
    }
    assert_eq!(cells, [[2, 2, 0], [1, 1, 2], [2, 1, 1]]);
    assert_eq!(bytes, [[3, 4, 0], [1, 1, 4], [2, 1, 1]]);
    // Every cell and edge goes somewhere.
    assert_eq!(cells.iter().flatten().sum::<u64>(), 12);
    assert_eq!(bytes.iter().flatten().sum::<u64>(), 17);
}

#[test]
fn received_layouts() {
    let input = shards();
    let out = sim_spawn(3, |c| {
        let s = &input[c.rank()];
        Transposer::new(c, s)?.transpose(s)
    })
    .unwrap();
    let expect = [
        cells(&[(0, 1, "D"), (0, 4, "N"), (1, 0, "AB"), (1, 2, "H"), (1, 5, "P")]),
        cells(&[(2, 1, "EFG"), (2, 4, "O"), (3, 0, "C"), (3, 3, "K")]),
        cells(&[(4, 3, "LM"), (4, 5, "Q"), (5, 2, "IJ")]),
    ];
    for (r, (got, want)) in out.iter().zip(expect).enumerate() {
        assert_eq!(got.view, View::RowView, "rank {r}");
        assert_eq!((got.major_start, got.major_count), (2 * r as u64, 2));
        assert_eq!(DenseTriplets::from_shard(got).entries, want, "rank {r}");
        assert!(got.validate().is_empty());
    }
    assert_eq!(out[0].line_ids, [0, 1]);
    assert_eq!(out[0].line_cell_counts, [2, 3]);
    assert_eq!(out[0].cell_ids, [1, 4, 0, 2, 5]);
    assert_eq!(out[0].values, b"DNABHP");
}

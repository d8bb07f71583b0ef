mod common;

use proptest::prelude::*;
use xcsr::collectives::{sim_spawn, Communicator};
use xcsr::engine::Transposer;
use xcsr::io::{read_shard, write_shard};
use xcsr::oracle::{gather_and_compare, oracle_transpose, DatasetRng};
use xcsr::xcsr::{local_transpose, reorder_received, CellMeta, DenseTriplets, View};

use common::{corpus_instance, expected_transpose, random_cuts, random_triplets, split_rows, transpose_sim};

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_transpose_is_an_involution(seed in seeds(), view_col in any::<bool>()) {
        let mut rng = DatasetRng::new(seed);
        let dim = rng.between(1, 40);
        let t = random_triplets(&mut rng, dim, 8, 4, 3);
        let s = if view_col {
            t.to_shard(View::ColumnView, 0, dim).unwrap()
        } else {
            t.to_shard(View::RowView, 0, dim).unwrap()
        };
        let lt = local_transpose(&s).unwrap();
        prop_assert_eq!(lt.view, s.view.flipped());
        prop_assert_eq!(lt.cell_count(), s.cell_count());
        prop_assert_eq!(&lt.values.len(), &s.values.len());
        prop_assert!(lt.validate().is_empty());
        prop_assert_eq!(local_transpose(&lt).unwrap(), s);
    }

    #[test]
    fn double_transpose_is_identity(seed in seeds()) {
        let inst = corpus_instance(&mut DatasetRng::new(seed));
        prop_assert_eq!(transpose_sim(&inst.shards, 2), inst.shards);
    }

    #[test]
    fn transpose_matches_reference(seed in seeds()) {
        let inst = corpus_instance(&mut DatasetRng::new(seed));
        let out = transpose_sim(&inst.shards, 1);
        let report = gather_and_compare(&out, &oracle_transpose(&inst.triplets)).unwrap();
        prop_assert!(report.matched, "{}", report);
        prop_assert_eq!(&out, &expected_transpose(&inst.triplets, &inst.shards));
        for s in &out {
            prop_assert!(s.validate().is_empty());
        }
    }

    #[test]
    fn local_transpose_commutes_with_view_swap(seed in seeds()) {
        let inst = corpus_instance(&mut DatasetRng::new(seed));
        let shards = &inst.shards;
        let both = sim_spawn(shards.len(), |c| {
            let s = &shards[c.rank()];
            let mut t = Transposer::new(c, s)?;
            let a = t.view_swap(&local_transpose(s)?)?;
            let b = local_transpose(&t.view_swap(s)?)?;
            Ok::<_, xcsr::engine::EngineError>((a, b))
        })
        .unwrap();
        for (a, b) in both {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn reorder_ignores_arrival_order(seed in seeds()) {
        let mut rng = DatasetRng::new(seed);
        let dim = rng.between(1, 32);
        let vs = rng.between(1, 5);
        let t = random_triplets(&mut rng, dim, 10, 5, vs);
        let s = t.to_shard(View::RowView, 0, dim).unwrap();
        let mut arrivals: Vec<(CellMeta, Vec<u8>)> = s.cells().map(|c| (c.meta(), c.payload.to_vec())).collect();
        // Fisher-Yates with the test rng.
        for i in (1..arrivals.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            arrivals.swap(i, j);
        }
        let order: Vec<CellMeta> = arrivals.iter().map(|a| a.0).collect();
        let chunks: Vec<&[u8]> = arrivals.iter().map(|a| a.1.as_slice()).collect();
        let mut announced = order.clone();
        announced.reverse();
        let arrays = reorder_received(&announced, &chunks, &order, vs).unwrap();
        prop_assert_eq!(arrays.into_shard(View::RowView, dim, 0, dim, vs), s);
    }

    #[test]
    fn file_roundtrip(seed in seeds()) {
        let inst = corpus_instance(&mut DatasetRng::new(seed));
        for s in &inst.shards {
            let mut buf = Vec::new();
            let n = write_shard(s, &mut buf).unwrap();
            prop_assert_eq!(n as usize, buf.len());
            prop_assert_eq!(&read_shard(buf.as_slice()).unwrap(), s);
        }
    }

    #[test]
    fn cell_meta_roundtrip(cells in prop::collection::vec((any::<u64>(), any::<u64>(), any::<u64>()), 0..20)) {
        let metas: Vec<CellMeta> = cells.iter().map(|&(row, col, value_count)| CellMeta { row, col, value_count }).collect();
        let mut buf = Vec::new();
        for m in &metas {
            m.encode_into(&mut buf);
        }
        prop_assert_eq!(buf.len(), metas.len() * CellMeta::WIRE_SIZE);
        prop_assert_eq!(CellMeta::decode_all(&buf).unwrap(), metas);
        if !buf.is_empty() {
            prop_assert!(CellMeta::decode_all(&buf[1..]).is_none());
        }
    }

    #[test]
    fn transpose_conserves_cells_and_values(seed in seeds()) {
        let inst = corpus_instance(&mut DatasetRng::new(seed));
        let out = transpose_sim(&inst.shards, 1);
        let before = DenseTriplets::from_shards(&inst.shards);
        let after = DenseTriplets::from_shards(&out);
        prop_assert_eq!(before.entries.len(), after.entries.len());
        prop_assert_eq!(before.total_values(), after.total_values());
        let bytes = |v: &[xcsr::XcsrShard]| v.iter().map(|s| s.values.len()).sum::<usize>();
        prop_assert_eq!(bytes(&inst.shards), bytes(&out));
    }

    #[test]
    fn partition_does_not_change_result(seed in seeds()) {
        // Same matrix, two different row partitions: the gathered transpose is identical.
        let mut rng = DatasetRng::new(seed);
        let dim = rng.between(1, 48);
        let t = random_triplets(&mut rng, dim, 12, 3, 2);
        let a = split_rows(&t, &random_cuts(&mut rng, dim, 3));
        let b = split_rows(&t, &random_cuts(&mut rng, dim, 5));
        let mut ta = DenseTriplets::from_shards(&transpose_sim(&a, 1));
        let mut tb = DenseTriplets::from_shards(&transpose_sim(&b, 1));
        ta.sort();
        tb.sort();
        prop_assert_eq!(ta, tb);
    }
}

#[test]
fn corrupted_shards_fail_validation() {
    let t = random_triplets(&mut DatasetRng::new(5), 20, 6, 3, 2);
    let base = t.to_shard(View::RowView, 0, 20).unwrap();
    assert!(base.validate().is_empty());

    let mut s = base.clone();
    s.cell_ids.swap(0, 1);
    s.line_cell_counts[0] = s.line_cell_counts[0].max(2);
    assert!(!s.validate().is_empty());

    let mut s = base.clone();
    s.values.pop();
    assert!(!s.validate().is_empty());

    let mut s = base.clone();
    s.cell_value_counts[0] = 0;
    assert!(!s.validate().is_empty());

    let mut s = base;
    s.line_ids[0] = 99;
    assert!(!s.validate().is_empty());
}

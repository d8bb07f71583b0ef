//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use xcsr::collectives::wire::{Handshake, VERSION};
use xcsr::collectives::{sim_spawn, CommStats, Communicator, ErrorKind, Instrumented};
use xcsr::engine::{EngineError, Transposer};
use xcsr::io::{read_shard, write_shard};
use xcsr::oracle::{gather_and_compare, generate, oracle_transpose, DatasetRng, GenMode, GenSpec};
use xcsr::runner::{run_transposes, Backend};
use xcsr::xcsr::{local_transpose, CellMeta, DenseTriplets};
use xcsr::XcsrShard;

use common::{corpus_instance, host_with_handshake, transpose_sim};

const CORPUS_SEED: u64 = 0x5eed_0001;
const TIMEOUT: Duration = Duration::from_secs(30);

fn corpus(n: usize, seed: u64) -> impl Iterator<Item = common::Instance> {
    let mut rng = DatasetRng::new(seed);
    (0..n).map(move |_| corpus_instance(&mut rng))
}

fn involution() -> String {
    let mut n = 0;
    for (i, inst) in corpus(1000, CORPUS_SEED).enumerate() {
        assert_eq!(transpose_sim(&inst.shards, 2), inst.shards, "instance {i}");
        n += 1;
    }
    format!("{n} instances byte-identical after two transposes")
}

fn oracle_equivalence() -> String {
    let mut cells = 0;
    for (i, inst) in corpus(1000, CORPUS_SEED).enumerate() {
        let out = transpose_sim(&inst.shards, 1);
        let report = gather_and_compare(&out, &oracle_transpose(&inst.triplets)).unwrap();
        assert!(report.matched, "instance {i}: {report}");
        // Exact set equality, checked independently of the comparison helper.
        let mut got = DenseTriplets::from_shards(&out);
        got.sort();
        let mut want = inst.triplets.transposed();
        want.sort();
        assert_eq!(got.entries, want.entries, "instance {i}");
        cells += want.entries.len();
    }
    format!("1000 instances, {cells} cells matched the reference")
}

fn commutation() -> String {
    for (i, inst) in corpus(200, CORPUS_SEED ^ 0xc0).enumerate() {
        let shards = &inst.shards;
        let pairs = sim_spawn(shards.len(), |c| {
            let s = &shards[c.rank()];
            let mut t = Transposer::new(c, s)?;
            let a = t.view_swap(&local_transpose(s)?)?;
            let b = local_transpose(&t.view_swap(s)?)?;
            Ok::<_, EngineError>((a, b))
        })
        .unwrap();
        for (r, (a, b)) in pairs.into_iter().enumerate() {
            assert_eq!(a, b, "instance {i} rank {r}");
        }
    }
    "200 instances byte-identical in both orders".into()
}

fn call_counts() -> String {
    let data = generate(&GenSpec::heterogeneous(40, 4, 1, 10, 3.0, 4, 3)).unwrap();
    for k in [1usize, 2, 5] {
        let stats = sim_spawn(4, |c| {
            let s = &data.shards[c.rank()];
            let mut t = Transposer::new(Instrumented::new(c), s)?;
            let after_layout = t.comm().stats();
            t.transpose_n(s, k)?;
            Ok::<_, EngineError>((after_layout, t.comm().stats()))
        })
        .unwrap();
        for (layout, total) in stats {
            assert_eq!((layout.allgather.calls, layout.alltoall.calls, layout.alltoallv.calls), (1, 0, 0));
            assert_eq!(total.allgather.calls, 1);
            assert_eq!(total.alltoall.calls, 2 * k as u64);
            assert_eq!(total.alltoallv.calls, 2 * k as u64);
        }
    }
    "1 allgather per layout, 2 alltoall + 2 alltoallv per transpose (k = 1, 2, 5)".into()
}

fn twelve_chain() -> String {
    let spec = GenSpec::heterogeneous(512, 8, 64, 256, 5.0, 128, 12);
    let data = generate(&spec).unwrap();
    let out = transpose_sim(&data.shards, 12);
    assert_eq!(out, data.shards);
    format!(
        "{} cells, {} values of 128 B restored after 12 transposes",
        data.triplets.entries.len(),
        data.triplets.total_values()
    )
}

fn backend_equivalence() -> String {
    for ranks in [1, 2, 4] {
        let data = generate(&GenSpec::heterogeneous(96, ranks, 8, 32, 5.0, 128, 40 + ranks as u64)).unwrap();
        let sim = run_transposes(Backend::Sim, &data.shards, 2, TIMEOUT).unwrap();
        let tcp = run_transposes(Backend::Tcp, &data.shards, 2, TIMEOUT).unwrap();
        assert_eq!(sim.shards, tcp.shards, "R={ranks}");
        assert_eq!(sim.total_stats(), tcp.total_stats(), "R={ranks}");
        let one = run_transposes(Backend::Tcp, &data.shards, 1, TIMEOUT).unwrap();
        assert_eq!(one.shards, transpose_sim(&data.shards, 1), "R={ranks}");
    }
    for _ in 0..3 {
        let mut bad_magic = Handshake { rank: 1, size: 2 }.encode();
        bad_magic[..4].copy_from_slice(b"XCOM");
        assert_eq!(host_with_handshake(bad_magic).unwrap_err().kind, ErrorKind::ProtocolViolation);
        let mut bad_version = Handshake { rank: 1, size: 2 }.encode();
        bad_version[4] = VERSION.wrapping_add(1);
        assert_eq!(host_with_handshake(bad_version).unwrap_err().kind, ErrorKind::ProtocolViolation);
    }
    "sim and tcp identical for R = 1, 2, 4; bad magic and version rejected".into()
}

/// Payload of one view swap: 24 metadata bytes per cell plus the values.
fn analytic_payload(cells: u64, values: u64, value_size: u64) -> u64 {
    cells * CellMeta::WIRE_SIZE as u64 + values * value_size
}

/// Dense-exchange and layout traffic for one run: two R x R alltoalls of u64
/// per transpose and one allgather of a 24-byte record.
fn analytic_overhead(ranks: u64, transposes: u64) -> u64 {
    transposes * 2 * ranks * ranks * 8 + ranks * ranks * 24
}

fn sweep_payloads(shape: GenMode, rows: impl Fn(usize) -> u64, ranks: &[usize]) -> Vec<(usize, u64, u64)> {
    let value_size = 4;
    ranks
        .iter()
        .map(|&r| {
            let dim = rows(r);
            let data =
                generate(&GenSpec { mode: shape.clone(), global_dim: dim, ranks: r, value_size, seed: 8 }).unwrap();
            let run = run_transposes(Backend::Sim, &data.shards, 1, TIMEOUT).unwrap();
            let stats: CommStats = run.total_stats();
            let expected =
                analytic_payload(data.triplets.entries.len() as u64, data.triplets.total_values(), value_size);
            assert_eq!(stats.alltoallv.bytes_sent, expected, "R={r}");
            assert_eq!(stats.bytes_sent(), expected + analytic_overhead(r as u64, 1), "R={r}");
            (r, dim, stats.alltoallv.bytes_sent)
        })
        .collect()
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

fn scaling_accounting() -> String {
    let ranks = [1, 2, 4, 8];
    // Rows/rank 256 only admits 256 distinct columns at R = 1.
    let weak = sweep_payloads(GenMode::Balanced { cols: 256, values: 10 }, |r| 256 * r as u64, &ranks);
    let per_row = weak[0].2 as f64 / weak[0].1 as f64;
    for &(r, rows, bytes) in &weak {
        assert!(within(bytes as f64 / rows as f64, per_row, 0.01), "weak R={r}: {bytes} bytes for {rows} rows");
    }
    let strong = sweep_payloads(GenMode::Balanced { cols: 512, values: 10 }, |_| 1024, &ranks);
    for &(r, _, bytes) in &strong {
        assert!(within(bytes as f64, strong[0].2 as f64, 0.01), "strong R={r}: {bytes} vs {}", strong[0].2);
    }
    format!("weak {:.1} payload B/row for R = 1..8; strong {} payload B for R = 1..8", per_row, strong[0].2)
}

const GOLDEN_SPEC: (u64, usize, u64, u64, f64, u64, u64) = (32, 2, 2, 8, 3.0, 4, 20240601);
const GOLDEN_HASHES: [&str; 2] = [
    "42702f2a33750f95b38b75e7612f926aaefbd8bea51018f0c11b38da608eb4ae",
    "be4b1eae58b8ea2035710b4bb175fc7526c8ef8286aa1559006ff1122b32fc51",
];

fn encode(s: &XcsrShard) -> Vec<u8> {
    let mut buf = Vec::new();
    write_shard(s, &mut buf).unwrap();
    buf
}

fn format_stability() -> String {
    let (dim, ranks, lo, hi, mean, vs, seed) = GOLDEN_SPEC;
    for _ in 0..2 {
        let data = generate(&GenSpec::heterogeneous(dim, ranks, lo, hi, mean, vs, seed)).unwrap();
        for (s, want) in data.shards.iter().zip(GOLDEN_HASHES) {
            let got: String = Sha256::digest(encode(s)).iter().map(|b| format!("{b:02x}")).collect();
            assert_eq!(got, want);
        }
    }
    let mut n = 0;
    for inst in corpus(500, CORPUS_SEED ^ 0xf0) {
        for s in inst.shards.iter().take(1) {
            for shard in [s.clone(), local_transpose(s).unwrap()] {
                assert_eq!(read_shard(encode(&shard).as_slice()).unwrap(), shard);
                n += 1;
            }
        }
    }
    format!("golden hashes stable; {n} random shards survive write then read")
}

type Criterion = (&'static str, fn() -> String);

fn main() {
    let criteria: [Criterion; 8] = [
        ("involution", involution),
        ("oracle equivalence", oracle_equivalence),
        ("commutation", commutation),
        ("collective call count", call_counts),
        ("twelve-transpose chain", twelve_chain),
        ("backend equivalence", backend_equivalence),
        ("scaling accounting", scaling_accounting),
        ("format stability", format_stability),
    ];
    // Keep assertion messages in the report line instead of the default hook.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.2}s)", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {} {name}: FAIL ({msg}; {secs:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}

//! Distributed transpose on the in-process simulator, checked against the
//! brute-force reference, with per-collective traffic counts.

use xcsr::collectives::{sim_spawn, CommStats, Communicator, Instrumented};
use xcsr::engine::Transposer;
use xcsr::oracle::{gather_and_compare, generate, oracle_transpose, GenSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ranks = 4;
    let data = generate(&GenSpec::heterogeneous(256, ranks, 8, 64, 5.0, 16, 7))?;

    let results = sim_spawn(ranks, |comm| {
        let shard = &data.shards[comm.rank()];
        let mut t = Transposer::new(Instrumented::new(comm), shard)?;
        let out = t.transpose(shard)?;
        Ok::<_, xcsr::engine::EngineError>((out, t.comm().stats()))
    })?;
    let (shards, stats): (Vec<_>, Vec<CommStats>) = results.into_iter().unzip();

    let report = gather_and_compare(&shards, &oracle_transpose(&data.triplets))?;
    println!("{report}");
    assert!(report.matched);

    let total: CommStats = stats.into_iter().sum();
    println!(
        "calls: allgather {} alltoall {} alltoallv {}",
        total.allgather.calls, total.alltoall.calls, total.alltoallv.calls
    );
    println!("bytes exchanged: {}", total.bytes_sent());
    Ok(())
}

//! Runs the transpose over real loopback sockets, one thread per rank, and
//! checks it matches the simulator bit for bit.
//!
//! For separate processes use the CLI:
//! `xcsr transpose --input data.manifest.json --backend tcp`.

use std::time::Duration;

use xcsr::oracle::{generate, GenSpec};
use xcsr::runner::{run_transposes, Backend};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&GenSpec::balanced(128, 4, 16, 3, 32, 1))?;
    let timeout = Duration::from_secs(30);

    let tcp = run_transposes(Backend::Tcp, &data.shards, 2, timeout)?;
    let sim = run_transposes(Backend::Sim, &data.shards, 2, timeout)?;

    assert_eq!(tcp.shards, sim.shards);
    assert_eq!(tcp.shards, data.shards);
    assert_eq!(tcp.total_stats(), sim.total_stats());
    println!(
        "4 ranks over tcp: two transposes in {:?}, {} bytes, identical to the simulator",
        tcp.wall_time,
        tcp.total_stats().bytes_sent()
    );
    Ok(())
}

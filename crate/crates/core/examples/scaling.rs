//! Weak and strong scaling sweeps on the simulator, written as CSV to stdout.

use std::time::Duration;

use xcsr::bench::{run_sweep, BenchConfig, ScalingMode};
use xcsr::oracle::GenMode;
use xcsr::runner::Backend;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = BenchConfig {
        mode: ScalingMode::Weak,
        backend: Backend::Sim,
        ranks: vec![1, 2, 4, 8],
        rows_per_rank: 128,
        total_rows: 1024,
        shape: GenMode::Balanced { cols: 64, values: 10 },
        value_size: 4,
        repetitions: 3,
        seed: 0,
        timeout: Duration::from_secs(30),
    };
    let weak = run_sweep(&cfg, std::io::stdout().lock())?;

    cfg.mode = ScalingMode::Strong;
    let strong = run_sweep(&cfg, std::io::stdout().lock())?;

    let base = weak[0].stats.alltoallv.bytes_sent as f64;
    for r in &weak {
        eprintln!(
            "weak   R={} payload ratio {:.3}",
            r.ranks,
            r.stats.alltoallv.bytes_sent as f64 / base / r.ranks as f64
        );
    }
    for r in &strong {
        eprintln!("strong R={} time {:.6}s", r.ranks, r.wall_time_seconds);
    }
    Ok(())
}

//! Generates a dataset on disk, transposes it, and verifies the result
//! against the reference transpose.

use std::time::Duration;

use xcsr::io::{load_dataset, merge_shards, write_dataset};
use xcsr::oracle::{gather_and_compare, generate, oracle_transpose, GenSpec};
use xcsr::runner::{run_transposes, Backend};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("xcsr-generate-verify");
    std::fs::create_dir_all(&dir)?;

    let spec = GenSpec::heterogeneous(512, 8, 64, 256, 5.0, 128, 2024);
    let data = generate(&spec)?;
    let input = write_dataset(&dir, "input", &data.shards, Some(spec), 0)?;
    println!("wrote {}", input.display());

    let (_, shards) = load_dataset(&input)?;
    let run = run_transposes(Backend::Sim, &shards, 1, Duration::from_secs(30))?;
    let output = write_dataset(&dir, "output", &run.shards, None, 1)?;

    let (_, reloaded) = load_dataset(&output)?;
    let expected = oracle_transpose(&merge_shards(&shards)?);
    let report = gather_and_compare(&reloaded, &expected)?;
    println!("{report}");
    assert!(report.matched);
    Ok(())
}

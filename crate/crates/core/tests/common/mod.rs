#![allow(dead_code)]

use xcsr::collectives::{sim_spawn, Communicator};
use xcsr::engine::Transposer;
use xcsr::oracle::DatasetRng;
use xcsr::xcsr::{DenseTriplets, Triplet, View, XcsrShard};

pub const RANK_CHOICES: [usize; 5] = [1, 2, 3, 4, 8];
pub const VALUE_SIZES: [u64; 3] = [1, 4, 128];

/// A random matrix written as an explicit entry list, independent of the
/// crate's dataset generator.
pub fn random_triplets(
    rng: &mut DatasetRng,
    dim: u64,
    max_cols: u64,
    max_values: u64,
    value_size: u64,
) -> DenseTriplets {
    let mut t = DenseTriplets::new(dim, value_size);
    for row in 0..dim {
        let mut cols: Vec<u64> = (0..rng.between(0, max_cols.min(dim))).map(|_| rng.below(dim)).collect();
        cols.sort_unstable();
        cols.dedup();
        for col in cols {
            let value_count = rng.between(1, max_values);
            let mut payload = vec![0u8; (value_count * value_size) as usize];
            rng.fill(&mut payload);
            t.entries.push(Triplet { row, col, value_count, payload });
        }
    }
    t
}

/// Random contiguous row intervals; some may be empty.
pub fn random_cuts(rng: &mut DatasetRng, dim: u64, ranks: usize) -> Vec<(u64, u64)> {
    let mut cuts: Vec<u64> = (1..ranks).map(|_| rng.between(0, dim)).collect();
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(dim);
    bounds.windows(2).map(|w| (w[0], w[1] - w[0])).collect()
}

pub fn split_rows(t: &DenseTriplets, cuts: &[(u64, u64)]) -> Vec<XcsrShard> {
    cuts.iter()
        .map(|&(start, count)| {
            let part = DenseTriplets {
                entries: t.entries.iter().filter(|e| e.row >= start && e.row < start + count).cloned().collect(),
                ..DenseTriplets::new(t.global_dim, t.value_size)
            };
            part.to_shard(View::RowView, start, count).unwrap()
        })
        .collect()
}

pub struct Instance {
    pub triplets: DenseTriplets,
    pub shards: Vec<XcsrShard>,
}

/// Draws one instance of the randomized corpus: R from [`RANK_CHOICES`],
/// dim <= 64, at most 16 cells per row, 1..=6 values, value size from
/// [`VALUE_SIZES`], random row partition.
pub fn corpus_instance(rng: &mut DatasetRng) -> Instance {
    let ranks = RANK_CHOICES[rng.below(RANK_CHOICES.len() as u64) as usize];
    let dim = rng.between(1, 64);
    let value_size = VALUE_SIZES[rng.below(VALUE_SIZES.len() as u64) as usize];
    let triplets = random_triplets(rng, dim, 16, 6, value_size);
    let cuts = random_cuts(rng, dim, ranks);
    let shards = split_rows(&triplets, &cuts);
    Instance { triplets, shards }
}

/// Applies `n` distributed transposes on the simulator.
pub fn transpose_sim(shards: &[XcsrShard], n: usize) -> Vec<XcsrShard> {
    sim_spawn(shards.len(), |c| {
        let s = &shards[c.rank()];
        Transposer::new(c, s)?.transpose_n(s, n)
    })
    .unwrap()
}

/// Expected shards of the transposed matrix on the same row intervals.
pub fn expected_transpose(t: &DenseTriplets, shards: &[XcsrShard]) -> Vec<XcsrShard> {
    let cuts: Vec<_> = shards.iter().map(|s| (s.major_start, s.major_count)).collect();
    let mut tt = DenseTriplets::new(t.global_dim, t.value_size);
    for e in &t.entries {
        tt.entries.push(Triplet { row: e.col, col: e.row, ..e.clone() });
    }
    split_rows(&tt, &cuts)
}

/// Starts a rank-0 host for a group of 2 and offers it `handshake` from a
/// raw socket. Returns the host's outcome.
pub fn host_with_handshake(handshake: [u8; 13]) -> Result<(), xcsr::collectives::CollectiveError> {
    use std::io::Write;
    use std::net::{TcpListener, TcpStream};
    use std::time::Duration;

    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let host =
        std::thread::spawn(move || xcsr::collectives::TcpComm::host(listener, 2, Duration::from_secs(5)).map(|_| ()));
    let mut s = TcpStream::connect(addr).unwrap();
    s.write_all(&handshake).unwrap();
    let out = host.join().unwrap();
    drop(s);
    out
}

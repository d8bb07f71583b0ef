//! Distributed transposition of multigraphs and high-cardinality sparse
//! matrices stored in the extended compressed sparse row (XCSR) format.
//!
//! A square matrix is split over `R` ranks by contiguous row intervals. Each
//! cell carries a variable number of fixed-size values (the edges of a
//! multigraph between two vertices). The transpose is computed as a purely
//! local transpose of every rank's block followed by a *view swap*: a
//! two-phase all-to-all exchange of cell metadata and cell values.
//!
//! * [`xcsr`]: shard data model, validation, local transpose, reordering.
//! * [`collectives`]: the allgather / all-to-all contract with an in-process
//!   simulator and a TCP backend.
//! * [`engine`]: rank layout, send plans, view swap, distributed transpose.
//! * [`oracle`]: brute-force reference, seeded generators, comparison.
//! * [`io`]: binary shard files and dataset manifests.
//! * [`bench`] and [`cli`]: scaling sweeps and the `xcsr` command line.
//!
//! ```
//! use xcsr::collectives::{sim_spawn, Communicator};
//! use xcsr::engine::Transposer;
//! use xcsr::oracle::{generate, GenSpec};
//!
//! let data = generate(&GenSpec::heterogeneous(32, 4, 1, 8, 3.0, 8, 42)).unwrap();
//! let twice = sim_spawn(4, |comm| {
//!     let shard = &data.shards[comm.rank()];
//!     let mut t = Transposer::new(comm, shard)?;
//!     t.transpose_n(shard, 2)
//! })
//! .unwrap();
//! assert_eq!(twice, data.shards);
//! ```

pub mod bench;
pub mod cli;
pub mod collectives;
pub mod engine;
pub mod io;
pub mod oracle;
pub mod runner;
pub mod xcsr;

pub use engine::{distributed_transpose, view_swap, RankLayout, Transposer};
pub use xcsr::{local_transpose, DenseTriplets, View, XcsrShard};

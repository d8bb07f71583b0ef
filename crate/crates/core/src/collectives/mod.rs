//! Collective communication contract and its backends.
//!
//! A [`Communicator`] is one rank's endpoint in a group of `size()` ranks.
//! Every collective is blocking and must be entered by all ranks in the same
//! order. Received buffers are always indexed by source rank.

mod instrumented;
mod sim;
mod tcp;
pub mod wire;

pub use instrumented::{CommStats, Instrumented, OpStats};
pub use sim::{sim_spawn, SimComm, SpawnError};
pub use tcp::{tcp_connect, tcp_spawn_local, TcpComm, TcpConfig, DEFAULT_TIMEOUT};

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    SizeMismatch,
    PeerFailure,
    Timeout,
    ProtocolViolation,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::SizeMismatch => "size mismatch",
            ErrorKind::PeerFailure => "peer failure",
            ErrorKind::Timeout => "timeout",
            ErrorKind::ProtocolViolation => "protocol violation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct CollectiveError {
    pub kind: ErrorKind,
    pub detail: String,
}

impl CollectiveError {
    pub fn new(kind: ErrorKind, detail: impl Into<String>) -> Self {
        CollectiveError { kind, detail: detail.into() }
    }

    pub fn size_mismatch(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::SizeMismatch, detail)
    }

    pub fn peer_failure(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::PeerFailure, detail)
    }

    pub fn timeout(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Timeout, detail)
    }

    pub fn protocol(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::ProtocolViolation, detail)
    }
}

pub type Result<T> = std::result::Result<T, CollectiveError>;

/// One rank's endpoint of a collective group.
pub trait Communicator {
    fn rank(&self) -> usize;
    fn size(&self) -> usize;

    /// Every rank contributes one record; all ranks receive all records,
    /// indexed by rank. Records must have identical length on every rank.
    fn allgather(&mut self, item: &[u8]) -> Result<Vec<Vec<u8>>>;

    /// Dense all-to-all of fixed-size records: `send[d]` goes to rank `d`,
    /// and the result's entry `s` is what rank `s` addressed to this rank.
    fn alltoall(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>>;

    /// Variable-size all-to-all. Buffers may have any length, including zero.
    fn alltoallv(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>>;
}

impl<C: Communicator + ?Sized> Communicator for &mut C {
    fn rank(&self) -> usize {
        (**self).rank()
    }
    fn size(&self) -> usize {
        (**self).size()
    }
    fn allgather(&mut self, item: &[u8]) -> Result<Vec<Vec<u8>>> {
        (**self).allgather(item)
    }
    fn alltoall(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        (**self).alltoall(send)
    }
    fn alltoallv(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        (**self).alltoallv(send)
    }
}

/// Dense all-to-all of one little-endian `u64` per destination.
pub fn alltoall_u64<C: Communicator + ?Sized>(comm: &mut C, send: &[u64]) -> Result<Vec<u64>> {
    let records = send.iter().map(|v| v.to_le_bytes().to_vec()).collect();
    comm.alltoall(records)?.into_iter().map(|r| decode_u64(&r)).collect()
}

pub(crate) fn decode_u64(r: &[u8]) -> Result<u64> {
    let bytes: [u8; 8] = r
        .try_into()
        .map_err(|_| CollectiveError::size_mismatch(format!("expected an 8-byte record, got {}", r.len())))?;
    Ok(u64::from_le_bytes(bytes))
}

/// Rejects a send vector that does not address every rank exactly once.
pub(crate) fn check_fanout(size: usize, send: &[Vec<u8>], op: &str) -> Result<()> {
    if send.len() != size {
        return Err(CollectiveError::size_mismatch(format!("{op}: {} buffers supplied for {size} ranks", send.len())));
    }
    Ok(())
}

/// Rejects records of differing lengths within one dense exchange.
pub(crate) fn check_uniform(records: &[Vec<u8>], op: &str, side: &str) -> Result<()> {
    if let Some(first) = records.first() {
        if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| r.len() != first.len()) {
            return Err(CollectiveError::size_mismatch(format!(
                "{op}: {side} record {i} is {} bytes, record 0 is {}",
                r.len(),
                first.len()
            )));
        }
    }
    Ok(())
}

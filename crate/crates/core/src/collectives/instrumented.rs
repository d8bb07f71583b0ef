use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::{Communicator, Result};

/// Call and byte counters for one collective kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpStats {
    pub calls: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
}

impl AddAssign for OpStats {
    fn add_assign(&mut self, rhs: OpStats) {
        self.calls += rhs.calls;
        self.bytes_sent += rhs.bytes_sent;
        self.bytes_received += rhs.bytes_received;
    }
}

/// Counters recorded by [`Instrumented`]. Bytes are payload bytes handed to
/// or returned from the collective, self-addressed buffers included; wire
/// framing is not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommStats {
    pub allgather: OpStats,
    pub alltoall: OpStats,
    pub alltoallv: OpStats,
}

impl CommStats {
    pub fn bytes_sent(&self) -> u64 {
        self.allgather.bytes_sent + self.alltoall.bytes_sent + self.alltoallv.bytes_sent
    }

    pub fn bytes_received(&self) -> u64 {
        self.allgather.bytes_received + self.alltoall.bytes_received + self.alltoallv.bytes_received
    }

    pub fn total_calls(&self) -> u64 {
        self.allgather.calls + self.alltoall.calls + self.alltoallv.calls
    }
}

impl AddAssign for CommStats {
    fn add_assign(&mut self, rhs: CommStats) {
        self.allgather += rhs.allgather;
        self.alltoall += rhs.alltoall;
        self.alltoallv += rhs.alltoallv;
    }
}

impl std::iter::Sum for CommStats {
    fn sum<I: Iterator<Item = CommStats>>(iter: I) -> CommStats {
        let mut total = CommStats::default();
        for s in iter {
            total += s;
        }
        total
    }
}

/// Wraps a communicator and counts every collective passing through it.
pub struct Instrumented<C> {
    inner: C,
    stats: CommStats,
}

impl<C: Communicator> Instrumented<C> {
    pub fn new(inner: C) -> Self {
        Instrumented { inner, stats: CommStats::default() }
    }

    pub fn stats(&self) -> CommStats {
        self.stats
    }

    pub fn reset(&mut self) {
        self.stats = CommStats::default();
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }

    pub fn into_inner(self) -> C {
        self.inner
    }
}

fn total_len(bufs: &[Vec<u8>]) -> u64 {
    bufs.iter().map(|b| b.len() as u64).sum()
}

impl<C: Communicator> Communicator for Instrumented<C> {
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn size(&self) -> usize {
        self.inner.size()
    }

    fn allgather(&mut self, item: &[u8]) -> Result<Vec<Vec<u8>>> {
        let sent = item.len() as u64 * self.size() as u64;
        let got = self.inner.allgather(item)?;
        let s = &mut self.stats.allgather;
        s.calls += 1;
        s.bytes_sent += sent;
        s.bytes_received += total_len(&got);
        Ok(got)
    }

    fn alltoall(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        let sent = total_len(&send);
        let got = self.inner.alltoall(send)?;
        let s = &mut self.stats.alltoall;
        s.calls += 1;
        s.bytes_sent += sent;
        s.bytes_received += total_len(&got);
        Ok(got)
    }

    fn alltoallv(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        let sent = total_len(&send);
        let got = self.inner.alltoallv(send)?;
        let s = &mut self.stats.alltoallv;
        s.calls += 1;
        s.bytes_sent += sent;
        s.bytes_received += total_len(&got);
        Ok(got)
    }
}

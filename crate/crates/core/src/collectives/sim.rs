use std::fmt;
use std::sync::mpsc::{channel, Receiver, Sender};

use super::{check_fanout, check_uniform, CollectiveError, Communicator, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Allgather,
    Alltoall,
    Alltoallv,
}

struct Envelope {
    op: Op,
    payload: Vec<u8>,
}

/// In-process endpoint backed by one FIFO channel per ordered rank pair.
///
/// Receiving from each source in rank order makes every collective a
/// barrier and keeps results independent of thread scheduling.
pub struct SimComm {
    rank: usize,
    to: Vec<Sender<Envelope>>,
    from: Vec<Receiver<Envelope>>,
}

impl SimComm {
    /// Creates the `size` connected endpoints of one group.
    pub fn group(size: usize) -> Vec<SimComm> {
        let mut senders: Vec<Vec<Sender<Envelope>>> = (0..size).map(|_| Vec::with_capacity(size)).collect();
        let mut receivers: Vec<Vec<Receiver<Envelope>>> = (0..size).map(|_| Vec::with_capacity(size)).collect();
        // senders[src][dst] pairs with receivers[dst][src].
        for src_senders in senders.iter_mut() {
            for dst_receivers in receivers.iter_mut() {
                let (tx, rx) = channel();
                src_senders.push(tx);
                dst_receivers.push(rx);
            }
        }
        senders.into_iter().zip(receivers).enumerate().map(|(rank, (to, from))| SimComm { rank, to, from }).collect()
    }

    fn exchange(&mut self, op: Op, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        for (dst, payload) in send.into_iter().enumerate() {
            self.to[dst]
                .send(Envelope { op, payload })
                .map_err(|_| CollectiveError::peer_failure(format!("{op:?}: rank {dst} has left the group")))?;
        }
        let mut out = Vec::with_capacity(self.from.len());
        for (src, rx) in self.from.iter().enumerate() {
            let env = rx
                .recv()
                .map_err(|_| CollectiveError::peer_failure(format!("{op:?}: rank {src} has left the group")))?;
            if env.op != op {
                return Err(CollectiveError::protocol(format!(
                    "rank {} entered {op:?} while rank {src} entered {:?}",
                    self.rank, env.op
                )));
            }
            out.push(env.payload);
        }
        Ok(out)
    }
}

impl Communicator for SimComm {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.to.len()
    }

    fn allgather(&mut self, item: &[u8]) -> Result<Vec<Vec<u8>>> {
        let send = vec![item.to_vec(); self.size()];
        let got = self.exchange(Op::Allgather, send)?;
        check_uniform(&got, "allgather", "received")?;
        Ok(got)
    }

    fn alltoall(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        check_fanout(self.size(), &send, "alltoall")?;
        check_uniform(&send, "alltoall", "sent")?;
        let got = self.exchange(Op::Alltoall, send)?;
        check_uniform(&got, "alltoall", "received")?;
        Ok(got)
    }

    fn alltoallv(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        check_fanout(self.size(), &send, "alltoallv")?;
        self.exchange(Op::Alltoallv, send)
    }
}

/// Failure of one or more rank bodies run by [`sim_spawn`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpawnError {
    pub failures: Vec<(usize, String)>,
}

impl fmt::Display for SpawnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rank(s) failed", self.failures.len())?;
        for (rank, msg) in &self.failures {
            write!(f, "; rank {rank}: {msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SpawnError {}

/// Runs `body` on `ranks` threads, each with its own endpoint, and returns
/// the per-rank results indexed by rank.
pub fn sim_spawn<T, E, F>(ranks: usize, body: F) -> std::result::Result<Vec<T>, SpawnError>
where
    T: Send,
    E: fmt::Display,
    F: Fn(SimComm) -> std::result::Result<T, E> + Sync,
{
    assert!(ranks >= 1, "sim_spawn needs at least one rank");
    let body = &body;
    let joined: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = SimComm::group(ranks)
            .into_iter()
            .map(|comm| {
                let rank = comm.rank;
                std::thread::Builder::new()
                    .name(format!("sim-rank-{rank}"))
                    .spawn_scoped(scope, move || body(comm).map_err(|e| e.to_string()))
                    .expect("spawn rank thread")
            })
            .collect();
        handles.into_iter().map(|h| h.join()).collect()
    });

    let mut results = Vec::with_capacity(ranks);
    let mut failures = Vec::new();
    for (rank, outcome) in joined.into_iter().enumerate() {
        match outcome {
            Ok(Ok(v)) => results.push(v),
            Ok(Err(msg)) => failures.push((rank, msg)),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "panicked".into());
                failures.push((rank, format!("panicked: {msg}")));
            }
        }
    }
    if failures.is_empty() {
        Ok(results)
    } else {
        Err(SpawnError { failures })
    }
}

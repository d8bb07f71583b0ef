use std::io::{BufReader, ErrorKind as IoKind};
use std::net::{IpAddr, Ipv4Addr, SocketAddr, TcpListener, TcpStream};
use std::time::{Duration, Instant};

use super::wire::{self, io_error, Handshake};
use super::{check_fanout, check_uniform, CollectiveError, Communicator, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

const POLL_INTERVAL: Duration = Duration::from_millis(5);

/// Rendezvous settings for one process of a TCP group.
#[derive(Debug, Clone)]
pub struct TcpConfig {
    pub rank: usize,
    pub size: usize,
    /// Address rank 0 listens on; every other rank registers there.
    pub rendezvous: SocketAddr,
    /// Interface non-zero ranks bind their mesh listener to.
    pub bind_host: IpAddr,
    /// Deadline for establishing the mesh, and the socket timeout applied to
    /// every collective afterwards.
    pub timeout: Duration,
}

impl TcpConfig {
    pub fn new(rank: usize, size: usize, rendezvous: SocketAddr) -> Self {
        TcpConfig { rank, size, rendezvous, bind_host: IpAddr::V4(Ipv4Addr::LOCALHOST), timeout: DEFAULT_TIMEOUT }
    }
}

/// Full-mesh TCP endpoint.
///
/// The mesh is built through rank 0: every rank registers its listen address
/// there and receives the complete table, then connects to each lower rank
/// and accepts each higher one.
pub struct TcpComm {
    rank: usize,
    size: usize,
    writers: Vec<Option<TcpStream>>,
    readers: Vec<Option<BufReader<TcpStream>>>,
}

/// Establishes this process's endpoint. Rank 0 binds `cfg.rendezvous`.
pub fn tcp_connect(cfg: &TcpConfig) -> Result<TcpComm> {
    check_config(cfg)?;
    if cfg.rank == 0 {
        if cfg.size == 1 {
            return Ok(TcpComm::new(0, 1));
        }
        let listener = TcpListener::bind(cfg.rendezvous)
            .map_err(|e| io_error(e, &format!("binding rendezvous {}", cfg.rendezvous)))?;
        TcpComm::host(listener, cfg.size, cfg.timeout)
    } else {
        TcpComm::join(cfg)
    }
}

fn check_config(cfg: &TcpConfig) -> Result<()> {
    if cfg.size == 0 || cfg.rank >= cfg.size || cfg.size > u32::MAX as usize {
        return Err(CollectiveError::size_mismatch(format!(
            "rank {} is not valid in a group of {}",
            cfg.rank, cfg.size
        )));
    }
    Ok(())
}

fn remaining(deadline: Instant) -> Result<Duration> {
    deadline
        .checked_duration_since(Instant::now())
        .filter(|d| !d.is_zero())
        .ok_or_else(|| CollectiveError::timeout("peers did not arrive before the deadline"))
}

fn accept_until(listener: &TcpListener, deadline: Instant) -> Result<TcpStream> {
    listener.set_nonblocking(true).map_err(|e| io_error(e, "configuring listener"))?;
    loop {
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false).map_err(|e| io_error(e, "configuring connection"))?;
                return Ok(stream);
            }
            Err(e) if e.kind() == IoKind::WouldBlock => {
                remaining(deadline)?;
                std::thread::sleep(POLL_INTERVAL);
            }
            Err(e) => return Err(io_error(e, "accepting peer")),
        }
    }
}

fn connect_until(addr: SocketAddr, deadline: Instant) -> Result<TcpStream> {
    loop {
        let left = remaining(deadline)?;
        match TcpStream::connect_timeout(&addr, left) {
            Ok(s) => return Ok(s),
            Err(e) if matches!(e.kind(), IoKind::ConnectionRefused | IoKind::ConnectionReset) => {
                std::thread::sleep(POLL_INTERVAL * 4);
            }
            Err(e) => return Err(io_error(e, &format!("connecting to {addr}"))),
        }
    }
}

fn set_timeouts(stream: &TcpStream, timeout: Duration) -> Result<()> {
    stream
        .set_read_timeout(Some(timeout))
        .and_then(|_| stream.set_write_timeout(Some(timeout)))
        .and_then(|_| stream.set_nodelay(true))
        .map_err(|e| io_error(e, "configuring connection"))
}

fn parse_addr(s: &str) -> Result<SocketAddr> {
    s.parse().map_err(|_| CollectiveError::protocol(format!("peer registered unparsable address {s:?}")))
}

impl TcpComm {
    fn new(rank: usize, size: usize) -> Self {
        TcpComm { rank, size, writers: (0..size).map(|_| None).collect(), readers: (0..size).map(|_| None).collect() }
    }

    fn attach(&mut self, peer: usize, stream: TcpStream, timeout: Duration) -> Result<()> {
        set_timeouts(&stream, timeout)?;
        let reader = stream.try_clone().map_err(|e| io_error(e, "cloning connection"))?;
        self.writers[peer] = Some(stream);
        self.readers[peer] = Some(BufReader::new(reader));
        Ok(())
    }

    /// Runs the rank-0 side of the rendezvous on an already bound listener.
    pub fn host(listener: TcpListener, size: usize, timeout: Duration) -> Result<TcpComm> {
        check_config(&TcpConfig::new(0, size, listener.local_addr().map_err(|e| io_error(e, "listener"))?))?;
        let deadline = Instant::now() + timeout;
        let mut comm = TcpComm::new(0, size);
        let mut addrs = vec![String::new(); size];
        addrs[0] = listener.local_addr().map_err(|e| io_error(e, "listener address"))?.to_string();
        let mut pending = Vec::with_capacity(size - 1);
        for _ in 1..size {
            let mut stream = accept_until(&listener, deadline)?;
            stream.set_read_timeout(Some(remaining(deadline)?)).map_err(|e| io_error(e, "configuring connection"))?;
            let hs = Handshake::read_from(&mut stream)?;
            if hs.size as usize != size {
                return Err(CollectiveError::protocol(format!(
                    "peer rank {} believes the group has {} ranks, expected {size}",
                    hs.rank, hs.size
                )));
            }
            let peer = hs.rank as usize;
            if peer == 0 || peer >= size || !addrs[peer].is_empty() {
                return Err(CollectiveError::protocol(format!("rank collision or invalid rank {peer}")));
            }
            let addr = String::from_utf8(wire::read_frame(&mut stream)?)
                .map_err(|_| CollectiveError::protocol("registered address is not utf-8"))?;
            parse_addr(&addr)?;
            addrs[peer] = addr;
            pending.push((peer, stream));
        }
        let table = wire::encode_address_table(&addrs);
        for (peer, mut stream) in pending {
            Handshake { rank: 0, size: size as u32 }.write_to(&mut stream)?;
            wire::write_frame(&mut stream, &table)?;
            comm.attach(peer, stream, timeout)?;
        }
        Ok(comm)
    }

    fn join(cfg: &TcpConfig) -> Result<TcpComm> {
        let deadline = Instant::now() + cfg.timeout;
        let me = Handshake { rank: cfg.rank as u32, size: cfg.size as u32 };
        let listener = TcpListener::bind((cfg.bind_host, 0)).map_err(|e| io_error(e, "binding mesh listener"))?;
        let my_addr = listener.local_addr().map_err(|e| io_error(e, "listener address"))?;

        let mut comm = TcpComm::new(cfg.rank, cfg.size);
        let mut root = connect_until(cfg.rendezvous, deadline)?;
        root.set_read_timeout(Some(remaining(deadline)?)).map_err(|e| io_error(e, "configuring connection"))?;
        me.write_to(&mut root)?;
        wire::write_frame(&mut root, my_addr.to_string().as_bytes())?;
        let hs = Handshake::read_from(&mut root)?;
        expect_peer(hs, 0, cfg.size)?;
        let table = wire::decode_address_table(&wire::read_frame(&mut root)?, cfg.size)?;
        comm.attach(0, root, cfg.timeout)?;

        for (peer, addr) in table.iter().enumerate().take(cfg.rank).skip(1) {
            let mut stream = connect_until(parse_addr(addr)?, deadline)?;
            stream.set_read_timeout(Some(remaining(deadline)?)).map_err(|e| io_error(e, "configuring connection"))?;
            me.write_to(&mut stream)?;
            expect_peer(Handshake::read_from(&mut stream)?, peer, cfg.size)?;
            comm.attach(peer, stream, cfg.timeout)?;
        }
        for _ in cfg.rank + 1..cfg.size {
            let mut stream = accept_until(&listener, deadline)?;
            stream.set_read_timeout(Some(remaining(deadline)?)).map_err(|e| io_error(e, "configuring connection"))?;
            let hs = Handshake::read_from(&mut stream)?;
            let peer = hs.rank as usize;
            if hs.size as usize != cfg.size || peer <= cfg.rank || peer >= cfg.size || comm.writers[peer].is_some() {
                return Err(CollectiveError::protocol(format!(
                    "unexpected mesh handshake from rank {} of {}",
                    hs.rank, hs.size
                )));
            }
            me.write_to(&mut stream)?;
            comm.attach(peer, stream, cfg.timeout)?;
        }
        Ok(comm)
    }

    /// Pairwise exchange: in step `k` this rank sends to `rank + k` while
    /// receiving from `rank - k`, so every transfer has a matching reader.
    fn exchange(&mut self, mut send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        let size = self.size;
        let mut out = vec![Vec::new(); size];
        out[self.rank] = std::mem::take(&mut send[self.rank]);
        for step in 1..size {
            let to = (self.rank + step) % size;
            let from = (self.rank + size - step) % size;
            let payload = std::mem::take(&mut send[to]);
            let writer = self.writers[to].as_mut().expect("mesh link");
            let reader = self.readers[from].as_mut().expect("mesh link");
            let (sent, received) = std::thread::scope(|s| {
                let h = s.spawn(move || wire::write_frame(writer, &payload));
                let received = wire::read_frame(reader);
                (h.join(), received)
            });
            sent.map_err(|_| CollectiveError::peer_failure("writer thread panicked"))?
                .map_err(|e| CollectiveError::new(e.kind, format!("to rank {to}: {}", e.detail)))?;
            out[from] =
                received.map_err(|e| CollectiveError::new(e.kind, format!("from rank {from}: {}", e.detail)))?;
        }
        Ok(out)
    }
}

fn expect_peer(hs: Handshake, rank: usize, size: usize) -> Result<()> {
    if hs.rank as usize != rank || hs.size as usize != size {
        return Err(CollectiveError::protocol(format!(
            "expected handshake from rank {rank} of {size}, got rank {} of {}",
            hs.rank, hs.size
        )));
    }
    Ok(())
}

impl Communicator for TcpComm {
    fn rank(&self) -> usize {
        self.rank
    }

    fn size(&self) -> usize {
        self.size
    }

    fn allgather(&mut self, item: &[u8]) -> Result<Vec<Vec<u8>>> {
        let got = self.exchange(vec![item.to_vec(); self.size])?;
        check_uniform(&got, "allgather", "received")?;
        Ok(got)
    }

    fn alltoall(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        check_fanout(self.size, &send, "alltoall")?;
        check_uniform(&send, "alltoall", "sent")?;
        let got = self.exchange(send)?;
        check_uniform(&got, "alltoall", "received")?;
        Ok(got)
    }

    fn alltoallv(&mut self, send: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        check_fanout(self.size, &send, "alltoallv")?;
        self.exchange(send)
    }
}

/// Runs `body` on `ranks` threads of this process, each with a TCP endpoint
/// connected over loopback. Intended for tests and in-process benchmarks.
pub fn tcp_spawn_local<T, E, F>(
    ranks: usize,
    timeout: Duration,
    body: F,
) -> std::result::Result<Vec<T>, super::SpawnError>
where
    T: Send,
    E: std::fmt::Display,
    F: Fn(TcpComm) -> std::result::Result<T, E> + Sync,
{
    let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, 0)).expect("bind loopback");
    let rendezvous = listener.local_addr().expect("local addr");
    let body = &body;
    let mut listener = Some(listener);
    let joined: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..ranks)
            .map(|rank| {
                let own_listener = if rank == 0 { listener.take() } else { None };
                scope.spawn(move || {
                    let comm = match own_listener {
                        Some(l) if ranks > 1 => TcpComm::host(l, ranks, timeout),
                        _ if rank == 0 => Ok(TcpComm::new(0, 1)),
                        _ => {
                            let mut cfg = TcpConfig::new(rank, ranks, rendezvous);
                            cfg.timeout = timeout;
                            tcp_connect(&cfg)
                        }
                    };
                    match comm {
                        Ok(c) => body(c).map_err(|e| e.to_string()),
                        Err(e) => Err(e.to_string()),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join()).collect()
    });
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (rank, j) in joined.into_iter().enumerate() {
        match j {
            Ok(Ok(v)) => results.push(v),
            Ok(Err(m)) => failures.push((rank, m)),
            Err(_) => failures.push((rank, "panicked".to_string())),
        }
    }
    if failures.is_empty() {
        Ok(results)
    } else {
        Err(super::SpawnError { failures })
    }
}

//! Byte layout of the TCP backend.
//!
//! Every connection opens with a 13-byte handshake
//! `["XCOL"][version: u8 = 1][rank: u32 LE][size: u32 LE]`, and every
//! message afterwards is a frame `[length: u64 LE][payload]`.

use std::io::{self, Read, Write};

use super::{CollectiveError, ErrorKind};

pub const MAGIC: [u8; 4] = *b"XCOL";
pub const VERSION: u8 = 1;
pub const HANDSHAKE_LEN: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Handshake {
    pub rank: u32,
    pub size: u32,
}

impl Handshake {
    pub fn encode(&self) -> [u8; HANDSHAKE_LEN] {
        let mut out = [0u8; HANDSHAKE_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5..9].copy_from_slice(&self.rank.to_le_bytes());
        out[9..13].copy_from_slice(&self.size.to_le_bytes());
        out
    }

    pub fn decode(buf: &[u8; HANDSHAKE_LEN]) -> Result<Handshake, CollectiveError> {
        if buf[0..4] != MAGIC {
            return Err(CollectiveError::protocol(format!("bad handshake magic {:02x?}", &buf[0..4])));
        }
        if buf[4] != VERSION {
            return Err(CollectiveError::protocol(format!(
                "unsupported protocol version {} (expected {VERSION})",
                buf[4]
            )));
        }
        Ok(Handshake {
            rank: u32::from_le_bytes(buf[5..9].try_into().unwrap()),
            size: u32::from_le_bytes(buf[9..13].try_into().unwrap()),
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), CollectiveError> {
        w.write_all(&self.encode()).map_err(|e| io_error(e, "sending handshake"))?;
        w.flush().map_err(|e| io_error(e, "sending handshake"))
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Handshake, CollectiveError> {
        let mut buf = [0u8; HANDSHAKE_LEN];
        r.read_exact(&mut buf).map_err(|e| io_error(e, "reading handshake"))?;
        Handshake::decode(&buf)
    }
}

pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<(), CollectiveError> {
    w.write_all(&(payload.len() as u64).to_le_bytes())
        .and_then(|_| w.write_all(payload))
        .and_then(|_| w.flush())
        .map_err(|e| io_error(e, "sending frame"))
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Vec<u8>, CollectiveError> {
    let mut len = [0u8; 8];
    r.read_exact(&mut len).map_err(|e| io_error(e, "reading frame length"))?;
    let len = u64::from_le_bytes(len);
    let mut payload = Vec::new();
    // Grows as bytes arrive rather than trusting the announced length.
    let got = r.take(len).read_to_end(&mut payload).map_err(|e| io_error(e, "reading frame payload"))?;
    if got as u64 != len {
        return Err(CollectiveError::protocol(format!("frame announced {len} bytes but the stream ended after {got}")));
    }
    Ok(payload)
}

/// Encodes the rendezvous address table: one frame-style
/// `[length: u64 LE][utf-8 address]` entry per rank.
pub fn encode_address_table(addrs: &[String]) -> Vec<u8> {
    let mut out = Vec::new();
    for a in addrs {
        out.extend_from_slice(&(a.len() as u64).to_le_bytes());
        out.extend_from_slice(a.as_bytes());
    }
    out
}

pub fn decode_address_table(mut buf: &[u8], size: usize) -> Result<Vec<String>, CollectiveError> {
    let mut out = Vec::with_capacity(size);
    for i in 0..size {
        if buf.len() < 8 {
            return Err(CollectiveError::protocol(format!("address table truncated at entry {i}")));
        }
        let len = u64::from_le_bytes(buf[..8].try_into().unwrap()) as usize;
        buf = &buf[8..];
        if buf.len() < len {
            return Err(CollectiveError::protocol(format!("address table truncated at entry {i}")));
        }
        let addr = std::str::from_utf8(&buf[..len])
            .map_err(|_| CollectiveError::protocol(format!("address table entry {i} is not utf-8")))?;
        out.push(addr.to_string());
        buf = &buf[len..];
    }
    if !buf.is_empty() {
        return Err(CollectiveError::protocol("trailing bytes after address table"));
    }
    Ok(out)
}

pub(crate) fn io_error(e: io::Error, what: &str) -> CollectiveError {
    let kind = match e.kind() {
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => ErrorKind::Timeout,
        _ => ErrorKind::PeerFailure,
    };
    CollectiveError::new(kind, format!("{what}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handshake_layout() {
        let hs = Handshake { rank: 2, size: 5 };
        let bytes = hs.encode();
        assert_eq!(bytes, [b'X', b'C', b'O', b'L', 1, 2, 0, 0, 0, 5, 0, 0, 0]);
        assert_eq!(Handshake::decode(&bytes).unwrap(), hs);
    }

    #[test]
    fn wrong_magic_and_version_rejected() {
        let mut bytes = Handshake { rank: 0, size: 1 }.encode();
        bytes[0] = b'Y';
        assert_eq!(Handshake::decode(&bytes).unwrap_err().kind, ErrorKind::ProtocolViolation);
        let mut bytes = Handshake { rank: 0, size: 1 }.encode();
        bytes[4] = 2;
        assert_eq!(Handshake::decode(&bytes).unwrap_err().kind, ErrorKind::ProtocolViolation);
    }

    #[test]
    fn frame_layout_and_truncation() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"xyz").unwrap();
        assert_eq!(buf, [3, 0, 0, 0, 0, 0, 0, 0, b'x', b'y', b'z']);
        assert_eq!(read_frame(&mut buf.as_slice()).unwrap(), b"xyz");

        let truncated = &buf[..10];
        let err = read_frame(&mut &truncated[..]).unwrap_err();
        assert_eq!(err.kind, ErrorKind::ProtocolViolation);

        let err = read_frame(&mut &buf[..4]).unwrap_err();
        assert_eq!(err.kind, ErrorKind::PeerFailure);
    }

    #[test]
    fn address_table_roundtrip() {
        let addrs = vec!["127.0.0.1:4000".to_string(), "[::1]:1".to_string(), String::new()];
        let enc = encode_address_table(&addrs);
        assert_eq!(decode_address_table(&enc, 3).unwrap(), addrs);
        assert!(decode_address_table(&enc, 2).is_err());
        assert!(decode_address_table(&enc[..enc.len() - 1], 3).is_err());
    }
}

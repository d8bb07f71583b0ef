//! Shard file layout. All integers little-endian.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "XCSR"
//!      4     2  version = 1
//!      6     1  view (0 = row, 1 = column)
//!      7     1  reserved = 0
//!      8     8  global_dim
//!     16     8  major_start     owned interval along the partitioned axis
//!     24     8  major_count
//!     32     8  total_cells     = sum of line_cell_counts
//!     40     8  total_values    = sum of cell_value_counts
//!     48     8  value_size
//!     56     8  line_count      number of stored (nonempty) lines
//!     64        line_ids          u64 x line_count, strictly increasing
//!               line_cell_counts  u64 x line_count
//!               cell_ids          u64 x total_cells
//!               cell_value_counts u64 x total_cells
//!               values            value_size x total_values bytes
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::xcsr::{ShardError, View, XcsrShard};

pub const MAGIC: [u8; 4] = *b"XCSR";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("corrupt shard file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Invalid(#[from] ShardError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XcsrFileHeader {
    pub view: View,
    pub global_dim: u64,
    pub major_start: u64,
    pub major_count: u64,
    pub total_cells: u64,
    pub total_values: u64,
    pub value_size: u64,
    pub line_count: u64,
}

impl XcsrFileHeader {
    pub fn of(shard: &XcsrShard) -> Self {
        XcsrFileHeader {
            view: shard.view,
            global_dim: shard.global_dim,
            major_start: shard.major_start,
            major_count: shard.major_count,
            total_cells: shard.cell_ids.len() as u64,
            total_values: shard.total_values(),
            value_size: shard.value_size,
            line_count: shard.line_ids.len() as u64,
        }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
        out[6] = self.view.to_byte();
        out[7] = 0;
        let words = [
            self.global_dim,
            self.major_start,
            self.major_count,
            self.total_cells,
            self.total_values,
            self.value_size,
            self.line_count,
        ];
        for (i, w) in words.iter().enumerate() {
            out[8 + 8 * i..16 + 8 * i].copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn decode(buf: &[u8; HEADER_LEN]) -> Result<Self, FormatError> {
        let magic: [u8; 4] = buf[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([buf[4], buf[5]]);
        if version != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let view = View::from_byte(buf[6]).ok_or_else(|| FormatError::Corrupt(format!("view byte {}", buf[6])))?;
        if buf[7] != 0 {
            return Err(FormatError::Corrupt(format!("reserved byte is {}", buf[7])));
        }
        let word = |i: usize| u64::from_le_bytes(buf[8 + 8 * i..16 + 8 * i].try_into().unwrap());
        Ok(XcsrFileHeader {
            view,
            global_dim: word(0),
            major_start: word(1),
            major_count: word(2),
            total_cells: word(3),
            total_values: word(4),
            value_size: word(5),
            line_count: word(6),
        })
    }
}

fn write_words<W: Write>(w: &mut W, words: &[u64]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(words.len() * 8);
    for v in words {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

/// Writes a valid shard and returns the number of bytes written.
pub fn write_shard<W: Write>(shard: &XcsrShard, mut sink: W) -> Result<u64, FormatError> {
    shard.ensure_valid()?;
    sink.write_all(&XcsrFileHeader::of(shard).encode())?;
    write_words(&mut sink, &shard.line_ids)?;
    write_words(&mut sink, &shard.line_cell_counts)?;
    write_words(&mut sink, &shard.cell_ids)?;
    write_words(&mut sink, &shard.cell_value_counts)?;
    sink.write_all(&shard.values)?;
    sink.flush()?;
    let words = 2 * shard.line_ids.len() + 2 * shard.cell_ids.len();
    Ok((HEADER_LEN + 8 * words + shard.values.len()) as u64)
}

fn read_exactly<R: Read>(r: &mut R, len: u64, what: &str) -> Result<Vec<u8>, FormatError> {
    let mut buf = Vec::new();
    // Bounded by what the stream actually holds, not by the header's claim.
    r.take(len).read_to_end(&mut buf)?;
    if buf.len() as u64 != len {
        return Err(FormatError::Corrupt(format!("{what}: header implies {len} bytes, stream holds {}", buf.len())));
    }
    Ok(buf)
}

fn read_words<R: Read>(r: &mut R, count: u64, what: &str) -> Result<Vec<u64>, FormatError> {
    let len = count.checked_mul(8).ok_or_else(|| FormatError::Corrupt(format!("{what}: length overflows")))?;
    let bytes = read_exactly(r, len, what)?;
    Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Reads one shard, checking the header arithmetic and every shard
/// invariant.
pub fn read_shard<R: Read>(mut source: R) -> Result<XcsrShard, FormatError> {
    let mut head = [0u8; HEADER_LEN];
    source.read_exact(&mut head).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::Corrupt("truncated header".into()),
        _ => FormatError::Io(e),
    })?;
    let h = XcsrFileHeader::decode(&head)?;
    let line_ids = read_words(&mut source, h.line_count, "line_ids")?;
    let line_cell_counts = read_words(&mut source, h.line_count, "line_cell_counts")?;
    let cell_ids = read_words(&mut source, h.total_cells, "cell_ids")?;
    let cell_value_counts = read_words(&mut source, h.total_cells, "cell_value_counts")?;
    let value_bytes = h
        .total_values
        .checked_mul(h.value_size)
        .ok_or_else(|| FormatError::Corrupt("value byte length overflows".into()))?;
    let values = read_exactly(&mut source, value_bytes, "values")?;

    let summed_cells: u128 = line_cell_counts.iter().map(|&c| c as u128).sum();
    if summed_cells != h.total_cells as u128 {
        return Err(FormatError::Corrupt(format!(
            "total_cells {} but line_cell_counts sum to {summed_cells}",
            h.total_cells
        )));
    }
    let summed_values: u128 = cell_value_counts.iter().map(|&c| c as u128).sum();
    if summed_values != h.total_values as u128 {
        return Err(FormatError::Corrupt(format!(
            "total_values {} but cell_value_counts sum to {summed_values}",
            h.total_values
        )));
    }
    let shard = XcsrShard {
        view: h.view,
        global_dim: h.global_dim,
        major_start: h.major_start,
        major_count: h.major_count,
        line_ids,
        line_cell_counts,
        cell_ids,
        cell_value_counts,
        value_size: h.value_size,
        values,
    };
    shard.ensure_valid()?;
    Ok(shard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xcsr::View;

    fn tiny() -> XcsrShard {
        XcsrShard {
            view: View::RowView,
            global_dim: 3,
            major_start: 1,
            major_count: 1,
            line_ids: vec![1],
            line_cell_counts: vec![1],
            cell_ids: vec![2],
            cell_value_counts: vec![2],
            value_size: 1,
            values: b"hi".to_vec(),
        }
    }

    #[test]
    fn byte_layout_is_frozen() {
        let mut buf = Vec::new();
        let n = write_shard(&tiny(), &mut buf).unwrap();
        assert_eq!(n as usize, buf.len());
        let mut expected = Vec::new();
        expected.extend_from_slice(b"XCSR");
        expected.extend_from_slice(&[1, 0, 0, 0]);
        // global_dim, major_start, major_count, total_cells, total_values,
        // value_size, line_count
        for w in [3u64, 1, 1, 1, 2, 1, 1] {
            expected.extend_from_slice(&w.to_le_bytes());
        }
        // line_ids, line_cell_counts, cell_ids, cell_value_counts
        for w in [1u64, 1, 2, 2] {
            expected.extend_from_slice(&w.to_le_bytes());
        }
        expected.extend_from_slice(b"hi");
        assert_eq!(buf, expected);
        assert_eq!(read_shard(buf.as_slice()).unwrap(), tiny());
    }

    #[test]
    fn empty_shard_roundtrip() {
        let s = XcsrShard::empty(View::ColumnView, 0, 0, 0, 16);
        let mut buf = Vec::new();
        write_shard(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN);
        assert_eq!(buf[6], 1);
        assert_eq!(read_shard(buf.as_slice()).unwrap(), s);
    }

    fn encoded() -> Vec<u8> {
        let mut buf = Vec::new();
        write_shard(&tiny(), &mut buf).unwrap();
        buf
    }

    #[test]
    fn bad_magic_and_version() {
        let mut buf = encoded();
        buf[0] = b'Y';
        assert!(matches!(read_shard(buf.as_slice()), Err(FormatError::BadMagic(_))));
        let mut buf = encoded();
        buf[4] = 2;
        assert!(matches!(read_shard(buf.as_slice()), Err(FormatError::UnsupportedVersion(2))));
    }

    #[test]
    fn truncation_and_header_mismatch_are_corruption() {
        let buf = encoded();
        assert!(matches!(read_shard(&buf[..buf.len() - 1]), Err(FormatError::Corrupt(_))));
        assert!(matches!(read_shard(&buf[..10]), Err(FormatError::Corrupt(_))));
        let mut buf = encoded();
        buf[40] = 3; // total_values
        buf.push(b'!');
        assert!(matches!(read_shard(buf.as_slice()), Err(FormatError::Corrupt(_))));
        let mut buf = encoded();
        buf[7] = 1;
        assert!(matches!(read_shard(buf.as_slice()), Err(FormatError::Corrupt(_))));
    }

    #[test]
    fn invalid_contents_are_rejected() {
        let mut buf = encoded();
        // cell_ids[0] := 5, outside a 3x3 matrix
        buf[HEADER_LEN + 16] = 5;
        assert!(matches!(read_shard(buf.as_slice()), Err(FormatError::Invalid(_))));
        let mut bad = tiny();
        bad.cell_value_counts[0] = 0;
        assert!(matches!(write_shard(&bad, Vec::new()), Err(FormatError::Invalid(_))));
    }

    #[test]
    fn huge_claimed_lengths_do_not_allocate() {
        let mut buf = encoded();
        buf[56..64].copy_from_slice(&(u64::MAX / 16).to_le_bytes());
        assert!(matches!(read_shard(buf.as_slice()), Err(FormatError::Corrupt(_))));
    }
}

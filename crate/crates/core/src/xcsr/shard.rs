use std::fmt;

use super::ShardError;

/// Which axis of the distributed matrix is partitioned across ranks.
///
/// In `RowView` each rank owns a contiguous interval of rows (the matrix is
/// the vertical concatenation of row slabs). In `ColumnView` each rank owns
/// a contiguous interval of columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum View {
    RowView,
    ColumnView,
}

impl View {
    pub fn flipped(self) -> View {
        match self {
            View::RowView => View::ColumnView,
            View::ColumnView => View::RowView,
        }
    }

    pub fn to_byte(self) -> u8 {
        match self {
            View::RowView => 0,
            View::ColumnView => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<View> {
        match b {
            0 => Some(View::RowView),
            1 => Some(View::ColumnView),
            _ => None,
        }
    }
}

/// One invariant violation found by [`XcsrShard::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Name of the offending array (or header field).
    pub array: &'static str,
    /// Offending array index, when the violation is local to one element.
    pub index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]: {}", self.array, i, self.message),
            None => write!(f, "{}: {}", self.array, self.message),
        }
    }
}

/// One rank's slice of a distributed XCSR matrix.
///
/// Cells are stored grouped by line: `line_ids[k]` is the global row id of
/// the k-th stored line, `line_cell_counts[k]` the number of cells on it.
/// `cell_ids` holds the global column id of every cell, `cell_value_counts`
/// the number of values per cell, and `values` the concatenated fixed-size
/// payloads in cell order. Only nonempty lines are stored, so the encoding
/// of a given cell set is unique.
///
/// `major_start`/`major_count` describe the interval this rank owns along
/// the partitioned axis given by `view`: stored line ids fall inside it in
/// `RowView`, cell (column) ids fall inside it in `ColumnView`. The interval
/// never changes under local transpose or view swap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XcsrShard {
    pub view: View,
    pub global_dim: u64,
    pub major_start: u64,
    pub major_count: u64,
    pub line_ids: Vec<u64>,
    pub line_cell_counts: Vec<u64>,
    pub cell_ids: Vec<u64>,
    pub cell_value_counts: Vec<u64>,
    pub value_size: u64,
    pub values: Vec<u8>,
}

/// Borrowed view of one stored cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRef<'a> {
    pub row: u64,
    pub col: u64,
    pub value_count: u64,
    pub payload: &'a [u8],
}

impl<'a> CellRef<'a> {
    pub fn meta(&self) -> CellMeta {
        CellMeta { row: self.row, col: self.col, value_count: self.value_count }
    }
}

/// The `(row, col, value_count)` triple exchanged in the metadata phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellMeta {
    pub row: u64,
    pub col: u64,
    pub value_count: u64,
}

impl CellMeta {
    /// Packed wire size: three little-endian u64s.
    pub const WIRE_SIZE: usize = 24;

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.row.to_le_bytes());
        out.extend_from_slice(&self.col.to_le_bytes());
        out.extend_from_slice(&self.value_count.to_le_bytes());
    }

    /// Decodes a packed buffer of records. The buffer length must be a
    /// multiple of [`CellMeta::WIRE_SIZE`].
    pub fn decode_all(buf: &[u8]) -> Option<Vec<CellMeta>> {
        if !buf.len().is_multiple_of(Self::WIRE_SIZE) {
            return None;
        }
        let word = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8-byte slice"));
        Some(
            buf.chunks_exact(Self::WIRE_SIZE)
                .map(|r| CellMeta { row: word(&r[0..8]), col: word(&r[8..16]), value_count: word(&r[16..24]) })
                .collect(),
        )
    }
}

impl XcsrShard {
    /// A shard holding no cells.
    pub fn empty(view: View, global_dim: u64, major_start: u64, major_count: u64, value_size: u64) -> Self {
        XcsrShard {
            view,
            global_dim,
            major_start,
            major_count,
            line_ids: Vec::new(),
            line_cell_counts: Vec::new(),
            cell_ids: Vec::new(),
            cell_value_counts: Vec::new(),
            value_size,
            values: Vec::new(),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cell_ids.len()
    }

    pub fn total_values(&self) -> u64 {
        self.cell_value_counts.iter().sum()
    }

    /// End (exclusive) of the owned interval.
    pub fn major_end(&self) -> u64 {
        self.major_start + self.major_count
    }

    pub fn owns(&self, id: u64) -> bool {
        id >= self.major_start && id < self.major_end()
    }

    /// Iterates cells in storage order. The shard must be valid.
    pub fn cells(&self) -> Cells<'_> {
        Cells {
            shard: self,
            line: 0,
            left_in_line: self.line_cell_counts.first().copied().unwrap_or(0),
            cell: 0,
            offset: 0,
        }
    }

    /// Checks every structural invariant and returns one entry per violation.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push =
            |array: &'static str, index: Option<usize>, message: String| out.push(Violation { array, index, message });

        if self.value_size == 0 {
            push("value_size", None, "must be at least 1".into());
        }
        match self.major_start.checked_add(self.major_count) {
            Some(end) if end <= self.global_dim => {}
            _ => push(
                "major_count",
                None,
                format!(
                    "interval [{}, {}+{}) exceeds global_dim {}",
                    self.major_start, self.major_start, self.major_count, self.global_dim
                ),
            ),
        }
        if self.line_ids.len() != self.line_cell_counts.len() {
            push(
                "line_cell_counts",
                None,
                format!("length {} differs from line_ids length {}", self.line_cell_counts.len(), self.line_ids.len()),
            );
        }
        let declared: u128 = self.line_cell_counts.iter().map(|&c| c as u128).sum();
        if declared != self.cell_ids.len() as u128 {
            push(
                "cell_ids",
                None,
                format!("length {} differs from sum of line_cell_counts {}", self.cell_ids.len(), declared),
            );
        }
        if self.cell_value_counts.len() != self.cell_ids.len() {
            push(
                "cell_value_counts",
                None,
                format!("length {} differs from cell_ids length {}", self.cell_value_counts.len(), self.cell_ids.len()),
            );
        }
        for (i, &c) in self.line_cell_counts.iter().enumerate() {
            if c == 0 {
                push("line_cell_counts", Some(i), "stored line has no cells".into());
            }
        }
        for (i, &id) in self.line_ids.iter().enumerate() {
            if id >= self.global_dim {
                push("line_ids", Some(i), format!("id {} >= global_dim {}", id, self.global_dim));
            } else if self.view == View::RowView && !self.owns(id) {
                push(
                    "line_ids",
                    Some(i),
                    format!("row {} outside owned interval [{}, {})", id, self.major_start, self.major_end()),
                );
            }
            if i > 0 && self.line_ids[i - 1] >= id {
                push("line_ids", Some(i), "not strictly increasing".into());
            }
        }
        for (i, &id) in self.cell_ids.iter().enumerate() {
            if id >= self.global_dim {
                push("cell_ids", Some(i), format!("id {} >= global_dim {}", id, self.global_dim));
            } else if self.view == View::ColumnView && !self.owns(id) {
                push(
                    "cell_ids",
                    Some(i),
                    format!("column {} outside owned interval [{}, {})", id, self.major_start, self.major_end()),
                );
            }
        }
        // Strict increase inside each line; only meaningful when the line
        // lengths add up.
        if declared == self.cell_ids.len() as u128 {
            let mut start = 0usize;
            for &count in &self.line_cell_counts {
                let end = start + count as usize;
                for i in start + 1..end {
                    if self.cell_ids[i - 1] >= self.cell_ids[i] {
                        push("cell_ids", Some(i), "not strictly increasing within its line".into());
                    }
                }
                start = end;
            }
        }
        for (i, &c) in self.cell_value_counts.iter().enumerate() {
            if c == 0 {
                push("cell_value_counts", Some(i), "cell holds no values".into());
            }
        }
        let total_values: u128 = self.cell_value_counts.iter().map(|&c| c as u128).sum();
        let expected_bytes = total_values * self.value_size as u128;
        if expected_bytes != self.values.len() as u128 {
            push(
                "values",
                None,
                format!(
                    "length {} differs from value_size {} x total values {}",
                    self.values.len(),
                    self.value_size,
                    total_values
                ),
            );
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), ShardError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ShardError::Invalid(violations))
        }
    }
}

/// Iterator over the cells of a shard, see [`XcsrShard::cells`].
pub struct Cells<'a> {
    shard: &'a XcsrShard,
    line: usize,
    left_in_line: u64,
    cell: usize,
    offset: usize,
}

impl<'a> Iterator for Cells<'a> {
    type Item = CellRef<'a>;

    fn next(&mut self) -> Option<CellRef<'a>> {
        let s = self.shard;
        while self.left_in_line == 0 {
            self.line += 1;
            if self.line >= s.line_cell_counts.len() {
                return None;
            }
            self.left_in_line = s.line_cell_counts[self.line];
        }
        let value_count = s.cell_value_counts[self.cell];
        let len = (value_count * s.value_size) as usize;
        let cell = CellRef {
            row: s.line_ids[self.line],
            col: s.cell_ids[self.cell],
            value_count,
            payload: &s.values[self.offset..self.offset + len],
        };
        self.cell += 1;
        self.offset += len;
        self.left_in_line -= 1;
        Some(cell)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.shard.cell_ids.len() - self.cell;
        (left, Some(left))
    }
}

/// Canonical line-grouped arrays assembled from a list of cells.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellArrays {
    pub line_ids: Vec<u64>,
    pub line_cell_counts: Vec<u64>,
    pub cell_ids: Vec<u64>,
    pub cell_value_counts: Vec<u64>,
    pub values: Vec<u8>,
}

impl CellArrays {
    /// Appends a cell. Cells must arrive sorted by `(row, col)`.
    pub(crate) fn push(&mut self, row: u64, col: u64, value_count: u64, payload: &[u8]) {
        if self.line_ids.last() == Some(&row) {
            *self.line_cell_counts.last_mut().expect("line exists") += 1;
        } else {
            self.line_ids.push(row);
            self.line_cell_counts.push(1);
        }
        self.cell_ids.push(col);
        self.cell_value_counts.push(value_count);
        self.values.extend_from_slice(payload);
    }

    pub fn cell_count(&self) -> usize {
        self.cell_ids.len()
    }

    pub fn into_shard(
        self,
        view: View,
        global_dim: u64,
        major_start: u64,
        major_count: u64,
        value_size: u64,
    ) -> XcsrShard {
        XcsrShard {
            view,
            global_dim,
            major_start,
            major_count,
            line_ids: self.line_ids,
            line_cell_counts: self.line_cell_counts,
            cell_ids: self.cell_ids,
            cell_value_counts: self.cell_value_counts,
            value_size,
            values: self.values,
        }
    }
}

use super::{CellArrays, ShardError, View, XcsrShard};

/// One explicit matrix entry: a cell with its concatenated value records.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triplet {
    pub row: u64,
    pub col: u64,
    pub value_count: u64,
    /// `value_count` records of the matrix's `value_size` bytes each.
    pub payload: Vec<u8>,
}

impl Triplet {
    pub fn records(&self, value_size: u64) -> std::slice::Chunks<'_, u8> {
        self.payload.chunks(value_size.max(1) as usize)
    }
}

/// Explicit list of matrix entries, used as the brute-force reference
/// representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseTriplets {
    pub global_dim: u64,
    pub value_size: u64,
    pub entries: Vec<Triplet>,
}

impl DenseTriplets {
    pub fn new(global_dim: u64, value_size: u64) -> Self {
        DenseTriplets { global_dim, value_size, entries: Vec::new() }
    }

    /// Expands one shard into its entries, in storage order.
    pub fn from_shard(shard: &XcsrShard) -> Self {
        Self::from_shards(std::slice::from_ref(shard))
    }

    /// Concatenates the entries of several shards, in shard then storage order.
    /// Dimensions are taken from the first shard.
    pub fn from_shards(shards: &[XcsrShard]) -> Self {
        let (global_dim, value_size) = shards.first().map(|s| (s.global_dim, s.value_size)).unwrap_or((0, 1));
        let entries = shards
            .iter()
            .flat_map(|s| s.cells())
            .map(|c| Triplet { row: c.row, col: c.col, value_count: c.value_count, payload: c.payload.to_vec() })
            .collect();
        DenseTriplets { global_dim, value_size, entries }
    }

    pub fn sort(&mut self) {
        self.entries.sort_by_key(|e| (e.row, e.col));
    }

    /// Swaps row and column of every entry. Payloads are untouched; the
    /// result is sorted.
    pub fn transposed(&self) -> Self {
        let mut entries: Vec<Triplet> =
            self.entries.iter().map(|e| Triplet { row: e.col, col: e.row, ..e.clone() }).collect();
        entries.sort_by_key(|e| (e.row, e.col));
        DenseTriplets { entries, ..*self }
    }

    pub fn total_values(&self) -> u64 {
        self.entries.iter().map(|e| e.value_count).sum()
    }

    /// Checks the triplet invariants: unique `(row, col)`, nonempty payload
    /// lists, uniform record size and in-range ids.
    pub fn validate(&self) -> Result<(), ShardError> {
        if self.value_size == 0 {
            return Err(ShardError::Structure("value_size must be at least 1".into()));
        }
        let mut keys: Vec<(u64, u64)> = Vec::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            if e.row >= self.global_dim || e.col >= self.global_dim {
                return Err(ShardError::Range(format!(
                    "entry {i} at ({}, {}) outside {}x{}",
                    e.row, e.col, self.global_dim, self.global_dim
                )));
            }
            if e.value_count == 0 {
                return Err(ShardError::Structure(format!("entry {i} at ({}, {}) has no values", e.row, e.col)));
            }
            if e.payload.len() as u128 != e.value_count as u128 * self.value_size as u128 {
                return Err(ShardError::Structure(format!(
                    "entry {i} at ({}, {}) payload is {} bytes, expected {} x {}",
                    e.row,
                    e.col,
                    e.payload.len(),
                    e.value_count,
                    self.value_size
                )));
            }
            keys.push((e.row, e.col));
        }
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            return Err(ShardError::Structure(format!("duplicate cell ({}, {})", w[0].0, w[0].1)));
        }
        Ok(())
    }

    /// Encodes the entries as one canonical shard owning
    /// `[major_start, major_start + major_count)` along the axis named by
    /// `view`.
    pub fn to_shard(&self, view: View, major_start: u64, major_count: u64) -> Result<XcsrShard, ShardError> {
        self.validate()?;
        let end = major_start.checked_add(major_count).filter(|&e| e <= self.global_dim).ok_or_else(|| {
            ShardError::Range(format!(
                "interval [{major_start}, {major_start}+{major_count}) exceeds global_dim {}",
                self.global_dim
            ))
        })?;
        let mut sorted: Vec<&Triplet> = self.entries.iter().collect();
        sorted.sort_by_key(|e| (e.row, e.col));
        let mut arrays = CellArrays::default();
        for e in sorted {
            let owned = match view {
                View::RowView => e.row,
                View::ColumnView => e.col,
            };
            if owned < major_start || owned >= end {
                return Err(ShardError::Range(format!(
                    "cell ({}, {}) outside owned interval [{major_start}, {end})",
                    e.row, e.col
                )));
            }
            arrays.push(e.row, e.col, e.value_count, &e.payload);
        }
        Ok(arrays.into_shard(view, self.global_dim, major_start, major_count, self.value_size))
    }
}

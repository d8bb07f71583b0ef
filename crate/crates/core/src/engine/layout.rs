use super::EngineError;
use crate::collectives::{decode_u64, CollectiveError, Communicator};

/// Global row ownership: rank `r` owns `[offsets[r], offsets[r + 1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankLayout {
    offsets: Vec<u64>,
}

impl RankLayout {
    /// Builds the layout from per-rank row counts (exclusive prefix sums).
    pub fn from_counts(counts: &[u64]) -> Result<RankLayout, EngineError> {
        if counts.is_empty() {
            return Err(EngineError::Layout("a layout needs at least one rank".into()));
        }
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0u64;
        offsets.push(0);
        for &c in counts {
            acc = acc.checked_add(c).ok_or_else(|| EngineError::Layout("row counts overflow u64".into()))?;
            offsets.push(acc);
        }
        Ok(RankLayout { offsets })
    }

    pub fn from_offsets(offsets: Vec<u64>) -> Result<RankLayout, EngineError> {
        if offsets.len() < 2 || offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(EngineError::Layout(format!("offsets {offsets:?} are not a partition")));
        }
        Ok(RankLayout { offsets })
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn ranks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn global_dim(&self) -> u64 {
        *self.offsets.last().expect("nonempty offsets")
    }

    /// `(start, count)` of the interval owned by `rank`.
    pub fn interval(&self, rank: usize) -> (u64, u64) {
        let start = self.offsets[rank];
        (start, self.offsets[rank + 1] - start)
    }

    /// The unique rank whose interval contains `global_id`. Empty intervals
    /// never match.
    pub fn owner_of(&self, global_id: u64) -> Result<usize, EngineError> {
        if global_id >= self.global_dim() {
            return Err(EngineError::Layout(format!("id {global_id} outside [0, {})", self.global_dim())));
        }
        // Last rank whose start is <= id; empty ranks share a start with
        // their successor and are skipped by taking the last one.
        Ok(self.offsets.partition_point(|&o| o <= global_id) - 1)
    }
}

/// Splits `global_dim` rows over `ranks`; the first `global_dim % ranks`
/// ranks get one extra row.
pub fn even_split(global_dim: u64, ranks: usize) -> RankLayout {
    assert!(ranks >= 1);
    let base = global_dim / ranks as u64;
    let extra = (global_dim % ranks as u64) as usize;
    let counts: Vec<u64> = (0..ranks).map(|r| base + u64::from(r < extra)).collect();
    RankLayout::from_counts(&counts).expect("counts sum to global_dim")
}

/// Gathers every rank's row count and derives the layout.
///
/// The gathered record also carries `global_dim` and `value_size` so that
/// misconfigured shards fail here rather than mid-transpose. Exactly one
/// allgather is issued.
pub fn compute_rank_layout<C: Communicator + ?Sized>(
    comm: &mut C,
    local_row_count: u64,
    global_dim: u64,
    value_size: u64,
) -> Result<RankLayout, EngineError> {
    let mut record = Vec::with_capacity(24);
    record.extend_from_slice(&local_row_count.to_le_bytes());
    record.extend_from_slice(&global_dim.to_le_bytes());
    record.extend_from_slice(&value_size.to_le_bytes());
    let gathered = comm.allgather(&record)?;

    let mut counts = Vec::with_capacity(gathered.len());
    for (rank, r) in gathered.iter().enumerate() {
        if r.len() != 24 {
            return Err(
                CollectiveError::size_mismatch(format!("layout record from rank {rank} is {} bytes", r.len())).into()
            );
        }
        let (count, dim, vsize) = (decode_u64(&r[0..8])?, decode_u64(&r[8..16])?, decode_u64(&r[16..24])?);
        if dim != global_dim || vsize != value_size {
            return Err(EngineError::Layout(format!(
                "rank {rank} has global_dim {dim} / value_size {vsize}, rank {} has {global_dim} / {value_size}",
                comm.rank()
            )));
        }
        counts.push(count);
    }
    let layout = RankLayout::from_counts(&counts)?;
    if layout.global_dim() != global_dim {
        return Err(EngineError::Layout(format!(
            "row counts sum to {} but global_dim is {global_dim}",
            layout.global_dim()
        )));
    }
    Ok(layout)
}

use std::cmp::Ordering;
use std::fmt;

use super::OracleError;
use crate::xcsr::{DenseTriplets, Triplet, XcsrShard};

const REPORTED_MISMATCHES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MismatchKind {
    /// Expected but absent from the shards.
    Missing,
    /// Present in the shards but not expected.
    Unexpected,
    ValueCount {
        expected: u64,
        found: u64,
    },
    /// Same value count, different bytes; `first_byte` is the first
    /// differing offset within the cell payload.
    Payload {
        first_byte: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMismatch {
    pub row: u64,
    pub col: u64,
    pub kind: MismatchKind,
}

impl fmt::Display for CellMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cell ({}, {}): ", self.row, self.col)?;
        match &self.kind {
            MismatchKind::Missing => write!(f, "missing"),
            MismatchKind::Unexpected => write!(f, "unexpected"),
            MismatchKind::ValueCount { expected, found } => {
                write!(f, "{found} values, expected {expected}")
            }
            MismatchKind::Payload { first_byte } => write!(f, "payload differs at byte {first_byte}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchReport {
    pub matched: bool,
    pub cells_expected: usize,
    pub cells_found: usize,
    pub mismatch_count: usize,
    /// The first few mismatches in `(row, col)` order.
    pub mismatches: Vec<CellMismatch>,
}

impl fmt::Display for MatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.matched {
            return write!(f, "match: {} cells", self.cells_found);
        }
        write!(
            f,
            "mismatch: {} differing cells ({} expected, {} found)",
            self.mismatch_count, self.cells_expected, self.cells_found
        )?;
        for m in &self.mismatches {
            write!(f, "\n  {m}")?;
        }
        Ok(())
    }
}

fn owned_interval(s: &XcsrShard) -> (u64, u64) {
    (s.major_start, s.major_end())
}

/// Checks that shards share dimensions and view and own disjoint intervals.
pub(crate) fn check_partition(shards: &[XcsrShard]) -> Result<(), OracleError> {
    let Some(first) = shards.first() else {
        return Ok(());
    };
    for (i, s) in shards.iter().enumerate() {
        if (s.global_dim, s.value_size, s.view) != (first.global_dim, first.value_size, first.view) {
            return Err(OracleError::Partition(format!(
                "shard {i} has dim {} / value_size {} / {:?}, shard 0 has {} / {} / {:?}",
                s.global_dim, s.value_size, s.view, first.global_dim, first.value_size, first.view
            )));
        }
        s.ensure_valid()?;
    }
    let mut intervals: Vec<(u64, u64, usize)> =
        shards.iter().enumerate().map(|(i, s)| (owned_interval(s).0, owned_interval(s).1, i)).collect();
    intervals.sort_unstable();
    for w in intervals.windows(2) {
        let (_, end_a, a) = w[0];
        let (start_b, end_b, b) = w[1];
        if start_b < end_a && start_b < end_b {
            return Err(OracleError::Partition(format!("shards {a} and {b} own overlapping intervals")));
        }
    }
    Ok(())
}

/// Gathers the shards and compares their cells against `expected`.
pub fn gather_and_compare(shards: &[XcsrShard], expected: &DenseTriplets) -> Result<MatchReport, OracleError> {
    check_partition(shards)?;
    if let Some(s) = shards.first() {
        if s.global_dim != expected.global_dim {
            return Err(OracleError::Partition(format!(
                "shards have global_dim {}, expected dataset has {}",
                s.global_dim, expected.global_dim
            )));
        }
    }
    let mut found = DenseTriplets::from_shards(shards);
    found.sort();
    let mut want: Vec<&Triplet> = expected.entries.iter().collect();
    want.sort_by_key(|e| (e.row, e.col));

    let mut mismatches = Vec::new();
    let mut count = 0usize;
    let mut record = |row, col, kind| {
        count += 1;
        if mismatches.len() < REPORTED_MISMATCHES {
            mismatches.push(CellMismatch { row, col, kind });
        }
    };
    let (mut i, mut j) = (0, 0);
    while i < want.len() || j < found.entries.len() {
        let order = match (want.get(i), found.entries.get(j)) {
            (Some(a), Some(b)) => (a.row, a.col).cmp(&(b.row, b.col)),
            (Some(_), None) => Ordering::Less,
            (None, _) => Ordering::Greater,
        };
        match order {
            Ordering::Less => {
                record(want[i].row, want[i].col, MismatchKind::Missing);
                i += 1;
            }
            Ordering::Greater => {
                let b = &found.entries[j];
                record(b.row, b.col, MismatchKind::Unexpected);
                j += 1;
            }
            Ordering::Equal => {
                let (a, b) = (want[i], &found.entries[j]);
                if a.value_count != b.value_count {
                    record(a.row, a.col, MismatchKind::ValueCount { expected: a.value_count, found: b.value_count });
                } else if a.payload != b.payload {
                    let first_byte = a.payload.iter().zip(&b.payload).position(|(x, y)| x != y).unwrap_or(0);
                    record(a.row, a.col, MismatchKind::Payload { first_byte });
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(MatchReport {
        matched: count == 0,
        cells_expected: want.len(),
        cells_found: found.entries.len(),
        mismatch_count: count,
        mismatches,
    })
}

/// Whether a set of shards covers `[0, global_dim)` exactly.
pub(crate) fn covers(shards: &[XcsrShard]) -> bool {
    let Some(first) = shards.first() else {
        return false;
    };
    let mut iv: Vec<_> = shards.iter().map(owned_interval).collect();
    iv.sort_unstable();
    let mut at = 0;
    for (s, e) in iv {
        if s != at {
            return false;
        }
        at = e;
    }
    at == first.global_dim
}

use serde::{Deserialize, Serialize};

use super::{DatasetRng, OracleError};
use crate::engine::even_split;
use crate::xcsr::{DenseTriplets, Triplet, View, XcsrShard};

/// How cells are laid out per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GenMode {
    /// Per-row column count uniform in `[cols_min, cols_max]`; per-cell
    /// value count `1 + Poisson(value_count_mean - 1)`.
    Heterogeneous { cols_min: u64, cols_max: u64, value_count_mean: f64 },
    /// Exactly `cols` cells per row and `values` values per cell.
    Balanced { cols: u64, values: u64 },
}

/// Parameters of a generated square matrix split over `ranks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub mode: GenMode,
    pub global_dim: u64,
    pub ranks: usize,
    pub value_size: u64,
    pub seed: u64,
}

impl GenSpec {
    pub fn balanced(global_dim: u64, ranks: usize, cols: u64, values: u64, value_size: u64, seed: u64) -> Self {
        GenSpec { mode: GenMode::Balanced { cols, values }, global_dim, ranks, value_size, seed }
    }

    pub fn heterogeneous(
        global_dim: u64,
        ranks: usize,
        cols_min: u64,
        cols_max: u64,
        value_count_mean: f64,
        value_size: u64,
        seed: u64,
    ) -> Self {
        GenSpec {
            mode: GenMode::Heterogeneous { cols_min, cols_max, value_count_mean },
            global_dim,
            ranks,
            value_size,
            seed,
        }
    }

    pub fn check(&self) -> Result<(), OracleError> {
        let fail = |m: String| Err(OracleError::Config(m));
        if self.ranks == 0 {
            return fail("ranks must be at least 1".into());
        }
        if self.value_size == 0 {
            return fail("value_size must be at least 1".into());
        }
        match self.mode {
            GenMode::Balanced { cols, values } => {
                if cols > self.global_dim {
                    return fail(format!("{cols} cells per row exceed global_dim {}", self.global_dim));
                }
                if values == 0 {
                    return fail("values per cell must be at least 1".into());
                }
            }
            GenMode::Heterogeneous { cols_min, cols_max, value_count_mean } => {
                if cols_min > cols_max {
                    return fail(format!("cols_min {cols_min} > cols_max {cols_max}"));
                }
                if cols_max > self.global_dim {
                    return fail(format!("cols_max {cols_max} exceeds global_dim {}", self.global_dim));
                }
                if !(value_count_mean >= 1.0 && value_count_mean.is_finite()) {
                    return fail(format!("mean value count {value_count_mean} must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

/// A generated dataset: the per-rank shards and the same content as triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub shards: Vec<XcsrShard>,
    pub triplets: DenseTriplets,
}

/// Generates a row-view dataset deterministically from `spec`.
///
/// Rows are drawn in global order from one [`DatasetRng`] stream: the
/// row's cell count, its sorted distinct columns, then for each cell its
/// value count and payload bytes. Rows are then split evenly over ranks.
pub fn generate(spec: &GenSpec) -> Result<Dataset, OracleError> {
    spec.check()?;
    let mut rng = DatasetRng::new(spec.seed);
    let mut triplets = DenseTriplets::new(spec.global_dim, spec.value_size);
    for row in 0..spec.global_dim {
        let ncols = match spec.mode {
            GenMode::Balanced { cols, .. } => cols,
            GenMode::Heterogeneous { cols_min, cols_max, .. } => rng.between(cols_min, cols_max),
        };
        for col in rng.sample_sorted(spec.global_dim, ncols) {
            let value_count = match spec.mode {
                GenMode::Balanced { values, .. } => values,
                GenMode::Heterogeneous { value_count_mean, .. } => 1 + rng.poisson(value_count_mean - 1.0),
            };
            let mut payload = vec![0u8; (value_count * spec.value_size) as usize];
            rng.fill(&mut payload);
            triplets.entries.push(Triplet { row, col, value_count, payload });
        }
    }
    let shards = partition_rows(&triplets, spec.ranks)?;
    Ok(Dataset { shards, triplets })
}

/// Splits row-sorted triplets into evenly sized row-view shards.
pub fn partition_rows(t: &DenseTriplets, ranks: usize) -> Result<Vec<XcsrShard>, OracleError> {
    if ranks == 0 {
        return Err(OracleError::Config("ranks must be at least 1".into()));
    }
    let layout = even_split(t.global_dim, ranks);
    let mut sorted = t.clone();
    sorted.sort();
    let mut shards = Vec::with_capacity(ranks);
    let mut rest = sorted.entries.as_slice();
    for rank in 0..ranks {
        let (start, count) = layout.interval(rank);
        let split = rest.partition_point(|e| e.row < start + count);
        let part = DenseTriplets { entries: rest[..split].to_vec(), ..DenseTriplets::new(t.global_dim, t.value_size) };
        rest = &rest[split..];
        shards.push(part.to_shard(View::RowView, start, count)?);
    }
    Ok(shards)
}

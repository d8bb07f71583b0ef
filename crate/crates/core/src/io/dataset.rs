use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{read_shard, write_shard, FormatError};
use crate::oracle::{check_partition, covers, partition_rows, GenSpec, OracleError};
use crate::xcsr::{DenseTriplets, View, XcsrShard};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: manifest: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
    #[error("partition: {0}")]
    Partition(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// JSON description of a dataset stored as one file per rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub ranks: usize,
    pub global_dim: u64,
    pub value_size: u64,
    pub view: View,
    /// Transposes applied since generation; parity decides what a verifier
    /// expects.
    pub transposes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<GenSpec>,
    /// Shard files, indexed by rank, relative to the manifest's directory.
    pub files: Vec<String>,
}

impl Manifest {
    pub fn file_name(name: &str) -> String {
        format!("{name}.manifest.json")
    }

    pub fn load(path: &Path) -> Result<Manifest, DatasetError> {
        let f = File::open(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
        serde_json::from_reader(BufReader::new(f))
            .map_err(|source| DatasetError::Manifest { path: path.into(), source })
    }

    pub fn store(&self, path: &Path) -> Result<(), DatasetError> {
        let f = File::create(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
        let mut w = BufWriter::new(f);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|source| DatasetError::Manifest { path: path.into(), source })?;
        std::io::Write::write_all(&mut w, b"\n").map_err(|source| DatasetError::Io { path: path.into(), source })
    }

    pub fn shard_paths(&self, manifest_path: &Path) -> Vec<PathBuf> {
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        self.files.iter().map(|f| dir.join(f)).collect()
    }
}

/// `<dataset>.r<rank>.xcsr`
pub fn shard_file_name(dataset: &str, rank: usize) -> String {
    format!("{dataset}.r{rank}.xcsr")
}

pub fn write_shard_file(shard: &XcsrShard, path: &Path) -> Result<u64, DatasetError> {
    let f = File::create(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
    write_shard(shard, BufWriter::new(f)).map_err(|source| DatasetError::Format { path: path.into(), source })
}

/// Reads a shard file; trailing bytes after the shard are corruption.
pub fn read_shard_file(path: &Path) -> Result<XcsrShard, DatasetError> {
    let f = File::open(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
    let mut r = BufReader::new(f);
    let shard = read_shard(&mut r).map_err(|source| DatasetError::Format { path: path.into(), source })?;
    let mut probe = [0u8; 1];
    let extra = r.read(&mut probe).map_err(|source| DatasetError::Io { path: path.into(), source })?;
    if extra != 0 {
        return Err(DatasetError::Format {
            path: path.into(),
            source: FormatError::Corrupt("trailing bytes after shard".into()),
        });
    }
    Ok(shard)
}

/// Writes one file per shard plus `<name>.manifest.json` into `dir` and
/// returns the manifest path.
pub fn write_dataset(
    dir: &Path,
    name: &str,
    shards: &[XcsrShard],
    spec: Option<GenSpec>,
    transposes: u64,
) -> Result<PathBuf, DatasetError> {
    check_partition(shards)?;
    let first = shards.first().ok_or_else(|| DatasetError::Partition("a dataset needs at least one shard".into()))?;
    std::fs::create_dir_all(dir).map_err(|source| DatasetError::Io { path: dir.into(), source })?;
    let mut files = Vec::with_capacity(shards.len());
    for (rank, shard) in shards.iter().enumerate() {
        let file = shard_file_name(name, rank);
        write_shard_file(shard, &dir.join(&file))?;
        files.push(file);
    }
    let manifest = Manifest {
        name: name.to_string(),
        ranks: shards.len(),
        global_dim: first.global_dim,
        value_size: first.value_size,
        view: first.view,
        transposes,
        spec,
        files,
    };
    let path = dir.join(Manifest::file_name(name));
    manifest.store(&path)?;
    Ok(path)
}

/// Loads the manifest and every shard it lists, in rank order.
pub fn load_dataset(manifest_path: &Path) -> Result<(Manifest, Vec<XcsrShard>), DatasetError> {
    let manifest = Manifest::load(manifest_path)?;
    if manifest.files.len() != manifest.ranks {
        return Err(DatasetError::Partition(format!(
            "manifest lists {} files for {} ranks",
            manifest.files.len(),
            manifest.ranks
        )));
    }
    let shards =
        manifest.shard_paths(manifest_path).iter().map(|p| read_shard_file(p)).collect::<Result<Vec<_>, _>>()?;
    for (rank, s) in shards.iter().enumerate() {
        if (s.global_dim, s.value_size, s.view) != (manifest.global_dim, manifest.value_size, manifest.view) {
            return Err(DatasetError::Partition(format!(
                "shard {rank} does not match the manifest's dimensions or view"
            )));
        }
    }
    Ok((manifest, shards))
}

/// Splits `t` into `ranks` even row-view shards and writes them as
/// `<name>.r<rank>.xcsr` files.
pub fn partition_dataset(
    t: &DenseTriplets,
    ranks: usize,
    dir: &Path,
    name: &str,
) -> Result<Vec<PathBuf>, DatasetError> {
    let shards = partition_rows(t, ranks)?;
    std::fs::create_dir_all(dir).map_err(|source| DatasetError::Io { path: dir.into(), source })?;
    let mut paths = Vec::with_capacity(ranks);
    for (rank, s) in shards.iter().enumerate() {
        let path = dir.join(shard_file_name(name, rank));
        write_shard_file(s, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Merges shards that exactly cover `[0, global_dim)` back into sorted
/// triplets.
pub fn merge_shards(shards: &[XcsrShard]) -> Result<DenseTriplets, DatasetError> {
    check_partition(shards)?;
    if !covers(shards) {
        return Err(DatasetError::Partition("shard intervals leave gaps".into()));
    }
    let mut t = DenseTriplets::from_shards(shards);
    t.sort();
    Ok(t)
}

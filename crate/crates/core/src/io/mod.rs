//! Binary shard files and dataset manifests.

mod dataset;
mod format;

pub use dataset::{
    load_dataset, merge_shards, partition_dataset, read_shard_file, shard_file_name, write_dataset, write_shard_file,
    DatasetError, Manifest,
};
pub use format::{read_shard, write_shard, FormatError, XcsrFileHeader, FORMAT_VERSION, HEADER_LEN, MAGIC};

//! Writes a shard to the binary format, decodes its header, and reads it back.

use xcsr::io::{read_shard, write_shard, XcsrFileHeader, HEADER_LEN};
use xcsr::oracle::{generate, GenSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&GenSpec::balanced(16, 2, 3, 2, 4, 9))?;
    let shard = &data.shards[1];

    let mut bytes = Vec::new();
    let n = write_shard(shard, &mut bytes)?;
    println!("rank 1 shard: {n} bytes");

    let header = XcsrFileHeader::decode(bytes[..HEADER_LEN].try_into()?)?;
    println!("{header:#?}");

    let back = read_shard(bytes.as_slice())?;
    assert_eq!(&back, shard);

    bytes[0] = b'Y';
    println!("corrupted magic: {}", read_shard(bytes.as_slice()).unwrap_err());
    Ok(())
}

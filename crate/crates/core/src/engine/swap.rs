use super::{build_send_plan, compute_rank_layout, EngineError, RankLayout};
use crate::collectives::{alltoall_u64, CollectiveError, Communicator};
use crate::xcsr::{local_transpose, reorder_received, CellMeta, XcsrShard};

fn check_shard_matches_layout<C: Communicator + ?Sized>(
    shard: &XcsrShard,
    layout: &RankLayout,
    comm: &C,
) -> Result<(), EngineError> {
    if layout.ranks() != comm.size() {
        return Err(EngineError::Layout(format!(
            "layout has {} ranks, communicator has {}",
            layout.ranks(),
            comm.size()
        )));
    }
    let (start, count) = layout.interval(comm.rank());
    if (shard.major_start, shard.major_count) != (start, count) || shard.global_dim != layout.global_dim() {
        return Err(EngineError::Layout(format!(
            "rank {} shard owns [{}, +{}) of {}, layout assigns [{start}, +{count}) of {}",
            comm.rank(),
            shard.major_start,
            shard.major_count,
            shard.global_dim,
            layout.global_dim()
        )));
    }
    Ok(())
}

/// Moves every cell to the rank owning it in the orthogonal view while
/// keeping the global matrix contents.
///
/// Two communication steps: cell counts (dense) then cell metadata
/// (variable), followed by value byte counts (dense) then values (variable).
/// The received cells are put back into row-column order and the view flips.
pub fn view_swap<C: Communicator + ?Sized>(
    shard: &XcsrShard,
    layout: &RankLayout,
    comm: &mut C,
) -> Result<XcsrShard, EngineError> {
    shard.ensure_valid()?;
    check_shard_matches_layout(shard, layout, comm)?;

    let plan = build_send_plan(shard, layout)?;
    let cell_counts = plan.cell_counts();
    let byte_counts = plan.value_byte_counts();
    let (meta_bufs, value_bufs) = plan.into_buffers();

    let incoming_cells = alltoall_u64(comm, &cell_counts)?;
    let incoming_meta = comm.alltoallv(meta_bufs)?;
    let incoming_bytes = alltoall_u64(comm, &byte_counts)?;
    let incoming_values = comm.alltoallv(value_bufs)?;

    let mut arrivals: Vec<CellMeta> = Vec::with_capacity(incoming_cells.iter().sum::<u64>() as usize);
    let mut chunks: Vec<&[u8]> = Vec::with_capacity(arrivals.capacity());
    for src in 0..comm.size() {
        let metas = CellMeta::decode_all(&incoming_meta[src])
            .filter(|m| m.len() as u64 == incoming_cells[src])
            .ok_or_else(|| {
                CollectiveError::protocol(format!(
                    "rank {src} announced {} cells but sent {} metadata bytes",
                    incoming_cells[src],
                    incoming_meta[src].len()
                ))
            })?;
        let values = &incoming_values[src];
        let announced: u128 = metas.iter().map(|m| m.value_count as u128).sum::<u128>() * shard.value_size as u128;
        if values.len() as u64 != incoming_bytes[src] || values.len() as u128 != announced {
            return Err(CollectiveError::protocol(format!(
                "rank {src} sent {} value bytes, announced {} and metadata implies {announced}",
                values.len(),
                incoming_bytes[src]
            ))
            .into());
        }
        let mut offset = 0usize;
        for m in metas {
            let len = (m.value_count * shard.value_size) as usize;
            chunks.push(&values[offset..offset + len]);
            offset += len;
            arrivals.push(m);
        }
    }

    let arrays = reorder_received(&arrivals, &chunks, &arrivals, shard.value_size)?;
    let out = arrays.into_shard(
        shard.view.flipped(),
        shard.global_dim,
        shard.major_start,
        shard.major_count,
        shard.value_size,
    );
    let violations = out.validate();
    if !violations.is_empty() {
        return Err(
            CollectiveError::protocol(format!("received cells do not form a valid shard: {}", violations[0])).into()
        );
    }
    Ok(out)
}

/// Transposes the distributed matrix: local transpose, then view swap.
/// Issues two dense and two variable all-to-all calls.
pub fn distributed_transpose<C: Communicator + ?Sized>(
    shard: &XcsrShard,
    layout: &RankLayout,
    comm: &mut C,
) -> Result<XcsrShard, EngineError> {
    check_shard_matches_layout(shard, layout, comm)?;
    let local = local_transpose(shard)?;
    view_swap(&local, layout, comm)
}

/// One rank's transpose driver. The rank layout is gathered once, on
/// construction, and reused for every transpose.
pub struct Transposer<C> {
    comm: C,
    layout: RankLayout,
}

impl<C: Communicator> Transposer<C> {
    pub fn new(mut comm: C, shard: &XcsrShard) -> Result<Self, EngineError> {
        let layout = compute_rank_layout(&mut comm, shard.major_count, shard.global_dim, shard.value_size)?;
        check_shard_matches_layout(shard, &layout, &comm)?;
        Ok(Transposer { comm, layout })
    }

    pub fn layout(&self) -> &RankLayout {
        &self.layout
    }

    pub fn comm(&self) -> &C {
        &self.comm
    }

    pub fn into_comm(self) -> C {
        self.comm
    }

    pub fn transpose(&mut self, shard: &XcsrShard) -> Result<XcsrShard, EngineError> {
        distributed_transpose(shard, &self.layout, &mut self.comm)
    }

    pub fn view_swap(&mut self, shard: &XcsrShard) -> Result<XcsrShard, EngineError> {
        view_swap(shard, &self.layout, &mut self.comm)
    }

    /// Applies `times` chained transposes.
    pub fn transpose_n(&mut self, shard: &XcsrShard, times: usize) -> Result<XcsrShard, EngineError> {
        let mut current = shard.clone();
        for _ in 0..times {
            current = self.transpose(&current)?;
        }
        Ok(current)
    }
}

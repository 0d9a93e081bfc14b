use super::{check_sink, RoundCtx, RoundOutcome, TopologyGraph};
use crate::error::Result;
use crate::netmodel::{FusedPacket, Network};

/// Greedy nearest-neighbor chain over the alive nodes.
///
/// Starts at the node farthest from `sink`; ties pick the lowest id.
pub fn build_chain(net: &Network, sink: usize) -> Vec<usize> {
    let mut remaining: Vec<usize> = net.alive_ids().collect();
    let Some(start) = remaining.iter().copied().reduce(|best, id| {
        if net.distance(id, sink) > net.distance(best, sink) {
            id
        } else {
            best
        }
    }) else {
        return Vec::new();
    };
    let mut chain = Vec::with_capacity(remaining.len());
    remaining.retain(|&id| id != start);
    chain.push(start);
    while !remaining.is_empty() {
        let last = *chain.last().expect("chain is non-empty");
        let (slot, _) = remaining
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bs, bd), (k, &id)| {
                let d = net.distance(last, id);
                if d < bd {
                    (k, d)
                } else {
                    (bs, bd)
                }
            });
        chain.push(remaining.remove(slot));
    }
    chain
}

/// One PEGASIS round: data is fused hop by hop from both chain ends towards the sink.
pub fn pegasis_round(net: &mut Network, sink: usize, round: usize) -> Result<(TopologyGraph, RoundOutcome)> {
    check_sink(net, sink)?;
    let alive_at_start = net.alive_count();
    let chain = build_chain(net, sink);
    let leader = chain
        .iter()
        .position(|&id| id == sink)
        .expect("sink is alive and on the chain");

    let mut topo = TopologyGraph::new(round + 1, sink);
    let mut ctx = RoundCtx::new(net);
    let left = carry_along(&mut ctx, chain[..leader].iter().copied(), &mut topo);
    let right = carry_along(&mut ctx, chain[leader + 1..].iter().rev().copied(), &mut topo);

    let mut sink_packet = FusedPacket::single(&ctx.net.field, sink);
    for (from, payload) in [left, right].into_iter().flatten() {
        if ctx.deliver(from, sink, &payload, &mut sink_packet) {
            topo.add_edge(from, sink);
        }
    }
    ctx.settle_deaths(false);
    Ok((topo, ctx.finish(sink, sink_packet, alive_at_start)))
}

/// Passes the fused packet along `segment`; returns the last holder and its packet.
fn carry_along(
    ctx: &mut RoundCtx<'_>,
    segment: impl Iterator<Item = usize>,
    topo: &mut TopologyGraph,
) -> Option<(usize, FusedPacket)> {
    let mut carry: Option<(usize, FusedPacket)> = None;
    for id in segment {
        if !ctx.alive(id) {
            if carry.take().is_some() {
                ctx.lost_packets += 1;
            }
            continue;
        }
        let mut own = FusedPacket::single(&ctx.net.field, id);
        if let Some((from, payload)) = carry.take() {
            if ctx.deliver(from, id, &payload, &mut own) {
                topo.add_edge(from, id);
            }
        }
        carry = if ctx.alive(id) {
            Some((id, own))
        } else {
            ctx.lost_packets += 1;
            None
        };
    }
    carry
}

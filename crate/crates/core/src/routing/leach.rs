use rand::Rng;

use super::omrp::route_clusters;
use super::{
    charge_cluster_setup, check_sink, elect_cluster_heads, form_clusters, RoundCtx, RoundOutcome, TopologyGraph,
};
use crate::error::Result;
use crate::netmodel::Network;

/// One LEACH round: plain threshold election, id-ordered slots, heads send straight to the sink.
pub fn leach_round<R: Rng>(
    net: &mut Network,
    sink: usize,
    round: usize,
    rng: &mut R,
) -> Result<(TopologyGraph, RoundOutcome)> {
    check_sink(net, sink)?;
    let alive_at_start = net.alive_count();
    let heads = elect_cluster_heads(net, round, 1.0, rng);
    let clusters = form_clusters(net, &heads, sink);

    let mut topo = TopologyGraph::new(round + 1, sink);
    topo.cluster_heads = heads.clone();
    let mut ctx = RoundCtx::new(net);
    charge_cluster_setup(&mut ctx, &heads, &clusters);
    let sink_packet = route_clusters(&mut ctx, &clusters, &[], sink, &mut topo);
    topo.clusters = clusters;
    ctx.settle_deaths(false);
    Ok((topo, ctx.finish(sink, sink_packet, alive_at_start)))
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    charge_cluster_setup, check_sink, elect_cluster_heads, form_clusters, gather_cluster, Cluster, RelayAgreement,
    RoundCtx, RoundOutcome, TopologyGraph,
};
use crate::config::NetworkConfig;
use crate::error::Result;
use crate::netmodel::{FusedPacket, Network};

/// Feature toggles. Disabling both with unit amplification reduces OMRP to LEACH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmrpOptions {
    /// Allow one-hop relaying between cluster heads.
    pub relay: bool,
    /// Order TDMA slots by descending overlap degree instead of by id.
    pub overlap_sort: bool,
    /// Overrides the configured amplification factor.
    pub amplification: Option<f64>,
}

impl Default for OmrpOptions {
    fn default() -> Self {
        Self {
            relay: true,
            overlap_sort: true,
            amplification: None,
        }
    }
}

/// Slot order: overlap degree descending, ties by ascending id.
pub fn tdma_fusion_order(net: &Network, members: &[usize]) -> Vec<usize> {
    let mut order = members.to_vec();
    order.sort_by(|&a, &b| {
        net.nodes[b]
            .overlap_degree
            .total_cmp(&net.nodes[a].overlap_degree)
            .then(a.cmp(&b))
    });
    order
}

/// Minimum distance gain (m²) for a relay hop to beat the direct link.
pub fn relay_threshold(config: &NetworkConfig) -> f64 {
    2.0 * config.e_elec / config.eps_fs
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelayDecision {
    Direct,
    Relay { via: usize, gain: f64 },
}

/// Next hop for cluster head `from`: the sink, or the head with the largest
/// distance gain if that gain clears [`relay_threshold`].
pub fn relay_decision(net: &Network, from: usize, heads: &[usize], sink: usize) -> RelayDecision {
    let d_is = net.distance(from, sink).powi(2);
    let mut best: Option<(usize, f64)> = None;
    for &j in heads {
        if j == from || j == sink || !net.is_alive(j) {
            continue;
        }
        let gain = d_is - (net.distance(from, j).powi(2) + net.distance(j, sink).powi(2));
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((j, gain));
        }
    }
    match best {
        Some((via, gain)) if gain > relay_threshold(&net.config) => RelayDecision::Relay { via, gain },
        _ => RelayDecision::Direct,
    }
}

/// One OMRP round towards `sink`. `round` is zero-based.
pub fn omrp_round<R: Rng>(
    net: &mut Network,
    sink: usize,
    round: usize,
    opts: &OmrpOptions,
    rng: &mut R,
) -> Result<(TopologyGraph, RoundOutcome)> {
    check_sink(net, sink)?;
    let alive_at_start = net.alive_count();
    let amplification = opts.amplification.unwrap_or(net.config.amplification);
    let heads = elect_cluster_heads(net, round, amplification, rng);
    let mut clusters = form_clusters(net, &heads, sink);
    for cluster in &mut clusters {
        cluster.members = if opts.overlap_sort {
            tdma_fusion_order(net, &cluster.members)
        } else {
            let mut m = cluster.members.clone();
            m.sort_unstable();
            m
        };
    }

    let mut relays: Vec<RelayAgreement> = Vec::new();
    if opts.relay {
        let wants: Vec<(usize, RelayDecision)> = heads
            .iter()
            .filter(|&&h| h != sink)
            .map(|&h| (h, relay_decision(net, h, &heads, sink)))
            .collect();
        let relaying: Vec<usize> = wants
            .iter()
            .filter(|(_, d)| matches!(d, RelayDecision::Relay { .. }))
            .map(|(h, _)| *h)
            .collect();
        for (h, decision) in wants {
            if let RelayDecision::Relay { via, .. } = decision {
                // A relay that forwards its own data elsewhere would form a chain; go direct instead.
                if !relaying.contains(&via) {
                    relays.push(RelayAgreement { from: h, to: via });
                }
            }
        }
    }

    let mut topo = TopologyGraph::new(round + 1, sink);
    topo.cluster_heads = heads.clone();
    let mut ctx = RoundCtx::new(net);
    charge_cluster_setup(&mut ctx, &heads, &clusters);
    let ctrl = ctx.ctrl_bits();
    for agreement in &relays {
        ctx.send(agreement.from, agreement.to, ctrl);
    }

    let sink_packet = route_clusters(&mut ctx, &clusters, &relays, sink, &mut topo);
    topo.clusters = clusters;
    topo.relays = relays;
    ctx.settle_deaths(true);
    Ok((topo, ctx.finish(sink, sink_packet, alive_at_start)))
}

/// Intra-cluster gathering followed by relay and direct hops to the sink.
pub(super) fn route_clusters(
    ctx: &mut RoundCtx<'_>,
    clusters: &[Cluster],
    relays: &[RelayAgreement],
    sink: usize,
    topo: &mut TopologyGraph,
) -> FusedPacket {
    let field_len = ctx.net.len();
    let mut held: Vec<Option<FusedPacket>> = vec![None; field_len];
    let mut sink_packet = FusedPacket::single(&ctx.net.field, sink);
    for cluster in clusters {
        let packet = gather_cluster(ctx, cluster, topo);
        if cluster.head == sink {
            if let Some(p) = packet {
                sink_packet = p;
            }
        } else {
            held[cluster.head] = packet;
        }
    }

    let mut sorted_relays = relays.to_vec();
    sorted_relays.sort_by_key(|a| a.from);
    for agreement in &sorted_relays {
        let Some(payload) = held[agreement.from].take() else {
            continue;
        };
        let Some(mut target) = held[agreement.to].take() else {
            ctx.lost_packets += 1;
            continue;
        };
        if ctx.deliver(agreement.from, agreement.to, &payload, &mut target) {
            topo.add_edge(agreement.from, agreement.to);
        }
        if ctx.alive(agreement.to) {
            held[agreement.to] = Some(target);
        } else {
            ctx.lost_packets += 1;
        }
    }

    for cluster in clusters {
        let head = cluster.head;
        if head == sink {
            continue;
        }
        let Some(payload) = held[head].take() else {
            continue;
        };
        if !ctx.alive(sink) {
            ctx.lost_packets += 1;
            continue;
        }
        if ctx.deliver(head, sink, &payload, &mut sink_packet) {
            topo.add_edge(head, sink);
        }
    }
    sink_packet
}

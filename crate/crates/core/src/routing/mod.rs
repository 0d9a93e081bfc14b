//! Hierarchical routing protocols (OMRP and the LEACH / PEGASIS baselines).
//!
//! All protocols share [`RoundCtx`], which applies the radio and fusion
//! energy model and records deaths, so the only differences between their
//! ledgers come from the topology each protocol builds.

mod election;
mod leach;
mod omrp;
mod pegasis;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use election::{ch_threshold, elect_cluster_heads};
pub use leach::leach_round;
pub use omrp::{omrp_round, relay_decision, relay_threshold, tdma_fusion_order, OmrpOptions, RelayDecision};
pub use pegasis::{build_chain, pegasis_round};

use crate::energy::{fusion_energy, rx_energy, tx_energy, EnergyClass, EnergyLedger};
use crate::error::{Error, Result};
use crate::netmodel::{FusedPacket, Network};

/// Directed link state between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum LinkState {
    /// No link.
    None = 0,
    /// The receiver forwards the data unfused.
    Forward = 1,
    /// The receiver fuses the data (the sender is in its fusion sequence).
    Fuse = 2,
}

impl From<LinkState> for u8 {
    fn from(s: LinkState) -> u8 {
        s as u8
    }
}

impl TryFrom<u8> for LinkState {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(LinkState::None),
            1 => Ok(LinkState::Forward),
            2 => Ok(LinkState::Fuse),
            other => Err(format!("invalid link state {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub state: LinkState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayAgreement {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub head: usize,
    /// Members in TDMA slot order, which is also the head's fusion sequence.
    pub members: Vec<usize>,
}

/// Routing topology of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyGraph {
    pub round: usize,
    pub sink: usize,
    #[serde(rename = "chs")]
    pub cluster_heads: Vec<usize>,
    #[serde(skip)]
    pub clusters: Vec<Cluster>,
    pub edges: Vec<Link>,
    pub relays: Vec<RelayAgreement>,
}

impl TopologyGraph {
    pub fn new(round: usize, sink: usize) -> Self {
        Self {
            round,
            sink,
            cluster_heads: Vec::new(),
            clusters: Vec::new(),
            edges: Vec::new(),
            relays: Vec::new(),
        }
    }

    /// State of the directed link `from -> to`.
    pub fn link_state(&self, from: usize, to: usize) -> LinkState {
        self.edges
            .iter()
            .find(|l| l.from == from && l.to == to)
            .map_or(LinkState::None, |l| l.state)
    }

    /// Receiver of `from`'s outgoing link, if any.
    pub fn next_hop(&self, from: usize) -> Option<usize> {
        self.edges.iter().find(|l| l.from == from).map(|l| l.to)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("topology serializes")
    }

    fn add_edge(&mut self, from: usize, to: usize) {
        self.edges.push(Link {
            from,
            to,
            state: LinkState::Fuse,
        });
    }
}

/// Energy and data outcome of one routing round (steps 1 to 4).
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub sink: usize,
    pub ledger: EnergyLedger,
    /// Data collected at the sink; empty if the sink died during the round.
    pub sink_packet: FusedPacket,
    /// Size of the fully fused packet at the sink in bits.
    pub c_sink_bits: f64,
    /// Nodes alive when the round started.
    pub alive_at_start: usize,
    /// Packets that were dropped because a node died mid-action.
    pub lost_packets: usize,
    pub deaths: Vec<usize>,
}

impl RoundOutcome {
    pub fn sink_alive(&self) -> bool {
        !self.sink_packet.is_empty()
    }
}

/// Which routing protocol drives steps 3 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Omrp(OmrpOptions),
    Leach,
    Pegasis,
}

impl Protocol {
    pub fn omrp() -> Self {
        Protocol::Omrp(OmrpOptions::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Omrp(_) => "omrp",
            Protocol::Leach => "leach",
            Protocol::Pegasis => "pegasis",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "omrp" => Some(Self::omrp()),
            "leach" => Some(Protocol::Leach),
            "pegasis" => Some(Protocol::Pegasis),
            _ => None,
        }
    }

    /// Runs one routing round towards `sink`. `round` is zero-based.
    pub fn run_round<R: Rng>(
        &self,
        net: &mut Network,
        sink: usize,
        round: usize,
        rng: &mut R,
    ) -> Result<(TopologyGraph, RoundOutcome)> {
        match self {
            Protocol::Omrp(opts) => omrp_round(net, sink, round, opts, rng),
            Protocol::Leach => leach_round(net, sink, round, rng),
            Protocol::Pegasis => pegasis_round(net, sink, round),
        }
    }
}

/// Applies the energy model during one round and tracks deaths.
pub(crate) struct RoundCtx<'a> {
    pub net: &'a mut Network,
    pub ledger: EnergyLedger,
    pub deaths: Vec<usize>,
    pub lost_packets: usize,
}

impl<'a> RoundCtx<'a> {
    pub fn new(net: &'a mut Network) -> Self {
        let n = net.len();
        Self {
            net,
            ledger: EnergyLedger::new(n),
            deaths: Vec::new(),
            lost_packets: 0,
        }
    }

    pub fn alive(&self, id: usize) -> bool {
        self.net.nodes[id].alive
    }

    pub fn l_bits(&self) -> f64 {
        self.net.config.data_packet_bits
    }

    pub fn ctrl_bits(&self) -> f64 {
        self.net.config.control_packet_bits
    }

    /// Charges `joules` to `id`; returns whether the action completed.
    pub fn charge(&mut self, id: usize, class: EnergyClass, joules: f64) -> bool {
        let charge = self.ledger.charge(&mut self.net.nodes[id], class, joules);
        if charge.died {
            self.deaths.push(id);
        }
        charge.completed
    }

    /// Point-to-point transfer. Fails if either end cannot afford its part.
    pub fn send(&mut self, from: usize, to: usize, bits: f64) -> bool {
        if !self.alive(from) || !self.alive(to) {
            return false;
        }
        let cfg = &self.net.config;
        let tx = tx_energy(bits, self.net.distance(from, to), cfg);
        let rx = rx_energy(bits, cfg);
        self.charge(from, EnergyClass::RouteTx, tx) && self.charge(to, EnergyClass::RouteRx, rx)
    }

    /// One transmission reaching the farthest recipient; each alive recipient pays reception.
    pub fn broadcast(
        &mut self,
        from: usize,
        recipients: &[usize],
        bits: f64,
        tx_class: EnergyClass,
        rx_class: EnergyClass,
    ) -> Vec<usize> {
        let targets: Vec<usize> = recipients
            .iter()
            .copied()
            .filter(|&r| r != from && self.alive(r))
            .collect();
        if targets.is_empty() || !self.alive(from) {
            return Vec::new();
        }
        let reach = targets.iter().map(|&r| self.net.distance(from, r)).fold(0.0, f64::max);
        let tx = tx_energy(bits, reach, &self.net.config);
        if !self.charge(from, tx_class, tx) {
            return Vec::new();
        }
        let rx = rx_energy(bits, &self.net.config);
        targets.into_iter().filter(|&r| self.charge(r, rx_class, rx)).collect()
    }

    /// Fuses `incoming` into `packet` held by `at`, charging the fusion cost.
    pub fn fuse(&mut self, at: usize, packet: &mut FusedPacket, incoming: &FusedPacket) -> bool {
        let l = self.l_bits();
        let cost = fusion_energy(packet.bits(l), incoming.bits(l), &self.net.config);
        if !self.charge(at, EnergyClass::Fusion, cost) {
            return false;
        }
        packet.merge(&self.net.field, incoming);
        true
    }

    /// Sends a whole packet `from -> to` and fuses it there.
    ///
    /// Returns false (and counts the packet as lost) if any step fails.
    pub fn deliver(&mut self, from: usize, to: usize, payload: &FusedPacket, into: &mut FusedPacket) -> bool {
        let bits = payload.bits(self.l_bits());
        let ok = self.send(from, to, bits) && self.fuse(to, into, payload);
        if !ok {
            self.lost_packets += 1;
        }
        ok
    }

    /// Processes deaths: neighbor lists and overlap degrees are refreshed, and
    /// with `notify` every alive neighbor receives an SLP_notify control packet.
    pub fn settle_deaths(&mut self, notify: bool) {
        let mut cursor = 0;
        while cursor < self.deaths.len() {
            let dead = self.deaths[cursor];
            cursor += 1;
            self.net.refresh_after_death(dead);
            if notify {
                let rx = rx_energy(self.ctrl_bits(), &self.net.config);
                let listeners: Vec<usize> = self.net.nodes[dead].neighbor_ids.clone();
                for j in listeners {
                    if self.alive(j) {
                        self.charge(j, EnergyClass::RouteRx, rx);
                    }
                }
            }
        }
    }

    pub fn finish(self, sink: usize, sink_packet: FusedPacket, alive_at_start: usize) -> RoundOutcome {
        let sink_packet = if self.net.nodes[sink].alive {
            sink_packet
        } else {
            FusedPacket::empty(&self.net.field)
        };
        let c_sink_bits = sink_packet.bits(self.net.config.data_packet_bits);
        RoundOutcome {
            sink,
            ledger: self.ledger,
            sink_packet,
            c_sink_bits,
            alive_at_start,
            lost_packets: self.lost_packets,
            deaths: self.deaths,
        }
    }
}

pub(crate) fn check_sink(net: &Network, sink: usize) -> Result<()> {
    if sink >= net.len() || !net.nodes[sink].alive {
        return Err(Error::DeadSink(sink));
    }
    Ok(())
}

/// Nearest cluster head for every alive node that is neither a head nor the sink.
///
/// Ties go to the lowest head id.
pub fn form_clusters(net: &Network, heads: &[usize], sink: usize) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = heads
        .iter()
        .map(|&h| Cluster {
            head: h,
            members: Vec::new(),
        })
        .collect();
    if clusters.is_empty() {
        return clusters;
    }
    for id in net.alive_ids() {
        if id == sink || heads.contains(&id) {
            continue;
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, &h) in heads.iter().enumerate() {
            let d = net.distance(id, h);
            if d < best_d || (d == best_d && h < heads[best]) {
                best = c;
                best_d = d;
            }
        }
        clusters[best].members.push(id);
    }
    clusters
}

/// Control-plane charges shared by the clustered protocols: CH_notify, JOIN_IN and the TDMA schedule.
pub(crate) fn charge_cluster_setup(ctx: &mut RoundCtx<'_>, heads: &[usize], clusters: &[Cluster]) {
    let ctrl = ctx.ctrl_bits();
    let listeners: Vec<usize> = ctx.net.alive_ids().filter(|id| !heads.contains(id)).collect();
    for &h in heads {
        ctx.broadcast(h, &listeners, ctrl, EnergyClass::RouteTx, EnergyClass::RouteRx);
    }
    for cluster in clusters {
        for &m in &cluster.members {
            ctx.send(m, cluster.head, ctrl);
        }
    }
    for cluster in clusters {
        ctx.broadcast(
            cluster.head,
            &cluster.members,
            ctrl,
            EnergyClass::RouteTx,
            EnergyClass::RouteRx,
        );
    }
}

/// Intra-cluster data phase: members transmit in slot order and the head fuses.
///
/// Returns the fused packet held by the head, or `None` if the head died.
pub(crate) fn gather_cluster(
    ctx: &mut RoundCtx<'_>,
    cluster: &Cluster,
    topo: &mut TopologyGraph,
) -> Option<FusedPacket> {
    if !ctx.alive(cluster.head) {
        return None;
    }
    let mut packet = FusedPacket::single(&ctx.net.field, cluster.head);
    for &m in &cluster.members {
        if !ctx.alive(m) {
            continue;
        }
        let single = FusedPacket::single(&ctx.net.field, m);
        if ctx.deliver(m, cluster.head, &single, &mut packet) {
            topo.add_edge(m, cluster.head);
        }
        if !ctx.alive(cluster.head) {
            ctx.lost_packets += 1;
            return None;
        }
    }
    Some(packet)
}

#[cfg(test)]
mod tests;

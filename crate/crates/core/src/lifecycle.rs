//! Full mission rounds over a network lifetime: sink selection, routing,
//! synchronisation and CB uplink, with per-round metric records.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::{cb_energy, link_budget, sample_phase_errors, CbSelection, LinkBudget};
use crate::config::NetworkConfig;
use crate::energy::{rx_energy, tx_energy, EnergyClass, EnergyLedger};
use crate::env::policy::{candidates, scripted_scores, top_k, ScriptedPolicy};
use crate::error::{Error, Result};
use crate::netmodel::Network;
use crate::rng::{stream, Stream};
use crate::routing::{Protocol, RoundCtx, RoundOutcome, TopologyGraph};

/// How the per-round sink is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinkPolicy {
    /// Alive node with the most residual energy, lowest id on ties.
    #[default]
    MaxEnergy,
    Random,
    /// Always this node while it lives, then the max-energy rule.
    Fixed(usize),
}

impl SinkPolicy {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "max_energy" => Some(SinkPolicy::MaxEnergy),
            "random" => Some(SinkPolicy::Random),
            other => other
                .strip_prefix("fixed:")
                .and_then(|id| id.parse().ok())
                .map(SinkPolicy::Fixed),
        }
    }
}

/// Picks the round's sink, or `None` if every node is dead.
pub fn select_sink<R: Rng>(net: &Network, policy: SinkPolicy, rng: &mut R) -> Option<usize> {
    let alive: Vec<usize> = net.alive_ids().collect();
    if alive.is_empty() {
        return None;
    }
    match policy {
        SinkPolicy::Random => Some(alive[rng.gen_range(0..alive.len())]),
        SinkPolicy::Fixed(id) if id < net.len() && net.is_alive(id) => Some(id),
        SinkPolicy::Fixed(_) | SinkPolicy::MaxEnergy => alive.into_iter().reduce(|best, id| {
            if net.nodes[id].residual_energy > net.nodes[best].residual_energy {
                id
            } else {
                best
            }
        }),
    }
}

/// CB node-selection policy for lifetime runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CbPolicy {
    /// Routing only: no synchronisation or CB uplink.
    None,
    Scripted(ScriptedPolicy),
    /// Selections come from an external agent through the environment.
    External,
}

impl CbPolicy {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "none" => Some(CbPolicy::None),
            "external" => Some(CbPolicy::External),
            other => ScriptedPolicy::parse(other).map(CbPolicy::Scripted),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CbPolicy::None => "none",
            CbPolicy::External => "external",
            CbPolicy::Scripted(p) => p.name(),
        }
    }

    pub fn uses_cb(&self) -> bool {
        !matches!(self, CbPolicy::None)
    }
}

/// Result of synchronisation plus the CB uplink.
#[derive(Debug, Clone)]
pub struct CbOutcome {
    /// The sink plus the requested helpers, in id order.
    pub chosen: Vec<usize>,
    /// Nodes that actually transmitted.
    pub selection: CbSelection,
    pub budget: Option<LinkBudget>,
    pub delivered_bits: f64,
    pub ledger: EnergyLedger,
    pub deaths: Vec<usize>,
}

/// One completed mission round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// One-based round number.
    pub round: usize,
    /// Alive nodes after the round.
    pub alive: usize,
    pub c_sink_bits: f64,
    pub delivered_bits: f64,
    /// Energy per class, in [`EnergyClass::ALL`] order.
    pub energy: [f64; 6],
    pub sink: usize,
    pub chs: usize,
    pub selection: Vec<usize>,
}

impl RoundRecord {
    pub fn energy_total(&self) -> f64 {
        self.energy.iter().sum()
    }
}

pub const TRACE_HEADER: &str =
    "round,alive,c_sink_bits,delivered_bits,route_tx,route_rx,fusion,cb_tx,sync_rx,sync_broadcast,sink,chs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub node_count: usize,
    pub initial_energy: f64,
    pub records: Vec<RoundRecord>,
    /// Number of the last executed round (0 if none ran).
    pub terminal_round: usize,
    /// Residual energy of every node at the end.
    pub final_residual: Vec<f64>,
}

impl EpisodeTrace {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in &self.records {
            write!(
                out,
                "{},{},{:e},{:e}",
                r.round, r.alive, r.c_sink_bits, r.delivered_bits
            )?;
            for e in r.energy {
                write!(out, ",{e:e}")?;
            }
            writeln!(out, ",{},{}", r.sink, r.chs)?;
        }
        Ok(())
    }

    pub fn total_energy(&self) -> f64 {
        self.records.iter().map(RoundRecord::energy_total).sum()
    }
}

/// A lifetime threshold round; `reached` is false when the run ended first
/// and `round` then holds the terminal round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestone {
    pub round: usize,
    pub reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeMetrics {
    pub fnd: Milestone,
    pub hnd: Milestone,
    pub and: Milestone,
    /// First round at which the dead fraction reaches `death_fraction`.
    pub f1: Milestone,
    /// Total bits delivered to the base station.
    pub f2: f64,
    pub terminal_round: usize,
    pub throughput: Vec<f64>,
}

pub fn lifetime_metrics(trace: &EpisodeTrace, death_fraction: f64) -> LifetimeMetrics {
    let n = trace.node_count;
    let milestone = |pred: &dyn Fn(usize) -> bool| {
        trace
            .records
            .iter()
            .find(|r| pred(r.alive))
            .map(|r| Milestone {
                round: r.round,
                reached: true,
            })
            .unwrap_or(Milestone {
                round: trace.terminal_round,
                reached: false,
            })
    };
    let dead_needed = (death_fraction * n as f64).ceil() as usize;
    LifetimeMetrics {
        fnd: milestone(&|alive| alive < n),
        hnd: milestone(&|alive| 2 * alive <= n),
        and: milestone(&|alive| alive == 0),
        f1: milestone(&|alive| n - alive >= dead_needed.max(1)),
        f2: trace.records.iter().map(|r| r.delivered_bits).sum(),
        terminal_round: trace.terminal_round,
        throughput: trace.records.iter().map(|r| r.delivered_bits).collect(),
    }
}

/// Result of the routing half of a round.
#[derive(Debug, Clone)]
pub struct RoutedRound {
    pub topology: TopologyGraph,
    pub outcome: RoundOutcome,
}

/// Stepwise driver shared by the lifetime runner and the environment.
#[derive(Debug)]
pub struct Simulation {
    pub net: Network,
    pub protocol: Protocol,
    pub sink_policy: SinkPolicy,
    /// Zero-based index of the next routing round.
    next_round: usize,
    election_rng: ChaCha8Rng,
    sink_rng: ChaCha8Rng,
    phase_rng: ChaCha8Rng,
}

impl Simulation {
    pub fn new(net: Network, protocol: Protocol, sink_policy: SinkPolicy, seed: u64) -> Self {
        Self {
            net,
            protocol,
            sink_policy,
            next_round: 0,
            election_rng: stream(seed, Stream::Election),
            sink_rng: stream(seed, Stream::SinkPolicy),
            phase_rng: stream(seed, Stream::PhaseError),
        }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.net.config
    }

    /// Number of routing rounds run so far.
    pub fn rounds_run(&self) -> usize {
        self.next_round
    }

    /// Steps 1 to 4: choose the sink and route every packet to it.
    pub fn route(&mut self) -> Result<RoutedRound> {
        let sink = select_sink(&self.net, self.sink_policy, &mut self.sink_rng).ok_or(Error::NetworkDead)?;
        let (topology, outcome) =
            self.protocol
                .run_round(&mut self.net, sink, self.next_round, &mut self.election_rng)?;
        self.next_round += 1;
        Ok(RoutedRound { topology, outcome })
    }

    /// Steps 5 and 6: synchronise `helpers` with the sink and transmit the fused packet.
    pub fn beamform(&mut self, sink: usize, c_sink_bits: f64, helpers: &[usize]) -> CbOutcome {
        let notify = matches!(self.protocol, Protocol::Omrp(_));
        let sink_beamforms = self.net.config.sink_beamforms;
        let mut chosen: Vec<usize> = helpers.iter().copied().filter(|&h| h != sink).collect();
        chosen.push(sink);
        chosen.sort_unstable();
        chosen.dedup();
        let mut ctx = RoundCtx::new(&mut self.net);
        let mut empty = CbOutcome {
            chosen: chosen.clone(),
            selection: CbSelection::unit(Vec::new(), sink),
            budget: None,
            delivered_bits: 0.0,
            ledger: EnergyLedger::new(0),
            deaths: Vec::new(),
        };
        if c_sink_bits <= 0.0 || !ctx.alive(sink) {
            empty.ledger = ctx.ledger;
            return empty;
        }

        let payload = c_sink_bits + ctx.ctrl_bits();
        let synced = ctx.broadcast(sink, helpers, payload, EnergyClass::SyncBroadcast, EnergyClass::SyncRx);
        let mut array: Vec<usize> = synced;
        if sink_beamforms && ctx.alive(sink) {
            array.push(sink);
            array.sort_unstable();
        }
        if !ctx.alive(sink) || array.is_empty() {
            ctx.settle_deaths(notify);
            empty.deaths = ctx.deaths;
            empty.ledger = ctx.ledger;
            return empty;
        }

        let config = ctx.net.config.clone();
        let errors = match config.phase_kappa {
            Some(kappa) => sample_phase_errors(array.len(), kappa, &mut self.phase_rng),
            None => vec![0.0; array.len()],
        };
        let positions: Vec<_> = array.iter().map(|&id| ctx.net.nodes[id].position).collect();
        let weights = vec![1.0; array.len()];
        let planned = link_budget(&positions, &weights, &errors, &config).expect("array is non-empty");
        let (per_node, _) = cb_energy(&weights, c_sink_bits, planned.rate_bps, &config);

        // Nodes that cannot finish the transmission drop out of the array.
        let mut kept = Vec::with_capacity(array.len());
        for (k, &id) in array.iter().enumerate() {
            if ctx.charge(id, EnergyClass::CbTx, per_node[k]) {
                kept.push(k);
            }
        }
        let budget = if kept.is_empty() {
            None
        } else if kept.len() == array.len() {
            Some(planned)
        } else {
            let pos: Vec<_> = kept.iter().map(|&k| positions[k]).collect();
            let errs: Vec<f64> = kept.iter().map(|&k| errors[k]).collect();
            Some(link_budget(&pos, &vec![1.0; kept.len()], &errs, &config).expect("array is non-empty"))
        };
        let delivered_bits = match budget {
            Some(b) if b.delivered => c_sink_bits,
            _ => 0.0,
        };
        ctx.settle_deaths(notify);
        CbOutcome {
            chosen,
            selection: CbSelection::unit(kept.iter().map(|&k| array[k]).collect(), sink),
            budget,
            delivered_bits,
            ledger: ctx.ledger,
            deaths: ctx.deaths,
        }
    }
}

/// Energy of a routing round (and optional CB phase) per class.
fn class_energy(routing: &EnergyLedger, cb: Option<&EnergyLedger>) -> [f64; 6] {
    let mut out = routing.class_totals();
    if let Some(cb) = cb {
        for (a, b) in out.iter_mut().zip(cb.class_totals()) {
            *a += b;
        }
    }
    out
}

pub(crate) fn record_round(
    routed: &RoutedRound,
    cb: Option<&CbOutcome>,
    alive: usize,
    routing_only: bool,
) -> RoundRecord {
    let outcome = &routed.outcome;
    let delivered_bits = match cb {
        Some(cb) => cb.delivered_bits,
        None if routing_only => outcome.c_sink_bits,
        None => 0.0,
    };
    RoundRecord {
        round: routed.topology.round,
        alive,
        c_sink_bits: outcome.c_sink_bits,
        delivered_bits,
        energy: class_energy(&outcome.ledger, cb.map(|c| &c.ledger)),
        sink: outcome.sink,
        chs: routed.topology.cluster_heads.len(),
        selection: cb.map(|c| c.chosen.clone()).unwrap_or_default(),
    }
}

/// Whether the run is over after a round leaving `alive` nodes.
pub fn is_terminal(alive: usize, cb_mode: bool, config: &NetworkConfig) -> bool {
    if cb_mode {
        alive < config.n_cb
    } else {
        // A lone node has no links left and spends nothing, so the state is stationary.
        alive <= 1
    }
}

/// Runs a network from full batteries until termination.
pub fn simulate_network(
    net: Network,
    protocol: Protocol,
    cb_policy: CbPolicy,
    sink_policy: SinkPolicy,
    seed: u64,
) -> Result<EpisodeTrace> {
    let policy = match cb_policy {
        CbPolicy::External => {
            return Err(Error::invalid(
                "cb_policy",
                "external selections need the environment server",
            ));
        }
        CbPolicy::None => None,
        CbPolicy::Scripted(p) => Some(p),
    };
    net.config.validate()?;
    let node_count = net.len();
    let initial_energy = net.config.initial_energy;
    let max_rounds = net.config.max_rounds;
    let mut sim = Simulation::new(net, protocol, sink_policy, seed);
    let mut policy_rng = stream(seed, Stream::CbPolicy);
    let mut records = Vec::new();

    let cb_mode = policy.is_some();
    let mut alive = sim.net.alive_count();
    while !is_terminal(alive, cb_mode, sim.config()) && records.len() < max_rounds {
        let routed = sim.route()?;
        let cb = policy.map(|p| {
            let sink = routed.outcome.sink;
            let helpers = if sim.net.is_alive(sink) {
                let scores = scripted_scores(p, &sim.net, sink, &mut policy_rng);
                top_k(&scores, &candidates(&sim.net, sink), sim.config().n_cb - 1)
            } else {
                Vec::new()
            };
            sim.beamform(sink, routed.outcome.c_sink_bits, &helpers)
        });
        alive = sim.net.alive_count();
        records.push(record_round(&routed, cb.as_ref(), alive, !cb_mode));
    }
    Ok(EpisodeTrace {
        node_count,
        initial_energy,
        terminal_round: records.len(),
        records,
        final_residual: sim.net.nodes.iter().map(|n| n.residual_energy).collect(),
    })
}

/// Generates a field from `seed` and runs it to termination.
pub fn simulate_lifetime(
    config: &NetworkConfig,
    protocol: Protocol,
    cb_policy: CbPolicy,
    seed: u64,
) -> Result<EpisodeTrace> {
    config.validate()?;
    simulate_network(
        Network::generate(config.clone(), seed),
        protocol,
        cb_policy,
        SinkPolicy::MaxEnergy,
        seed,
    )
}

/// Cost of a sync broadcast from `sink` to `helpers` (helpers pay reception).
pub fn sync_cost(net: &Network, sink: usize, helpers: &[usize], c_sink_bits: f64) -> (f64, f64) {
    let bits = c_sink_bits + net.config.control_packet_bits;
    let reach = helpers.iter().map(|&h| net.distance(sink, h)).fold(0.0, f64::max);
    (tx_energy(bits, reach, &net.config), rx_energy(bits, &net.config))
}

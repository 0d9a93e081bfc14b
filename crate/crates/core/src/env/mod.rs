//! The CB node-selection task as a reset/step environment.

pub mod policy;
pub mod protocol;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::lifecycle::{is_terminal, record_round, RoundRecord, RoutedRound, Simulation, SinkPolicy};
use crate::netmodel::Network;
use crate::rng::{stream, Stream};
use crate::routing::Protocol;

use policy::{candidates, clamp_scores, gumbel_top_k};

/// Per-node features, in id order: residual energy and distance to the
/// current sink, then optionally every (x, y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub Vec<f64>);

impl Observation {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn energy(&self, id: usize) -> f64 {
        self.0[2 * id]
    }

    pub fn distance(&self, id: usize) -> f64 {
        self.0[2 * id + 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub delivered_bits: f64,
    pub selection: Vec<usize>,
    pub alive: usize,
    /// One-based number of the round whose CB phase this step ran.
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

struct Episode {
    sim: Simulation,
    /// Routing round awaiting its CB phase.
    pending: Option<RoutedRound>,
    /// Total residual at the previous decision point.
    residual_mark: f64,
    selection_rng: ChaCha8Rng,
    records: Vec<RoundRecord>,
    done: bool,
}

/// Reset/step wrapper around [`Simulation`].
pub struct CbEnv {
    config: NetworkConfig,
    positions: Option<Vec<Point>>,
    protocol: Protocol,
    episode: Option<Episode>,
}

impl CbEnv {
    pub fn new(config: NetworkConfig, protocol: Protocol) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            positions: None,
            protocol,
            episode: None,
        })
    }

    /// Uses fixed node positions instead of a seeded random field.
    pub fn with_positions(mut self, positions: Vec<Point>) -> Result<Self> {
        if positions.len() != self.config.node_count {
            return Err(Error::invalid(
                "node_count",
                format!(
                    "{} positions supplied for {} nodes",
                    positions.len(),
                    self.config.node_count
                ),
            ));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn node_count(&self) -> usize {
        self.config.node_count
    }

    pub fn obs_dim(&self) -> usize {
        let per_node = if self.config.obs_include_positions { 4 } else { 2 };
        per_node * self.config.node_count
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_none_or(|e| e.done)
    }

    /// Rounds completed in the current episode.
    pub fn records(&self) -> &[RoundRecord] {
        self.episode.as_ref().map_or(&[], |e| &e.records)
    }

    pub fn network(&self) -> Option<&Network> {
        self.episode.as_ref().map(|e| &e.sim.net)
    }

    /// Fresh field from `seed`, then the first routing round.
    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        let net = match &self.positions {
            Some(p) => Network::from_positions(self.config.clone(), p.clone(), seed),
            None => Network::generate(self.config.clone(), seed),
        };
        let residual_mark = net.total_residual();
        let mut sim = Simulation::new(net, self.protocol, SinkPolicy::MaxEnergy, seed);
        let routed = sim.route()?;
        let mut episode = Episode {
            sim,
            pending: Some(routed),
            residual_mark,
            selection_rng: stream(seed, Stream::Selection),
            records: Vec::new(),
            done: false,
        };
        episode.done = is_terminal(episode.sim.net.alive_count(), true, &self.config);
        let obs = observe(&episode, &self.config);
        self.episode = Some(episode);
        Ok(obs)
    }

    /// Applies one score vector: CB for the pending round, then the next routing round.
    pub fn step(&mut self, action: &[f64]) -> Result<Transition> {
        let config = self.config.clone();
        let episode = self
            .episode
            .as_mut()
            .ok_or_else(|| Error::Protocol("step before reset".into()))?;
        if episode.done {
            return Err(Error::Protocol("episode is done; reset first".into()));
        }
        if action.len() != config.node_count {
            return Err(Error::Protocol(format!(
                "action has {} scores, expected {}",
                action.len(),
                config.node_count
            )));
        }
        let routed = episode.pending.take().expect("active episode has a pending round");
        let sink = routed.outcome.sink;
        let scores = clamp_scores(action);
        let helpers = if episode.sim.net.is_alive(sink) {
            let pool = candidates(&episode.sim.net, sink);
            gumbel_top_k(
                &scores,
                &pool,
                config.n_cb - 1,
                config.selection_temperature,
                &mut episode.selection_rng,
            )
        } else {
            Vec::new()
        };
        let cb = episode.sim.beamform(sink, routed.outcome.c_sink_bits, &helpers);
        let alive = episode.sim.net.alive_count();
        let record = record_round(&routed, Some(&cb), alive, false);
        let delivered = record.delivered_bits;
        let round = record.round;
        episode.records.push(record);

        let mut done = is_terminal(alive, true, &config) || episode.records.len() >= config.max_rounds;
        if !done {
            let next = episode.sim.route()?;
            episode.pending = Some(next);
            done = is_terminal(episode.sim.net.alive_count(), true, &config);
        }
        episode.done = done;

        let residual = episode.sim.net.total_residual();
        let consumed = episode.residual_mark - residual;
        episode.residual_mark = residual;
        let reward = config.zeta1() * delivered - config.zeta2() * consumed;
        Ok(Transition {
            observation: observe(episode, &config),
            reward,
            done,
            info: StepInfo {
                delivered_bits: delivered,
                selection: cb.chosen,
                alive: episode.sim.net.alive_count(),
                round,
            },
        })
    }

    /// Sink of the round awaiting its CB phase.
    pub fn pending_sink(&self) -> Option<usize> {
        self.episode.as_ref()?.pending.as_ref().map(|r| r.outcome.sink)
    }
}

fn observe(episode: &Episode, config: &NetworkConfig) -> Observation {
    let net = &episode.sim.net;
    let sink = episode.pending.as_ref().map(|r| r.outcome.sink);
    let mut values = Vec::with_capacity(4 * net.len());
    for node in &net.nodes {
        if node.alive {
            values.push(node.residual_energy);
            values.push(sink.map_or(-1.0, |s| net.distance(node.id, s)));
        } else {
            values.push(0.0);
            values.push(-1.0);
        }
    }
    if config.obs_include_positions {
        for node in &net.nodes {
            values.push(node.position.x);
            values.push(node.position.y);
        }
    }
    Observation(values)
}

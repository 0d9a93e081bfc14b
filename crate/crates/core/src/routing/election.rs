//! Cluster-head election with overlap amplification.

use rand::Rng;

use crate::config::NetworkConfig;
use crate::netmodel::{Network, NodeState};

/// Election threshold of `node`, `round` rounds into the current epoch.
///
/// Nodes outside the candidate set get 0. `amplification` is the base of
/// the overlap term; 1 recovers the plain LEACH threshold.
pub fn ch_threshold(node: &NodeState, round: usize, config: &NetworkConfig, amplification: f64) -> f64 {
    if !node.alive || !node.in_candidate_set {
        return 0.0;
    }
    let p = config.ch_ratio;
    let phase = (round % config.epoch_len()) as f64;
    let denom = 1.0 - p * phase;
    let base = if denom <= 0.0 { 1.0 } else { p / denom };
    (base * amplification.powf(node.overlap_degree)).min(1.0)
}

/// Elects the round's cluster heads and updates candidate-set membership.
///
/// The candidate set is refilled with every alive node when an epoch of
/// `epoch_len` rounds ends, or earlier once fewer candidates remain than
/// one round's share of heads (`ch_ratio` of the alive nodes). The
/// threshold phase counts rounds since that refill.
///
/// One uniform draw is consumed per alive node in id order, whether or not
/// it is a candidate, so two protocols fed the same stream stay aligned.
/// If nobody is elected, the alive node with the highest threshold (lowest
/// id on ties) is forced.
pub fn elect_cluster_heads<R: Rng>(net: &mut Network, round: usize, amplification: f64, rng: &mut R) -> Vec<usize> {
    let alive = net.alive_count();
    let candidates = net.nodes.iter().filter(|n| n.alive && n.in_candidate_set).count();
    let share = ((net.config.ch_ratio * alive as f64).ceil() as usize).max(1);
    let exhausted = candidates < share;
    if round == 0 || round < net.epoch_start || round - net.epoch_start >= net.config.epoch_len() || exhausted {
        net.epoch_start = round;
        for node in net.nodes.iter_mut() {
            node.in_candidate_set = node.alive;
        }
    }
    let phase = round - net.epoch_start;
    let mut heads = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for id in 0..net.len() {
        if !net.nodes[id].alive {
            continue;
        }
        let t = ch_threshold(&net.nodes[id], phase, &net.config, amplification);
        let draw: f64 = rng.gen();
        if draw < t {
            heads.push(id);
        }
        if best.is_none_or(|(_, bt)| t > bt) {
            best = Some((id, t));
        }
    }
    if heads.is_empty() {
        if let Some((id, _)) = best {
            heads.push(id);
        }
    }
    for node in net.nodes.iter_mut().filter(|n| n.alive) {
        node.rounds_since_ch += 1;
    }
    for &h in &heads {
        net.nodes[h].in_candidate_set = false;
        net.nodes[h].rounds_since_ch = 0;
    }
    heads
}

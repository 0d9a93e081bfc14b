//! Turning score vectors into CB node selections, plus the scripted policies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::netmodel::Network;

/// Built-in selection heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedPolicy {
    Random,
    EnergyGreedy,
    DistanceGreedy,
}

impl ScriptedPolicy {
    pub const ALL: [ScriptedPolicy; 3] = [
        ScriptedPolicy::Random,
        ScriptedPolicy::EnergyGreedy,
        ScriptedPolicy::DistanceGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScriptedPolicy::Random => "random",
            ScriptedPolicy::EnergyGreedy => "energy_greedy",
            ScriptedPolicy::DistanceGreedy => "distance_greedy",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Alive non-sink nodes eligible to join the array, in id order.
pub fn candidates(net: &Network, sink: usize) -> Vec<usize> {
    let reach = net.config.d_max.unwrap_or(f64::INFINITY);
    net.alive_ids()
        .filter(|&id| id != sink && net.distance(id, sink) <= reach)
        .collect()
}

/// Scores for `policy`, one per node; dead nodes score 0.
///
/// Greedy policies score by rank so that deterministic top-k picks exactly
/// the nodes the heuristic names, ties going to the lowest id.
pub fn scripted_scores<R: Rng>(policy: ScriptedPolicy, net: &Network, sink: usize, rng: &mut R) -> Vec<f64> {
    let mut scores = vec![0.0; net.len()];
    let alive: Vec<usize> = net.alive_ids().collect();
    match policy {
        ScriptedPolicy::Random => {
            for &id in &alive {
                scores[id] = rng.gen::<f64>();
            }
        }
        ScriptedPolicy::EnergyGreedy => {
            let mut order = alive;
            order.sort_by(|&a, &b| {
                net.nodes[b]
                    .residual_energy
                    .total_cmp(&net.nodes[a].residual_energy)
                    .then(a.cmp(&b))
            });
            rank_scores(&order, &mut scores);
        }
        ScriptedPolicy::DistanceGreedy => {
            let mut order = alive;
            order.sort_by(|&a, &b| net.distance(a, sink).total_cmp(&net.distance(b, sink)).then(a.cmp(&b)));
            rank_scores(&order, &mut scores);
        }
    }
    scores
}

fn rank_scores(order: &[usize], scores: &mut [f64]) {
    let n = order.len() as f64;
    for (rank, &id) in order.iter().enumerate() {
        scores[id] = (n - rank as f64) / n;
    }
}

/// Clamps every score into [0, 1]; non-finite values become 0.
pub fn clamp_scores(scores: &[f64]) -> Vec<f64> {
    scores
        .iter()
        .map(|&v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 })
        .collect()
}

/// The `k` highest-scoring candidates; ties go to the lowest id.
pub fn top_k(scores: &[f64], candidates: &[usize], k: usize) -> Vec<usize> {
    let mut ranked = candidates.to_vec();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ranked.truncate(k);
    ranked.sort_unstable();
    ranked
}

/// Samples `k` candidates without replacement from softmax(scores / temperature).
///
/// Uses Gumbel perturbations, one uniform draw per candidate in the given order.
pub fn gumbel_top_k<R: Rng>(
    scores: &[f64],
    candidates: &[usize],
    k: usize,
    temperature: f64,
    rng: &mut R,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = candidates
        .iter()
        .map(|&id| {
            let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let gumbel = -(-u.ln()).ln();
            (scores[id] / temperature + gumbel, id)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut chosen: Vec<usize> = keyed.into_iter().take(k).map(|(_, id)| id).collect();
    chosen.sort_unstable();
    chosen
}

/// Softmax selection probabilities over `candidates` (first draw).
pub fn softmax(scores: &[f64], candidates: &[usize], temperature: f64) -> Vec<f64> {
    let max = candidates
        .iter()
        .map(|&id| scores[id])
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = candidates
        .iter()
        .map(|&id| ((scores[id] - max) / temperature).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

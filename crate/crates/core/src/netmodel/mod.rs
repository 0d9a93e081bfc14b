//! Node field, neighbor lists and overlap bookkeeping.

mod coverage;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use coverage::{fused_size_update, fusion_rate, CoverageField, FusedPacket};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: usize,
    pub position: Point,
    pub residual_energy: f64,
    pub alive: bool,
    /// Alive nodes closer than 2r.
    pub neighbor_ids: Vec<usize>,
    /// Fraction of the monitoring disk covered by alive neighbors.
    pub overlap_degree: f64,
    pub rounds_since_ch: usize,
    /// Membership of the CH candidate set G.
    pub in_candidate_set: bool,
}

/// Draws `node_count` positions uniformly over the configured region.
pub fn random_positions(config: &NetworkConfig, seed: u64) -> Vec<Point> {
    let mut rng = stream(seed, Stream::Placement);
    (0..config.node_count)
        .map(|_| {
            let x = rng.gen::<f64>() * config.region_width;
            let y = rng.gen::<f64>() * config.region_height;
            Point::new(x, y)
        })
        .collect()
}

/// Builds the coverage field and fresh node states for given positions.
pub fn build_field(config: &NetworkConfig, positions: Vec<Point>, seed: u64) -> (CoverageField, Vec<NodeState>) {
    let field = CoverageField::new(positions, config.monitor_radius, config.mc_samples, seed);
    let nodes = (0..field.len())
        .map(|id| NodeState {
            id,
            position: field.position(id),
            residual_energy: config.initial_energy,
            alive: true,
            neighbor_ids: field.geometric_neighbors(id).to_vec(),
            overlap_degree: field.overlap_degree(id, |_| true),
            rounds_since_ch: 0,
            in_candidate_set: true,
        })
        .collect();
    (field, nodes)
}

/// Uniform random deployment.
pub fn generate_field(config: &NetworkConfig, seed: u64) -> (CoverageField, Vec<NodeState>) {
    build_field(config, random_positions(config, seed), seed)
}

#[derive(Debug, Deserialize)]
struct PositionRow {
    id: usize,
    x: f64,
    y: f64,
}

/// Reads node positions from a CSV with header `id,x,y` (meters).
///
/// Ids must be exactly `0..n` in any order.
pub fn read_positions_csv(path: impl AsRef<Path>) -> Result<Vec<Point>> {
    let reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    parse_positions(reader)
}

pub fn parse_positions<R: std::io::Read>(mut reader: csv::Reader<R>) -> Result<Vec<Point>> {
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "x", "y"] {
        return Err(Error::Positions(format!(
            "expected header `id,x,y`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows: Vec<PositionRow> = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    rows.sort_by_key(|r| r.id);
    let mut out = Vec::with_capacity(rows.len());
    for (expected, row) in rows.into_iter().enumerate() {
        if row.id != expected {
            return Err(Error::Positions(format!(
                "ids must be 0..n without gaps; missing or duplicate id near {expected}"
            )));
        }
        if !row.x.is_finite() || !row.y.is_finite() {
            return Err(Error::Positions(format!("non-finite coordinate for id {}", row.id)));
        }
        out.push(Point::new(row.x, row.y));
    }
    if out.is_empty() {
        return Err(Error::Positions("no nodes".into()));
    }
    Ok(out)
}

/// Mutable network state: immutable geometry plus per-node energy and roles.
#[derive(Debug)]
pub struct Network {
    pub config: NetworkConfig,
    pub field: CoverageField,
    pub nodes: Vec<NodeState>,
    /// Round at which the CH candidate set was last refilled.
    pub epoch_start: usize,
}

impl Network {
    pub fn generate(config: NetworkConfig, seed: u64) -> Self {
        let (field, nodes) = generate_field(&config, seed);
        Self {
            config,
            field,
            nodes,
            epoch_start: 0,
        }
    }

    pub fn from_positions(config: NetworkConfig, positions: Vec<Point>, seed: u64) -> Self {
        let (field, nodes) = build_field(&config, positions, seed);
        Self {
            config,
            field,
            nodes,
            epoch_start: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_alive(&self, id: usize) -> bool {
        self.nodes[id].alive
    }

    pub fn alive_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(|n| n.alive).map(|n| n.id)
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn total_residual(&self) -> f64 {
        self.nodes.iter().map(|n| n.residual_energy).sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.field.distance(i, j)
    }

    /// Drops `dead` from its former neighbors' lists and recomputes their overlap degree.
    pub fn refresh_after_death(&mut self, dead: usize) {
        let former: Vec<usize> = self.field.geometric_neighbors(dead).to_vec();
        for j in former {
            if !self.nodes[j].alive {
                continue;
            }
            self.nodes[j].neighbor_ids.retain(|&m| m != dead);
            self.nodes[j].overlap_degree = {
                let nodes = &self.nodes;
                self.field.overlap_degree(j, |m| nodes[m].alive)
            };
        }
    }

    /// Overlap degree recomputed from scratch against the current alive set.
    pub fn fresh_overlap_degree(&self, id: usize) -> f64 {
        self.field.overlap_degree(id, |m| self.nodes[m].alive)
    }
}

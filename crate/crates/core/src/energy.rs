//! First-order radio model, fusion cost and the per-node energy ledger.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::netmodel::NodeState;

/// Energy to transmit `bits` over `distance` meters.
pub fn tx_energy(bits: f64, distance: f64, config: &NetworkConfig) -> f64 {
    let electronics = bits * config.e_elec;
    if distance < config.d0() {
        electronics + bits * config.eps_fs * distance * distance
    } else {
        electronics + bits * config.eps_amp * distance.powi(4)
    }
}

pub fn rx_energy(bits: f64, config: &NetworkConfig) -> f64 {
    bits * config.e_elec
}

/// Cost of fusing two packets of `c1` and `c2` bits.
pub fn fusion_energy(c1: f64, c2: f64, config: &NetworkConfig) -> f64 {
    config.fusion_cost * (c1 + c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyClass {
    RouteTx,
    RouteRx,
    Fusion,
    CbTx,
    SyncRx,
    SyncBroadcast,
}

impl EnergyClass {
    pub const ALL: [EnergyClass; 6] = [
        EnergyClass::RouteTx,
        EnergyClass::RouteRx,
        EnergyClass::Fusion,
        EnergyClass::CbTx,
        EnergyClass::SyncRx,
        EnergyClass::SyncBroadcast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EnergyClass::RouteTx => "route_tx",
            EnergyClass::RouteRx => "route_rx",
            EnergyClass::Fusion => "fusion",
            EnergyClass::CbTx => "cb_tx",
            EnergyClass::SyncRx => "sync_rx",
            EnergyClass::SyncBroadcast => "sync_broadcast",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EnergyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a single charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Charge {
    /// Joules actually removed from the battery.
    pub consumed: f64,
    /// The node could afford the whole action.
    pub completed: bool,
    /// The node died on this charge.
    pub died: bool,
}

/// Per-node accumulators for every consumption class.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    per_node: Vec<[f64; 6]>,
}

impl EnergyLedger {
    pub fn new(node_count: usize) -> Self {
        Self {
            per_node: vec![[0.0; 6]; node_count],
        }
    }

    /// Debits `joules` from `node`, flooring the battery at zero.
    ///
    /// A node that cannot afford the action spends what it has, dies, and the
    /// action is reported as not completed. Dead nodes are never charged.
    pub fn charge(&mut self, node: &mut NodeState, class: EnergyClass, joules: f64) -> Charge {
        debug_assert!(joules >= 0.0);
        if !node.alive {
            return Charge {
                consumed: 0.0,
                completed: false,
                died: false,
            };
        }
        let before = node.residual_energy;
        let completed = joules <= before;
        let after = if completed { before - joules } else { 0.0 };
        node.residual_energy = after;
        let died = after <= 0.0;
        if died {
            node.residual_energy = 0.0;
            node.alive = false;
        }
        let consumed = before - node.residual_energy;
        self.per_node[node.id][class.index()] += consumed;
        Charge {
            consumed,
            completed,
            died,
        }
    }

    pub fn node_class(&self, id: usize, class: EnergyClass) -> f64 {
        self.per_node[id][class.index()]
    }

    pub fn node_total(&self, id: usize) -> f64 {
        self.per_node[id].iter().sum()
    }

    pub fn class_total(&self, class: EnergyClass) -> f64 {
        self.per_node.iter().map(|row| row[class.index()]).sum()
    }

    pub fn total(&self) -> f64 {
        self.per_node.iter().map(|row| row.iter().sum::<f64>()).sum()
    }

    pub fn class_totals(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for row in &self.per_node {
            for (acc, v) in out.iter_mut().zip(row) {
                *acc += v;
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.per_node.len()
    }

    /// Adds every entry of `other` into `self`.
    pub fn absorb(&mut self, other: &EnergyLedger) {
        for (row, add) in self.per_node.iter_mut().zip(&other.per_node) {
            for (a, b) in row.iter_mut().zip(add) {
                *a += b;
            }
        }
    }

    /// Non-zero entries as `(node_id, class, joules)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, EnergyClass, f64)> + '_ {
        self.per_node.iter().enumerate().flat_map(|(id, row)| {
            EnergyClass::ALL
                .iter()
                .filter(move |c| row[c.index()] != 0.0)
                .map(move |&c| (id, c, row[c.index()]))
        })
    }

    /// Writes `round,node_id,event_class,joules` rows.
    pub fn write_csv_rows<W: std::io::Write>(&self, round: usize, out: &mut W) -> std::io::Result<()> {
        for (id, class, joules) in self.entries() {
            writeln!(out, "{round},{id},{class},{joules:e}")?;
        }
        Ok(())
    }
}

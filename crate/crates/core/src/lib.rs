//! Round-based simulator for clustered IoT networks with spatial data fusion
//! and collaborative beamforming towards a distant base station.

pub mod beamforming;
pub mod config;
pub mod energy;
pub mod env;
pub mod error;
pub mod geometry;
pub mod lifecycle;
pub mod netmodel;
pub mod rng;
pub mod routing;

pub use beamforming::{CbSelection, LinkBudget};
pub use config::NetworkConfig;
pub use energy::{EnergyClass, EnergyLedger};
pub use env::{CbEnv, Observation, Transition};
pub use error::{Error, Result};
pub use geometry::Point;
pub use lifecycle::{lifetime_metrics, simulate_lifetime, CbPolicy, EpisodeTrace, LifetimeMetrics, SinkPolicy};
pub use netmodel::{CoverageField, FusedPacket, Network, NodeState};
pub use routing::{Protocol, RoundOutcome, TopologyGraph};

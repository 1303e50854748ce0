//! Domain types shared by every part of the simulator.

mod config;
mod topology;

pub use config::{
    load_scenario, validate_scenario, ConfigError, Protocol, ScenarioConfig, SensorSpecs, Timing,
    Violation,
};
pub use topology::generate_topology;

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Node identifier. Ids are dense: node `i` lives at index `i` of the
/// scenario's node list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    /// Sensing node with a low-power radio.
    Ordinary,
    /// Relay with a larger panel and a long-range link to the base station.
    Super,
}

/// Static description of a deployed node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Position,
    /// Joules.
    pub initial_energy: f64,
    /// Joules.
    pub accumulator_capacity: f64,
    /// Per-round failure rate λ of the exponential reliability model.
    pub failure_rate: f64,
    /// Joules per round at solar noon.
    pub harvest_peak: f64,
}

impl NodeSpec {
    pub fn is_super(&self) -> bool {
        self.kind == NodeKind::Super
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Member,
    ClusterHead,
}

/// Mutable per-node simulation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub residual_energy: f64,
    pub alive: bool,
    pub role: Role,
    pub cluster_id: Option<usize>,
    /// Remaining cluster-head duty in rounds (may be fractional).
    pub ch_quota_remaining: f64,
}

impl NodeState {
    pub fn fresh(spec: &NodeSpec) -> Self {
        Self {
            residual_energy: spec.initial_energy,
            alive: spec.initial_energy > 0.0,
            role: Role::Member,
            cluster_id: None,
            ch_quota_remaining: 0.0,
        }
    }

    /// Withdraws `cost` joules. A node that cannot cover the full cost is
    /// drained to zero and dies. Returns the energy actually withdrawn.
    pub fn drain(&mut self, cost: f64) -> f64 {
        if !self.alive || cost <= 0.0 {
            return 0.0;
        }
        if cost >= self.residual_energy {
            let spent = self.residual_energy;
            self.residual_energy = 0.0;
            self.kill();
            spent
        } else {
            self.residual_energy -= cost;
            cost
        }
    }

    /// Marks the node dead. Any energy left in the accumulator stays there.
    pub fn kill(&mut self) {
        self.alive = false;
        self.role = Role::Member;
        self.cluster_id = None;
        self.ch_quota_remaining = 0.0;
    }
}

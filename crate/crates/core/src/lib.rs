//! Round-based simulator for a solar-powered water-quality sensor network.
//!
//! Ordinary nodes sample temperature, pH and conductivity once per round
//! and report through cluster heads; super nodes with bigger panels relay
//! to a shore base station over a long-range link. Cluster heads are
//! rotated either by an equalized schedule, solved by Gaussian elimination
//! so that every member runs out of energy at the same time, or by the
//! randomized LEACH baseline.

pub mod energy;
pub mod engine;
pub mod linsolve;
pub mod model;
pub mod nodesim;
pub mod protocols;

pub use engine::{compare, simulate, write_metrics_csv, Metrics, Simulation};
pub use model::{load_scenario, validate_scenario, ConfigError, Protocol, ScenarioConfig};

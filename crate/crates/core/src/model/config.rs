//! Scenario configuration: the canonical TOML document, defaults, and
//! validation.
//!
//! Every key maps one-to-one onto a [`ScenarioConfig`] field; nested tables
//! (`[radio]`, `[solar]`, `[timing]`, `[sensors.*]`, `[water]`) hold the
//! physics models. Unknown keys are rejected so that typos surface at load
//! time instead of silently falling back to a default.

use super::Position;
use crate::energy::{RadioModel, SolarModel};
use crate::nodesim::{SensorModel, WaterProfile};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Echerp,
    Leach,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Echerp => "echerp",
            Protocol::Leach => "leach",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "echerp" => Ok(Protocol::Echerp),
            "leach" => Ok(Protocol::Leach),
            other => Err(ConfigError::UnknownProtocol(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Timing {
    /// Settling delay before each acquisition cycle.
    pub wait_seconds: f64,
    /// How long a sensor may take to answer before the cycle is abandoned.
    pub sensor_timeout_seconds: f64,
    /// Wall-clock span of one simulation round.
    pub round_seconds: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self { wait_seconds: 5.0, sensor_timeout_seconds: 5.0, round_seconds: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSpecs {
    pub temperature: SensorModel,
    pub ph: SensorModel,
    pub conductivity: SensorModel,
}

impl Default for SensorSpecs {
    fn default() -> Self {
        Self {
            temperature: SensorModel::temperature(),
            ph: SensorModel::ph(),
            conductivity: SensorModel::conductivity(),
        }
    }
}

/// Complete, seedable description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub field_width: f64,
    pub field_height: f64,
    pub node_count: u32,
    pub super_node_count: u32,
    /// Defaults to `(field_width / 2, -10)`, on the shore below the field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_position: Option<Position>,
    pub packet_bits: u32,
    pub rounds_max: u32,
    pub reelection_epoch: u32,
    pub cluster_fraction: f64,
    pub protocol: Protocol,
    pub rng_seed: u64,
    pub initial_energy: f64,
    pub accumulator_capacity: f64,
    pub failure_rate: f64,
    pub harvest_peak: f64,
    pub super_harvest_factor: f64,
    pub super_energy_factor: f64,
    /// Joules debited per emitted measurement frame.
    pub sensing_energy: f64,
    /// Probability that an acquisition cycle hits a sensor timeout.
    pub sensor_timeout_prob: f64,
    /// Explicit hand placement; overrides random deployment when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Position>>,
    pub radio: RadioModel,
    pub solar: SolarModel,
    pub timing: Timing,
    pub sensors: SensorSpecs,
    pub water: WaterProfile,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let timing = Timing::default();
        Self {
            field_width: 100.0,
            field_height: 100.0,
            node_count: 100,
            super_node_count: 1,
            bs_position: None,
            packet_bits: 4000,
            rounds_max: 2000,
            reelection_epoch: 20,
            cluster_fraction: 0.05,
            protocol: Protocol::Echerp,
            rng_seed: 1,
            initial_energy: 0.5,
            accumulator_capacity: 2.0,
            failure_rate: 0.0,
            harvest_peak: 5e-4,
            super_harvest_factor: 4.0,
            super_energy_factor: 2.0,
            sensing_energy: 5e-5,
            sensor_timeout_prob: 0.0,
            positions: None,
            radio: RadioModel::default(),
            solar: SolarModel::for_round_seconds(timing.round_seconds),
            timing,
            sensors: SensorSpecs::default(),
            water: WaterProfile::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn bs_position(&self) -> Position {
        self.bs_position.unwrap_or(Position::new(self.field_width / 2.0, -10.0))
    }

    pub fn ordinary_count(&self) -> u32 {
        self.node_count.saturating_sub(self.super_node_count)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config always serializes")
    }

    /// Sets one dotted key (`cluster_fraction`, `radio.e_elec`, ...) from its
    /// textual value, then re-validates.
    pub fn with_override(&self, key: &str, raw: &str) -> Result<Self, ConfigError> {
        let mut doc: toml::Table = toml::from_str(&self.to_toml())
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        let value = parse_value(raw);
        let mut parts = key.split('.').peekable();
        let mut table = &mut doc;
        while let Some(part) = parts.next() {
            if parts.peek().is_none() {
                table.insert(part.to_string(), value.clone());
                break;
            }
            table = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| ConfigError::Parse(format!("`{part}` is not a table in key `{key}`")))?;
        }
        load_scenario(&toml::to_string(&doc).map_err(|e| ConfigError::Parse(e.to_string()))?)
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown protocol `{0}` (expected echerp or leach)")]
    UnknownProtocol(String),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Parses and validates a scenario document, filling defaults for absent keys.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let violations = validate_scenario(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn require(&mut self, ok: bool, key: &str, message: impl Into<String>) {
        if !ok {
            self.0.push(Violation { key: key.to_string(), message: message.into() });
        }
    }

    fn non_negative(&mut self, value: f64, key: &str) {
        self.require(value.is_finite() && value >= 0.0, key, format!("must be finite and >= 0 (got {value})"));
    }

    fn positive(&mut self, value: f64, key: &str) {
        self.require(value.is_finite() && value > 0.0, key, format!("must be finite and > 0 (got {value})"));
    }
}

/// Returns every violated invariant; empty means the config is usable.
pub fn validate_scenario(c: &ScenarioConfig) -> Vec<Violation> {
    let mut ck = Checker(Vec::new());

    ck.positive(c.field_width, "field_width");
    ck.positive(c.field_height, "field_height");
    ck.require(c.node_count >= 1, "node_count", "must be >= 1");
    ck.require(
        c.super_node_count < c.node_count.max(1),
        "super_node_count",
        "must leave at least one ordinary node",
    );
    if let Some(bs) = c.bs_position {
        ck.require(bs.is_finite(), "bs_position", "must be finite");
    }
    ck.require(c.reelection_epoch >= 1, "reelection_epoch", "must be >= 1");
    ck.require(
        c.cluster_fraction > 0.0 && c.cluster_fraction <= 1.0,
        "cluster_fraction",
        format!("must lie in (0, 1] (got {})", c.cluster_fraction),
    );

    ck.non_negative(c.initial_energy, "initial_energy");
    ck.non_negative(c.accumulator_capacity, "accumulator_capacity");
    ck.require(
        c.initial_energy <= c.accumulator_capacity,
        "initial_energy",
        "must not exceed accumulator_capacity",
    );
    ck.non_negative(c.failure_rate, "failure_rate");
    ck.non_negative(c.harvest_peak, "harvest_peak");
    ck.require(
        c.super_harvest_factor.is_finite() && c.super_harvest_factor >= 1.0,
        "super_harvest_factor",
        "must be >= 1 (super nodes carry the larger panel)",
    );
    ck.require(
        c.super_energy_factor.is_finite() && c.super_energy_factor >= 0.0,
        "super_energy_factor",
        "must be finite and >= 0",
    );
    if c.super_node_count > 0 {
        ck.require(
            c.initial_energy * c.super_energy_factor <= c.accumulator_capacity,
            "super_energy_factor",
            "super node initial energy must not exceed accumulator_capacity",
        );
    }
    ck.non_negative(c.sensing_energy, "sensing_energy");
    ck.require(
        (0.0..=1.0).contains(&c.sensor_timeout_prob),
        "sensor_timeout_prob",
        "must lie in [0, 1]",
    );

    if let Some(positions) = &c.positions {
        ck.require(
            positions.len() == c.node_count as usize,
            "positions",
            format!("has {} entries, node_count is {}", positions.len(), c.node_count),
        );
        for (i, p) in positions.iter().enumerate() {
            ck.require(
                p.is_finite() && (0.0..=c.field_width).contains(&p.x) && (0.0..=c.field_height).contains(&p.y),
                "positions",
                format!("entry {i} lies outside the field"),
            );
        }
    }

    let r = &c.radio;
    ck.non_negative(r.e_elec, "radio.e_elec");
    ck.non_negative(r.eps_fs, "radio.eps_fs");
    ck.non_negative(r.eps_mp, "radio.eps_mp");
    ck.non_negative(r.e_da, "radio.e_da");

    ck.require(
        c.solar.day_length.is_finite() && c.solar.day_length >= 1.0,
        "solar.day_length",
        "must be >= 1 round",
    );
    ck.non_negative(c.solar.dawn_offset, "solar.dawn_offset");

    let t = &c.timing;
    ck.non_negative(t.wait_seconds, "timing.wait_seconds");
    ck.non_negative(t.sensor_timeout_seconds, "timing.sensor_timeout_seconds");
    ck.positive(t.round_seconds, "timing.round_seconds");
    ck.require(
        t.round_seconds >= t.wait_seconds + 3.0 * t.sensor_timeout_seconds,
        "timing.round_seconds",
        "must cover the wait plus three sensor timeouts",
    );

    for (name, model) in [
        ("sensors.temperature", &c.sensors.temperature),
        ("sensors.ph", &c.sensors.ph),
        ("sensors.conductivity", &c.sensors.conductivity),
    ] {
        for problem in model.problems() {
            ck.require(false, name, problem);
        }
    }

    ck.positive(c.water.day_seconds, "water.day_seconds");
    let bounds = c.water.truth_bounds(c.field_width, c.field_height);
    for (key, (lo, hi), model) in [
        ("water.base_temp", bounds[0], &c.sensors.temperature),
        ("water.base_ph", bounds[1], &c.sensors.ph),
        ("water.base_cond", bounds[2], &c.sensors.conductivity),
    ] {
        ck.require(
            lo.is_finite() && hi.is_finite() && lo >= model.min && hi <= model.max,
            key,
            format!("truth can span [{lo}, {hi}], outside the sensor range [{}, {}]", model.min, model.max),
        );
    }

    ck.0
}

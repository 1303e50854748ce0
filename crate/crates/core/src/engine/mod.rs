//! The round loop.
//!
//! Each round: sample node failures, harvest solar energy, re-cluster when
//! the epoch rolls over or a node has died, elect heads, run every alive
//! sensing node through one acquisition cycle, exchange data, and record
//! metrics. Each stochastic process draws from its own ChaCha stream keyed
//! by the scenario seed, so changing the protocol leaves the topology and
//! the failure draws untouched.

pub mod batch;
mod metrics;

pub use metrics::{read_metrics_csv, write_metrics_csv, CsvError, Metrics, RoundRecord, Summary, CSV_HEADER};

use crate::energy::{charge, harvest, sample_failure, ReliabilityParams};
use crate::model::{
    generate_topology, validate_scenario, ConfigError, NodeId, NodeSpec, NodeState, Position, Protocol, Role,
    ScenarioConfig,
};
use crate::nodesim::{run_cycle, sample_sensor, truth_at, AcqState, MeasurementFrame, Phase};
use crate::protocols::{
    cluster_count, elect_head_echerp, elect_heads_leach, form_clusters, join_nearest_head,
    plan_routes_with_relays, run_round, solve_rotation, Cluster, LeachHistory, Network, RoundLedger,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Topology = 0,
    Failure = 1,
    Clustering = 2,
    Election = 3,
    Sensing = 4,
    Acquisition = 5,
}

fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// Nodes as deployed for a scenario; identical for every protocol.
pub fn deploy(config: &ScenarioConfig) -> Vec<NodeSpec> {
    generate_topology(config, &mut stream(config.rng_seed, Stream::Topology))
}

/// A single run in progress. [`simulate`] drives it to completion; tests
/// step it manually to inspect intermediate state.
pub struct Simulation {
    config: ScenarioConfig,
    specs: Vec<NodeSpec>,
    states: Vec<NodeState>,
    acquisition: Vec<AcqState>,
    sequence: Vec<u64>,
    last_frames: Vec<Option<MeasurementFrame>>,
    clusters: Vec<Cluster>,
    heads: Vec<NodeId>,
    leach: LeachHistory,
    membership_stale: bool,
    round: u32,
    dissipated: f64,
    harvested: f64,
    sensing: f64,
    metrics: Metrics,
    last_ledger: Option<RoundLedger>,
    rng_failure: ChaCha8Rng,
    rng_clustering: ChaCha8Rng,
    rng_election: ChaCha8Rng,
    rng_sensing: ChaCha8Rng,
    rng_acquisition: ChaCha8Rng,
}

impl Simulation {
    pub fn new(config: &ScenarioConfig) -> Result<Self, ConfigError> {
        let violations = validate_scenario(config);
        if !violations.is_empty() {
            return Err(ConfigError::Invalid(violations));
        }
        let specs = deploy(config);
        let states: Vec<NodeState> = specs.iter().map(NodeState::fresh).collect();
        let initial: f64 = states.iter().map(|s| s.residual_energy).sum();
        let n = specs.len();
        let seed = config.rng_seed;
        Ok(Self {
            config: config.clone(),
            acquisition: vec![AcqState::default(); n],
            sequence: vec![0; n],
            last_frames: vec![None; n],
            clusters: Vec::new(),
            heads: Vec::new(),
            leach: LeachHistory::default(),
            membership_stale: true,
            round: 0,
            dissipated: 0.0,
            harvested: 0.0,
            sensing: 0.0,
            metrics: Metrics::new(config.ordinary_count(), initial),
            last_ledger: None,
            rng_failure: stream(seed, Stream::Failure),
            rng_clustering: stream(seed, Stream::Clustering),
            rng_election: stream(seed, Stream::Election),
            rng_sensing: stream(seed, Stream::Sensing),
            rng_acquisition: stream(seed, Stream::Acquisition),
            specs,
            states,
        })
    }

    pub fn specs(&self) -> &[NodeSpec] {
        &self.specs
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn heads(&self) -> &[NodeId] {
        &self.heads
    }

    pub fn last_ledger(&self) -> Option<&RoundLedger> {
        self.last_ledger.as_ref()
    }

    pub fn last_frames(&self) -> &[Option<MeasurementFrame>] {
        &self.last_frames
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn alive_ordinary(&self) -> u32 {
        self.specs.iter().zip(&self.states).filter(|(sp, st)| !sp.is_super() && st.alive).count() as u32
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.rounds_max || self.alive_ordinary() == 0
    }

    fn bs(&self) -> Position {
        self.config.bs_position()
    }

    fn alive_points(&self) -> Vec<(NodeId, Position)> {
        self.specs
            .iter()
            .zip(&self.states)
            .filter(|(sp, st)| !sp.is_super() && st.alive)
            .map(|(sp, _)| (sp.id, sp.position))
            .collect()
    }

    fn alive_relays(&self) -> Vec<(NodeId, Position)> {
        self.specs
            .iter()
            .zip(&self.states)
            .filter(|(sp, st)| sp.is_super() && st.alive)
            .map(|(sp, _)| (sp.id, sp.position))
            .collect()
    }

    /// Distance a head at `id` would transmit its aggregate over.
    fn uplink_distance(&self, id: NodeId, relays: &[(NodeId, Position)]) -> f64 {
        let pos = self.specs[id.index()].position;
        let to_bs = pos.distance(&self.bs());
        if to_bs <= self.config.radio.d0() {
            return to_bs;
        }
        relays.iter().map(|(_, r)| pos.distance(r)).fold(to_bs, f64::min)
    }

    fn sample_failures(&mut self) {
        for (spec, state) in self.specs.iter().zip(self.states.iter_mut()) {
            if !state.alive {
                continue;
            }
            if sample_failure(&ReliabilityParams::new(spec.failure_rate), 1.0, &mut self.rng_failure) {
                state.kill();
                self.membership_stale = true;
            }
        }
    }

    fn harvest_all(&mut self) {
        let round = u64::from(self.round);
        for (spec, state) in self.specs.iter().zip(self.states.iter_mut()) {
            if !state.alive {
                continue;
            }
            let before = state.residual_energy;
            let amount = harvest(&self.config.solar, spec, round);
            let (next, _overflow) = charge(state, spec.accumulator_capacity, amount);
            self.harvested += next.residual_energy - before;
            *state = next;
        }
    }

    fn recluster_echerp(&mut self) {
        let points = self.alive_points();
        let k = cluster_count(self.config.cluster_fraction, points.len());
        self.clusters = form_clusters(&points, k, &mut self.rng_clustering);
        let relays = self.alive_relays();
        for state in &mut self.states {
            state.cluster_id = None;
            state.ch_quota_remaining = 0.0;
        }
        for cluster in &self.clusters {
            let schedule = solve_rotation(
                cluster,
                &self.specs,
                &self.states,
                &self.config.radio,
                self.config.packet_bits,
                |id| self.uplink_distance(id, &relays),
            );
            schedule.apply(&mut self.states);
            for id in &cluster.members {
                self.states[id.index()].cluster_id = Some(cluster.id);
            }
        }
    }

    fn elect(&mut self) {
        for state in &mut self.states {
            state.role = Role::Member;
        }
        match self.config.protocol {
            Protocol::Echerp => {
                if self.round.is_multiple_of(self.config.reelection_epoch) || self.membership_stale {
                    self.recluster_echerp();
                    self.membership_stale = false;
                }
                self.heads = self
                    .clusters
                    .iter()
                    .map(|c| elect_head_echerp(c, &mut self.states).expect("clusters only hold alive nodes"))
                    .collect();
            }
            Protocol::Leach => {
                let points = self.alive_points();
                let candidates: Vec<(NodeId, f64)> =
                    points.iter().map(|(id, _)| (*id, self.states[id.index()].residual_energy)).collect();
                let heads = elect_heads_leach(
                    &candidates,
                    &mut self.leach,
                    self.config.cluster_fraction,
                    u64::from(self.round),
                    &mut self.rng_election,
                );
                let heads: Vec<NodeId> = heads.into_iter().collect();
                self.clusters = join_nearest_head(&points, &heads);
                self.heads = heads;
                for state in &mut self.states {
                    state.cluster_id = None;
                }
                for c in &self.clusters {
                    for id in &c.members {
                        self.states[id.index()].cluster_id = Some(c.id);
                    }
                }
                self.membership_stale = false;
            }
        }
        for h in &self.heads {
            self.states[h.index()].role = Role::ClusterHead;
        }
    }

    /// Runs one acquisition cycle on every alive sensing node. Returns which
    /// nodes have a frame to send.
    fn acquire(&mut self) -> Vec<bool> {
        let timing = self.config.timing.clone();
        let time = f64::from(self.round) * timing.round_seconds + timing.wait_seconds;
        let mut has_frame = vec![false; self.specs.len()];
        for (i, spec) in self.specs.iter().enumerate() {
            if spec.is_super() || !self.states[i].alive {
                continue;
            }
            let fail_at = (self.rng_acquisition.random::<f64>() < self.config.sensor_timeout_prob).then(|| {
                [Phase::AcqTemp, Phase::AcqPh, Phase::AcqCond][self.rng_acquisition.random_range(0..3)]
            });
            let outcome = run_cycle(self.acquisition[i], fail_at, timing.wait_seconds, timing.sensor_timeout_seconds)
                .expect("cycle driver only issues legal events");
            self.acquisition[i] = outcome.state;
            if !outcome.emitted {
                continue;
            }
            let paid = self.states[i].drain(self.config.sensing_energy);
            self.sensing += paid;
            self.dissipated += paid;
            if !self.states[i].alive {
                self.membership_stale = true;
                continue;
            }
            let truth = truth_at(&self.config.water, spec.position, time);
            let sensors = &self.config.sensors;
            let frame = MeasurementFrame::quantized(
                sensors,
                spec.id.0,
                self.sequence[i],
                time.round() as u64,
                sample_sensor(&sensors.temperature, truth.temperature, &mut self.rng_sensing),
                sample_sensor(&sensors.ph, truth.ph, &mut self.rng_sensing),
                sample_sensor(&sensors.conductivity, truth.conductivity, &mut self.rng_sensing),
                self.states[i].residual_energy,
            );
            self.sequence[i] += 1;
            self.last_frames[i] = Some(frame);
            has_frame[i] = true;
        }
        has_frame
    }

    fn exchange(&mut self, has_frame: &[bool]) -> RoundLedger {
        let heads: Vec<(NodeId, Position)> = self
            .heads
            .iter()
            .filter(|h| self.states[h.index()].alive)
            .map(|h| (*h, self.specs[h.index()].position))
            .collect();
        let plan = plan_routes_with_relays(&heads, &self.alive_relays(), self.bs(), self.config.radio.d0());
        let net = Network {
            specs: &self.specs,
            bs: self.bs(),
            radio: &self.config.radio,
            packet_bits: self.config.packet_bits,
        };
        let ledger = run_round(&net, &mut self.states, &self.clusters, &self.heads, &plan, has_frame);
        if !ledger.deaths.is_empty() {
            self.membership_stale = true;
        }
        self.dissipated += ledger.total_dissipated();
        ledger
    }

    /// Advances one round and returns its record.
    pub fn step(&mut self) -> RoundRecord {
        self.sample_failures();
        self.harvest_all();
        if self.alive_ordinary() > 0 {
            self.elect();
        } else {
            self.clusters.clear();
            self.heads.clear();
        }
        let has_frame = self.acquire();
        let ledger = self.exchange(&has_frame);
        let record = RoundRecord {
            round: self.round,
            alive: self.alive_ordinary(),
            residual: self.states.iter().map(|s| s.residual_energy).sum(),
            dissipated: self.dissipated,
            harvested: self.harvested,
            frames: ledger.frames_delivered,
        };
        self.last_ledger = Some(ledger);
        self.metrics.push(record);
        self.metrics.summary.sensing_energy = self.sensing;
        self.round += 1;
        record
    }

    pub fn finish(self) -> Metrics {
        self.metrics
    }
}

/// Runs a scenario to completion (`rounds_max` rounds or until every
/// sensing node is dead).
pub fn simulate(config: &ScenarioConfig) -> Result<Metrics, ConfigError> {
    let mut sim = Simulation::new(config)?;
    while !sim.is_finished() {
        sim.step();
    }
    Ok(sim.finish())
}

/// Runs the same scenario once per protocol; only the protocol differs.
pub fn compare(config: &ScenarioConfig, protocols: &[Protocol]) -> Result<BTreeMap<Protocol, Metrics>, ConfigError> {
    let configs: Vec<ScenarioConfig> =
        protocols.iter().map(|&protocol| ScenarioConfig { protocol, ..config.clone() }).collect();
    protocols
        .iter()
        .copied()
        .zip(batch::run_batch(&configs))
        .map(|(p, m)| m.map(|m| (p, m)))
        .collect()
}

/// Parses a comma-separated protocol list such as `echerp,leach`.
pub fn parse_protocols(list: &str) -> Result<Vec<Protocol>, ConfigError> {
    let protocols = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Protocol>, _>>()?;
    if protocols.is_empty() {
        return Err(ConfigError::UnknownProtocol(list.to_string()));
    }
    Ok(protocols)
}

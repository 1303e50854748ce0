//! Equalized cluster-head rotation.
//!
//! Each cluster member `i` gets an unknown `x_i`: the number of rounds it
//! will serve as head. Over a schedule of `S = Σ x_j` rounds node `i` spends
//! `x_i · E_head(i)` while heading and `(S − x_i) · E_mem(i)` otherwise. The
//! schedule is chosen so that this total equals the node's residual energy
//! for every member at once, i.e. every node runs dry at the same moment:
//!
//! ```text
//! x_i · (E_head(i) − E_mem(i)) + E_mem(i) · Σ_j x_j = E_resid(i)
//! ```
//!
//! The member cost uses the distance to the cluster centroid rather than to
//! a particular head, which keeps the system linear in `x`.

use super::clustering::{centroid, Cluster};
use crate::energy::{aggregate_energy, rx_energy, tx_energy, RadioModel};
use crate::linsolve::{gaussian_solve, LinearSystem, SolveError};
use crate::model::{NodeId, NodeSpec, NodeState};
use std::collections::BTreeMap;
use thiserror::Error;

/// Per-round energy figures of one cluster member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberCosts {
    pub id: NodeId,
    /// Energy per round while serving as head.
    pub head: f64,
    /// Energy per round while an ordinary member.
    pub member: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RotationSchedule {
    pub quotas: BTreeMap<NodeId, f64>,
}

impl RotationSchedule {
    pub fn total(&self) -> f64 {
        self.quotas.values().sum()
    }

    /// Copies quotas into the member states.
    pub fn apply(&self, states: &mut [NodeState]) {
        for (id, q) in &self.quotas {
            states[id.index()].ch_quota_remaining = *q;
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectionError {
    #[error("cluster {0} has no alive member")]
    NoAliveMember(usize),
}

pub fn member_costs(
    cluster: &Cluster,
    specs: &[NodeSpec],
    states: &[NodeState],
    radio: &RadioModel,
    packet_bits: u32,
    next_hop_distance: impl Fn(NodeId) -> f64,
) -> Vec<MemberCosts> {
    let n = cluster.len() as u32;
    let center = centroid(cluster.members.iter().map(|id| specs[id.index()].position));
    let head_fixed = f64::from(n.saturating_sub(1)) * rx_energy(radio, packet_bits)
        + aggregate_energy(radio, packet_bits, n);
    cluster
        .members
        .iter()
        .map(|&id| MemberCosts {
            id,
            head: head_fixed + tx_energy(radio, packet_bits, next_hop_distance(id)),
            member: tx_energy(radio, packet_bits, specs[id.index()].position.distance(&center)),
            residual: states[id.index()].residual_energy,
        })
        .collect()
}

/// Assembles the equalization system from precomputed costs.
pub fn equalization_system(costs: &[MemberCosts]) -> Result<LinearSystem, SolveError> {
    let n = costs.len();
    let mut a = Vec::with_capacity(n * n);
    for (i, c) in costs.iter().enumerate() {
        a.extend((0..n).map(|j| if i == j { c.head } else { c.member }));
    }
    LinearSystem::from_row_major(n, a, costs.iter().map(|c| c.residual).collect())
}

pub fn build_equalization_system(
    cluster: &Cluster,
    specs: &[NodeSpec],
    states: &[NodeState],
    radio: &RadioModel,
    packet_bits: u32,
    next_hop_distance: impl Fn(NodeId) -> f64,
) -> Result<LinearSystem, SolveError> {
    equalization_system(&member_costs(cluster, specs, states, radio, packet_bits, next_hop_distance))
}

/// Solves for the rotation quotas. Negative quotas are clamped to zero; if
/// the system is singular or nothing positive survives, the member with the
/// most residual energy (lowest id on ties) gets a single round.
pub fn schedule_from_costs(costs: &[MemberCosts]) -> RotationSchedule {
    let solved = equalization_system(costs).and_then(|s| gaussian_solve(&s)).ok();
    let mut quotas: BTreeMap<NodeId, f64> = match &solved {
        Some(x) => costs.iter().zip(x).map(|(c, q)| (c.id, q.max(0.0))).collect(),
        None => costs.iter().map(|c| (c.id, 0.0)).collect(),
    };
    if quotas.values().all(|q| *q <= 0.0) {
        let best = costs.iter().fold(None::<&MemberCosts>, |best, c| match best {
            Some(b) if b.residual > c.residual || (b.residual == c.residual && b.id < c.id) => Some(b),
            _ => Some(c),
        });
        if let Some(b) = best {
            quotas.insert(b.id, 1.0);
        }
    }
    RotationSchedule { quotas }
}

pub fn solve_rotation(
    cluster: &Cluster,
    specs: &[NodeSpec],
    states: &[NodeState],
    radio: &RadioModel,
    packet_bits: u32,
    next_hop_distance: impl Fn(NodeId) -> f64,
) -> RotationSchedule {
    schedule_from_costs(&member_costs(cluster, specs, states, radio, packet_bits, next_hop_distance))
}

/// Picks the alive member with the largest remaining quota (then more
/// residual energy, then lower id) and charges it one round of duty.
pub fn elect_head_echerp(cluster: &Cluster, states: &mut [NodeState]) -> Result<NodeId, ElectionError> {
    let head = cluster
        .members
        .iter()
        .copied()
        .filter(|id| states[id.index()].alive)
        .reduce(|best, id| {
            let (b, c) = (&states[best.index()], &states[id.index()]);
            let better = c.ch_quota_remaining > b.ch_quota_remaining
                || (c.ch_quota_remaining == b.ch_quota_remaining && c.residual_energy > b.residual_energy);
            if better { id } else { best }
        })
        .ok_or(ElectionError::NoAliveMember(cluster.id))?;
    let q = &mut states[head.index()].ch_quota_remaining;
    *q = (*q - 1.0).max(0.0);
    Ok(head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeKind, Position};
    use proptest::prelude::*;

    fn costs(head: f64, member: f64, residuals: &[f64]) -> Vec<MemberCosts> {
        residuals
            .iter()
            .enumerate()
            .map(|(i, &r)| MemberCosts { id: NodeId(i as u32 + 1), head, member, residual: r })
            .collect()
    }

    fn states_with(quotas: &[f64], residuals: &[f64]) -> Vec<NodeState> {
        quotas
            .iter()
            .zip(residuals)
            .map(|(&q, &r)| NodeState {
                residual_energy: r,
                alive: true,
                role: crate::model::Role::Member,
                cluster_id: Some(0),
                ch_quota_remaining: q,
            })
            .collect()
    }

    fn cluster(n: u32) -> Cluster {
        Cluster { id: 0, members: (0..n).map(NodeId).collect() }
    }

    #[test]
    fn singleton_system() {
        let s = equalization_system(&costs(2.5, 1.0, &[5.0])).unwrap();
        assert_eq!((s.dim(), s.a(0, 0), s.rhs()[0]), (1, 2.5, 5.0));
        assert_eq!(schedule_from_costs(&costs(2.5, 1.0, &[5.0])).quotas[&NodeId(1)], 2.0);
    }

    #[test]
    fn equal_residuals_split_evenly() {
        let q = schedule_from_costs(&costs(2.0, 1.0, &[3.0, 3.0])).quotas;
        assert!((q[&NodeId(1)] - 1.0).abs() < 1e-12 && (q[&NodeId(2)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unequal_residuals() {
        let q = schedule_from_costs(&costs(2.0, 1.0, &[4.0, 3.0])).quotas;
        assert!((q[&NodeId(1)] - 5.0 / 3.0).abs() < 1e-12);
        assert!((q[&NodeId(2)] - 2.0 / 3.0).abs() < 1e-12);
        // node 1 serves 5/3 rounds as head and 2/3 as member: 10/3 + 2/3 = 4
        let spend = q[&NodeId(1)] * 2.0 + q[&NodeId(2)] * 1.0;
        assert!((spend - 4.0).abs() < 1e-12);
    }

    #[test]
    fn only_energetic_node_gets_quota() {
        let q = schedule_from_costs(&costs(20.0, 1.0, &[0.0, 0.0, 1.0])).quotas;
        assert_eq!(q[&NodeId(1)], 0.0);
        assert_eq!(q[&NodeId(2)], 0.0);
        assert!(q[&NodeId(3)] > 0.0);
    }

    #[test]
    fn singular_falls_back_to_richest() {
        // identical members make identical rows
        let mut c = costs(1.0, 1.0, &[2.0, 3.0, 3.0]);
        c[0].member = 1.0;
        let s = schedule_from_costs(&c);
        assert_eq!(s.quotas[&NodeId(2)], 1.0);
        assert_eq!(s.total(), 1.0);
    }

    #[test]
    fn degenerate_costs_via_builder_fall_back() {
        // free electronics and aggregation, and an uplink as long as the
        // centroid distance: heading costs the same as reporting, so every
        // row of the system is constant and the matrix has rank one
        let radio = RadioModel { e_elec: 0.0, e_da: 0.0, ..RadioModel::default() };
        let specs: Vec<NodeSpec> = [(0.0, 0.0), (20.0, 0.0)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| NodeSpec {
                id: NodeId(i as u32),
                kind: NodeKind::Ordinary,
                position: Position::new(x, y),
                initial_energy: 0.3 + 0.1 * i as f64,
                accumulator_capacity: 2.0,
                failure_rate: 0.0,
                harvest_peak: 0.0,
            })
            .collect();
        let states: Vec<NodeState> = specs.iter().map(NodeState::fresh).collect();
        let sys = build_equalization_system(&cluster(2), &specs, &states, &radio, 4000, |_| 10.0).unwrap();
        assert!(matches!(gaussian_solve(&sys), Err(SolveError::Singular { .. })));
        let s = solve_rotation(&cluster(2), &specs, &states, &radio, 4000, |_| 10.0);
        assert_eq!(s.quotas[&NodeId(1)], 1.0);
        assert_eq!(s.total(), 1.0);
    }

    #[test]
    fn builder_cost_structure() {
        let radio = RadioModel::default();
        let specs: Vec<NodeSpec> = [(0.0, 0.0), (20.0, 0.0)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| NodeSpec {
                id: NodeId(i as u32),
                kind: NodeKind::Ordinary,
                position: Position::new(x, y),
                initial_energy: 0.5,
                accumulator_capacity: 2.0,
                failure_rate: 0.0,
                harvest_peak: 0.0,
            })
            .collect();
        let states: Vec<NodeState> = specs.iter().map(NodeState::fresh).collect();
        let sys = build_equalization_system(&cluster(2), &specs, &states, &radio, 4000, |id| {
            if id == NodeId(0) { 30.0 } else { 50.0 }
        })
        .unwrap();
        let head0 = rx_energy(&radio, 4000) + aggregate_energy(&radio, 4000, 2) + tx_energy(&radio, 4000, 30.0);
        let mem0 = tx_energy(&radio, 4000, 10.0);
        assert!((sys.a(0, 0) - head0).abs() < 1e-18);
        assert!((sys.a(0, 1) - mem0).abs() < 1e-18);
        assert_eq!(sys.rhs(), &[0.5, 0.5]);
    }

    #[test]
    fn election_examples() {
        let c = Cluster { id: 0, members: vec![NodeId(0), NodeId(1)] };
        let mut s = states_with(&[5.0 / 3.0, 2.0 / 3.0], &[4.0, 3.0]);
        assert_eq!(elect_head_echerp(&c, &mut s).unwrap(), NodeId(0));
        assert!((s[0].ch_quota_remaining - 2.0 / 3.0).abs() < 1e-12);

        let mut tie = states_with(&[1.0, 1.0], &[2.0, 2.0]);
        assert_eq!(elect_head_echerp(&c, &mut tie).unwrap(), NodeId(0));

        let mut dead = states_with(&[3.0, 1.0], &[2.0, 2.0]);
        dead[0].alive = false;
        assert_eq!(elect_head_echerp(&c, &mut dead).unwrap(), NodeId(1));

        dead[1].alive = false;
        assert_eq!(elect_head_echerp(&c, &mut dead), Err(ElectionError::NoAliveMember(0)));
    }

    #[test]
    fn quota_floors_at_zero() {
        let c = cluster(1);
        let mut s = states_with(&[0.4], &[1.0]);
        elect_head_echerp(&c, &mut s).unwrap();
        assert_eq!(s[0].ch_quota_remaining, 0.0);
    }

    proptest! {
        #[test]
        fn rotation_fairness(quotas in prop::collection::vec(0.0f64..6.0, 1..8), residuals in prop::collection::vec(0.1f64..1.0, 8)) {
            let n = quotas.len();
            let c = cluster(n as u32);
            let mut s = states_with(&quotas, &residuals[..n]);
            let rounds: usize = quotas.iter().map(|q| q.ceil() as usize).sum();
            let mut served = vec![0usize; n];
            for _ in 0..rounds {
                served[elect_head_echerp(&c, &mut s).unwrap().index()] += 1;
            }
            for (q, k) in quotas.iter().zip(&served) {
                prop_assert!(*k as f64 >= q.floor() && *k as f64 <= q.ceil(), "quota {} served {}", q, k);
            }
        }

        #[test]
        fn election_scale_invariant(quotas in prop::collection::vec(0.0f64..6.0, 1..8), scale in 0.01f64..100.0) {
            let n = quotas.len();
            let c = cluster(n as u32);
            let residuals: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
            let mut a = states_with(&quotas, &residuals);
            let scaled: Vec<f64> = quotas.iter().map(|q| q * scale).collect();
            let mut b = states_with(&scaled, &residuals);
            prop_assert_eq!(elect_head_echerp(&c, &mut a).unwrap(), elect_head_echerp(&c, &mut b).unwrap());
        }
    }
}

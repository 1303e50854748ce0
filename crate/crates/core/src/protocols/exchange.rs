//! One round of data exchange: members report to their head, heads
//! aggregate, and aggregated packets travel along the route plan to the
//! base station.

use super::clustering::Cluster;
use super::routing::{NextHop, RoutePlan};
use crate::energy::{aggregate_energy, rx_energy, tx_energy, RadioModel};
use crate::model::{NodeId, NodeSpec, NodeState, Position};

/// Energy actually withdrawn from each node this round, plus delivery counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLedger {
    /// Indexed by node id.
    pub dissipated: Vec<f64>,
    /// Measurement frames that reached the base station.
    pub frames_delivered: u64,
    /// Aggregated packets that never arrived.
    pub packets_lost: u64,
    pub deaths: Vec<NodeId>,
}

impl RoundLedger {
    fn new(n: usize) -> Self {
        Self { dissipated: vec![0.0; n], frames_delivered: 0, packets_lost: 0, deaths: Vec::new() }
    }

    pub fn total_dissipated(&self) -> f64 {
        self.dissipated.iter().sum()
    }

    /// Charges `cost` to `id`. Returns whether the node paid in full.
    fn spend(&mut self, states: &mut [NodeState], id: NodeId, cost: f64) -> bool {
        let state = &mut states[id.index()];
        if !state.alive {
            return false;
        }
        let paid = state.drain(cost);
        self.dissipated[id.index()] += paid;
        if !state.alive {
            self.deaths.push(id);
        }
        paid >= cost
    }
}

/// Everything about the deployment that a round needs besides node state.
#[derive(Debug, Clone, Copy)]
pub struct Network<'a> {
    pub specs: &'a [NodeSpec],
    pub bs: Position,
    pub radio: &'a RadioModel,
    pub packet_bits: u32,
}

impl Network<'_> {
    fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.specs[a.index()].position.distance(&self.specs[b.index()].position)
    }

    fn distance_to_bs(&self, a: NodeId) -> f64 {
        self.specs[a.index()].position.distance(&self.bs)
    }
}

/// Runs the exchange. `heads[i]` leads `clusters[i]`; `has_frame[id]` says
/// whether that node produced a measurement this round. A node that cannot
/// pay for an operation dies on the spot and the data it carried is lost;
/// the partial cost stays on the ledger.
pub fn run_round(
    net: &Network<'_>,
    states: &mut [NodeState],
    clusters: &[Cluster],
    heads: &[NodeId],
    plan: &RoutePlan,
    has_frame: &[bool],
) -> RoundLedger {
    assert_eq!(clusters.len(), heads.len(), "one head per cluster");
    let bits = net.packet_bits;
    let mut ledger = RoundLedger::new(states.len());
    let mut packets: Vec<(NodeId, u64)> = Vec::new();

    for (cluster, &head) in clusters.iter().zip(heads) {
        if !states[head.index()].alive {
            continue;
        }
        let mut signals = u64::from(has_frame[head.index()]);
        for &member in &cluster.members {
            if member == head || !states[member.index()].alive || !has_frame[member.index()] {
                continue;
            }
            let sent = ledger.spend(states, member, tx_energy(net.radio, bits, net.distance(member, head)));
            if !sent {
                continue;
            }
            if !ledger.spend(states, head, rx_energy(net.radio, bits)) {
                break;
            }
            signals += 1;
        }
        if signals == 0 || !states[head.index()].alive {
            continue;
        }
        if ledger.spend(states, head, aggregate_energy(net.radio, bits, signals as u32)) {
            packets.push((head, signals));
        }
    }

    for (origin, frames) in packets {
        let mut carrier = origin;
        let delivered = loop {
            let hop = plan.next_hop.get(&carrier).copied().unwrap_or(NextHop::BaseStation);
            let distance = match hop {
                NextHop::BaseStation => net.distance_to_bs(carrier),
                NextHop::Head(next) | NextHop::Relay(next) => net.distance(carrier, next),
            };
            if !ledger.spend(states, carrier, tx_energy(net.radio, bits, distance)) {
                break false;
            }
            match hop {
                NextHop::BaseStation => break true,
                NextHop::Head(next) | NextHop::Relay(next) => {
                    if !ledger.spend(states, next, rx_energy(net.radio, bits)) {
                        break false;
                    }
                    carrier = next;
                }
            }
        };
        if delivered {
            ledger.frames_delivered += frames;
        } else {
            ledger.packets_lost += 1;
        }
    }
    ledger
}

//! Head-to-base-station routing.
//!
//! A head within the crossover distance `d0` of the base station sends
//! directly. A farther head forwards to the nearest other head that is
//! strictly closer to the base station, or sends directly when there is
//! none. Since every hop strictly decreases the distance to the base
//! station, no plan can contain a cycle.

use crate::model::{NodeId, Position};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextHop {
    BaseStation,
    Head(NodeId),
    /// A super node, which forwards straight to the base station.
    Relay(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoutePlan {
    pub next_hop: BTreeMap<NodeId, NextHop>,
}

impl RoutePlan {
    /// Hops from `from` until the base station, or `None` if the path
    /// revisits a node or reaches a head with no entry.
    pub fn path(&self, from: NodeId) -> Option<Vec<NextHop>> {
        let mut hops = Vec::new();
        let mut seen = vec![from];
        let mut current = from;
        loop {
            let hop = *self.next_hop.get(&current)?;
            hops.push(hop);
            match hop {
                NextHop::BaseStation | NextHop::Relay(_) => return Some(hops),
                NextHop::Head(next) => {
                    if seen.contains(&next) {
                        return None;
                    }
                    seen.push(next);
                    current = next;
                }
            }
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.next_hop.keys().all(|&h| self.path(h).is_some())
    }
}

pub fn plan_routes(heads: &[(NodeId, Position)], bs: Position, d0: f64) -> RoutePlan {
    plan_routes_with_relays(heads, &[], bs, d0)
}

/// As [`plan_routes`], except that a head beyond `d0` which is closer to
/// some relay than to the base station hands its packet to the nearest such
/// relay.
pub fn plan_routes_with_relays(
    heads: &[(NodeId, Position)],
    relays: &[(NodeId, Position)],
    bs: Position,
    d0: f64,
) -> RoutePlan {
    let mut next_hop = BTreeMap::new();
    for &(id, pos) in heads {
        let to_bs = pos.distance(&bs);
        let hop = if to_bs <= d0 {
            NextHop::BaseStation
        } else if let Some((relay, _)) = nearest(relays.iter().filter(|(r, p)| *r != id && pos.distance(p) < to_bs), pos) {
            NextHop::Relay(relay)
        } else {
            let closer = heads.iter().filter(|(other, p)| *other != id && p.distance(&bs) < to_bs);
            match nearest(closer, pos) {
                Some((other, _)) => NextHop::Head(other),
                None => NextHop::BaseStation,
            }
        };
        next_hop.insert(id, hop);
    }
    RoutePlan { next_hop }
}

fn nearest<'a>(candidates: impl Iterator<Item = &'a (NodeId, Position)>, from: Position) -> Option<(NodeId, f64)> {
    candidates
        .map(|(id, p)| (*id, from.distance(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

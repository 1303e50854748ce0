//! LEACH baseline: randomized, energy-blind cluster-head rotation.

use crate::model::NodeId;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Rounds after serving during which a node may not head again (`⌊1/p⌋`).
pub fn rotation_period(p: f64) -> u64 {
    ((1.0 / p).floor() as u64).max(1)
}

/// Election threshold `T = p / (1 − p·(r mod ⌊1/p⌋))`, capped at 1.
pub fn leach_threshold(p: f64, round: u64) -> f64 {
    let m = (round % rotation_period(p)) as f64;
    let t = p / (1.0 - p * m);
    // the last slot of a rotation is exactly 1 analytically
    if !(0.0..1.0 - 1e-9).contains(&t) { 1.0 } else { t }
}

/// When each node last served as head.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LeachHistory {
    last_head: BTreeMap<NodeId, u64>,
}

impl LeachHistory {
    pub fn is_eligible(&self, id: NodeId, round: u64, p: f64) -> bool {
        self.last_head.get(&id).is_none_or(|&last| round - last >= rotation_period(p))
    }

    pub fn record(&mut self, id: NodeId, round: u64) {
        self.last_head.insert(id, round);
    }
}

/// Elects this round's heads among `alive` (id, residual energy) pairs.
/// Each eligible node draws independently against the threshold; if nobody
/// is elected the node with the most residual energy is drafted.
pub fn elect_heads_leach<R: Rng + ?Sized>(
    alive: &[(NodeId, f64)],
    history: &mut LeachHistory,
    p: f64,
    round: u64,
    rng: &mut R,
) -> BTreeSet<NodeId> {
    let threshold = leach_threshold(p, round);
    let mut heads: BTreeSet<NodeId> = alive
        .iter()
        .filter(|(id, _)| history.is_eligible(*id, round, p))
        .filter(|_| rng.random::<f64>() < threshold)
        .map(|(id, _)| *id)
        .collect();
    if heads.is_empty() {
        let drafted = alive
            .iter()
            .copied()
            .reduce(|best, c| if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) { c } else { best });
        heads.extend(drafted.map(|(id, _)| id));
    }
    for id in &heads {
        history.record(*id, round);
    }
    heads
}

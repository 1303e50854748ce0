use super::{NodeId, NodeKind, NodeSpec, Position, ScenarioConfig};
use rand::Rng;

/// Deploys `node_count` nodes. Positions are i.i.d. uniform over the field
/// unless the scenario lists them explicitly; the first `super_node_count`
/// nodes are super nodes.
pub fn generate_topology<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Vec<NodeSpec> {
    (0..config.node_count)
        .map(|i| {
            let position = match &config.positions {
                Some(list) => list[i as usize],
                None => Position::new(
                    rng.random_range(0.0..=config.field_width),
                    rng.random_range(0.0..=config.field_height),
                ),
            };
            let (kind, energy_scale, harvest_scale) = if i < config.super_node_count {
                (NodeKind::Super, config.super_energy_factor, config.super_harvest_factor)
            } else {
                (NodeKind::Ordinary, 1.0, 1.0)
            };
            NodeSpec {
                id: NodeId(i),
                kind,
                position,
                initial_energy: config.initial_energy * energy_scale,
                accumulator_capacity: config.accumulator_capacity,
                failure_rate: config.failure_rate,
                harvest_peak: config.harvest_peak * harvest_scale,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n: u32, supers: u32) -> ScenarioConfig {
        ScenarioConfig { node_count: n, super_node_count: supers, cluster_fraction: 1.0, ..Default::default() }
    }

    #[test]
    fn single_node_in_bounds() {
        let nodes = generate_topology(&cfg(1, 0), &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(nodes.len(), 1);
        let p = nodes[0].position;
        assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
    }

    #[test]
    fn super_nodes_first_with_bigger_budgets() {
        let c = cfg(10, 2);
        let nodes = generate_topology(&c, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(nodes[..2].iter().all(NodeSpec::is_super));
        assert!(nodes[2..].iter().all(|n| !n.is_super()));
        assert_eq!(nodes[0].harvest_peak, 4.0 * c.harvest_peak);
        assert_eq!(nodes[0].initial_energy, 2.0 * c.initial_energy);
        assert!(nodes.iter().enumerate().all(|(i, n)| n.id.index() == i));
    }

    #[test]
    fn mean_position_near_center() {
        let nodes = generate_topology(&cfg(1000, 0), &mut ChaCha8Rng::seed_from_u64(7));
        let mx = nodes.iter().map(|n| n.position.x).sum::<f64>() / 1000.0;
        let my = nodes.iter().map(|n| n.position.y).sum::<f64>() / 1000.0;
        // standard error of the mean is 100/sqrt(12*1000) ~ 0.9 m, 5% is 2.5 m
        assert!((mx - 50.0).abs() <= 2.5, "mean x {mx}");
        assert!((my - 50.0).abs() <= 2.5, "mean y {my}");
    }

    #[test]
    fn hand_placement_used_verbatim() {
        let pts = vec![Position::new(1.0, 2.0), Position::new(3.0, 4.0)];
        let c = ScenarioConfig { positions: Some(pts.clone()), ..cfg(2, 0) };
        let nodes = generate_topology(&c, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(nodes.iter().map(|n| n.position).collect::<Vec<_>>(), pts);
    }

    proptest! {
        #[test]
        fn deterministic_and_bounded(seed in any::<u64>(), n in 1u32..200, w in 1.0f64..500.0, h in 1.0f64..500.0) {
            let c = ScenarioConfig { field_width: w, field_height: h, ..cfg(n, 0) };
            let a = generate_topology(&c, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = generate_topology(&c, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(&a, &b);
            for node in &a {
                prop_assert!((0.0..=w).contains(&node.position.x));
                prop_assert!((0.0..=h).contains(&node.position.y));
            }
        }
    }
}

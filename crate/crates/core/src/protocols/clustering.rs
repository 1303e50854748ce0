//! Geographic cluster formation (seeded k-means with k-means++ seeding).

use crate::model::{NodeId, Position};
use rand::Rng;

pub const MAX_KMEANS_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: usize,
    /// Sorted ascending; includes the current head once one is elected.
    pub members: Vec<NodeId>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Cluster count used by the engine for `alive` nodes.
pub fn cluster_count(cluster_fraction: f64, alive: usize) -> usize {
    if alive == 0 {
        return 0;
    }
    ((cluster_fraction * alive as f64).round() as usize).clamp(1, alive)
}

pub fn centroid(points: impl IntoIterator<Item = Position>) -> Position {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        sx += p.x;
        sy += p.y;
        n += 1;
    }
    if n == 0 {
        Position::new(0.0, 0.0)
    } else {
        Position::new(sx / n as f64, sy / n as f64)
    }
}

fn nearest(p: &Position, centers: &[Position]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = p.distance(c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn kmeans_pp_seed<R: Rng + ?Sized>(points: &[(NodeId, Position)], k: usize, rng: &mut R) -> Vec<Position> {
    let mut centers = vec![points[rng.random_range(0..points.len())].1];
    let mut d2: Vec<f64> = points.iter().map(|(_, p)| p.distance(&centers[0]).powi(2)).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if *w > 0.0 && target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard against the walk ending on a zero-weight tail
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|w| *w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick].1;
        centers.push(c);
        for (w, (_, p)) in d2.iter_mut().zip(points) {
            *w = w.min(p.distance(&c).powi(2));
        }
    }
    centers
}

/// Partitions `points` into at most `k` non-empty geographic clusters.
/// Deterministic for a given rng state.
pub fn form_clusters<R: Rng + ?Sized>(points: &[(NodeId, Position)], k: usize, rng: &mut R) -> Vec<Cluster> {
    if points.is_empty() {
        return Vec::new();
    }
    let k = k.clamp(1, points.len());
    let mut centers = kmeans_pp_seed(points, k, rng);
    let mut assignment: Vec<usize> = points.iter().map(|(_, p)| nearest(p, &centers)).collect();

    for _ in 0..MAX_KMEANS_ITERATIONS {
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for ((_, p), &a) in points.iter().zip(&assignment) {
            sums[a].0 += p.x;
            sums[a].1 += p.y;
            sums[a].2 += 1;
        }
        let mut reseeded = Vec::new();
        for (c, &(sx, sy, n)) in sums.iter().enumerate() {
            if n > 0 {
                centers[c] = Position::new(sx / n as f64, sy / n as f64);
            }
        }
        for c in 0..k {
            if sums[c].2 == 0 {
                // empty cluster: restart it on the point farthest from its centre
                let far = (0..points.len())
                    .filter(|i| !reseeded.contains(i))
                    .max_by(|&i, &j| {
                        let di = points[i].1.distance(&centers[assignment[i]]);
                        let dj = points[j].1.distance(&centers[assignment[j]]);
                        di.total_cmp(&dj).then(j.cmp(&i))
                    });
                if let Some(i) = far {
                    centers[c] = points[i].1;
                    reseeded.push(i);
                }
            }
        }
        let next: Vec<usize> = points.iter().map(|(_, p)| nearest(p, &centers)).collect();
        if next == assignment && reseeded.is_empty() {
            break;
        }
        assignment = next;
    }

    let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); k];
    for ((id, _), &a) in points.iter().zip(&assignment) {
        groups[a].push(*id);
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .enumerate()
        .map(|(id, mut members)| {
            members.sort();
            Cluster { id, members }
        })
        .collect()
}

/// Attaches every non-head point to its nearest head (ties to the lower
/// head id). One cluster per head, in head-id order.
pub fn join_nearest_head(points: &[(NodeId, Position)], heads: &[NodeId]) -> Vec<Cluster> {
    let mut heads = heads.to_vec();
    heads.sort();
    heads.dedup();
    let head_pos: Vec<Position> = heads
        .iter()
        .map(|h| points.iter().find(|(id, _)| id == h).expect("head must be among the points").1)
        .collect();
    let mut clusters: Vec<Cluster> =
        heads.iter().enumerate().map(|(id, h)| Cluster { id, members: vec![*h] }).collect();
    if clusters.is_empty() {
        return clusters;
    }
    for (id, p) in points {
        if heads.binary_search(id).is_ok() {
            continue;
        }
        clusters[nearest(p, &head_pos)].members.push(*id);
    }
    for c in &mut clusters {
        c.members.sort();
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(coords: &[(f64, f64)]) -> Vec<(NodeId, Position)> {
        coords.iter().enumerate().map(|(i, &(x, y))| (NodeId(i as u32), Position::new(x, y))).collect()
    }

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn k_one_is_everyone() {
        let p = pts(&[(0.0, 0.0), (5.0, 5.0), (9.0, 1.0)]);
        let c = form_clusters(&p, 1, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(c, vec![Cluster { id: 0, members: ids(&[0, 1, 2]) }]);
    }

    #[test]
    fn k_n_is_singletons() {
        let p = pts(&[(0.0, 0.0), (5.0, 5.0), (9.0, 1.0), (3.0, 7.0)]);
        let c = form_clusters(&p, 4, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn separated_pairs() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (100.0, 100.0), (101.0, 100.0)]);
        for seed in 0..200 {
            let mut c = form_clusters(&p, 2, &mut ChaCha8Rng::seed_from_u64(seed));
            c.sort_by_key(|c| c.members[0]);
            assert_eq!(c[0].members, ids(&[0, 1]), "seed {seed}");
            assert_eq!(c[1].members, ids(&[2, 3]), "seed {seed}");
        }
    }

    #[test]
    fn duplicate_points_still_partition() {
        let p = pts(&[(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)]);
        let c = form_clusters(&p, 3, &mut ChaCha8Rng::seed_from_u64(0));
        let mut all: Vec<_> = c.iter().flat_map(|c| c.members.clone()).collect();
        all.sort();
        assert_eq!(all, ids(&[0, 1, 2]));
        assert!(c.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn nearest_head_join() {
        let p = pts(&[(0.0, 0.0), (10.0, 0.0), (2.0, 0.0), (8.0, 0.0), (5.0, 0.0)]);
        let c = join_nearest_head(&p, &ids(&[1, 0]));
        assert_eq!(c[0].members, ids(&[0, 2, 4]));
        assert_eq!(c[1].members, ids(&[1, 3]));
    }

    #[test]
    fn cluster_count_rounding() {
        assert_eq!(cluster_count(0.05, 100), 5);
        assert_eq!(cluster_count(0.05, 10), 1);
        assert_eq!(cluster_count(0.05, 0), 0);
        assert_eq!(cluster_count(1.0, 7), 7);
    }

    proptest! {
        #[test]
        fn partition_is_complete_and_disjoint(
            coords in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 1..60),
            k in 1usize..10,
            seed in any::<u64>(),
        ) {
            let p = pts(&coords);
            let a = form_clusters(&p, k, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = form_clusters(&p, k, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(&a, &b);
            prop_assert!(a.len() <= k.min(p.len()));
            let mut all: Vec<_> = a.iter().flat_map(|c| c.members.clone()).collect();
            all.sort();
            prop_assert_eq!(all, p.iter().map(|(id, _)| *id).collect::<Vec<_>>());
            prop_assert!(a.iter().all(|c| !c.is_empty()));
        }
    }
}

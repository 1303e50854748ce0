//! Energy and failure physics: first-order radio costs, diurnal solar
//! harvest into a bounded accumulator, and exponential node reliability.

use crate::model::{NodeSpec, NodeState};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// First-order radio model. Transmission pays the electronics cost plus a
/// free-space (d²) amplifier term below the crossover distance `d0` and a
/// multipath (d⁴) term at or above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioModel {
    /// J/bit spent by transmitter or receiver electronics.
    pub e_elec: f64,
    /// J/bit/m² free-space amplifier.
    pub eps_fs: f64,
    /// J/bit/m⁴ multipath amplifier.
    pub eps_mp: f64,
    /// J/bit/signal for data aggregation at a cluster head.
    pub e_da: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self { e_elec: 50e-9, eps_fs: 10e-12, eps_mp: 0.0013e-12, e_da: 5e-9 }
    }
}

impl RadioModel {
    /// Crossover distance `sqrt(eps_fs / eps_mp)`; always derived, never stored.
    pub fn d0(&self) -> f64 {
        (self.eps_fs / self.eps_mp).sqrt()
    }
}

pub fn tx_energy(radio: &RadioModel, bits: u32, distance: f64) -> f64 {
    let bits = f64::from(bits);
    let amp = if distance < radio.d0() {
        radio.eps_fs * distance * distance
    } else {
        radio.eps_mp * distance.powi(4)
    };
    bits * radio.e_elec + bits * amp
}

pub fn rx_energy(radio: &RadioModel, bits: u32) -> f64 {
    f64::from(bits) * radio.e_elec
}

pub fn aggregate_energy(radio: &RadioModel, bits: u32, signals: u32) -> f64 {
    f64::from(bits) * f64::from(signals) * radio.e_da
}

/// Diurnal solar input, measured in rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolarModel {
    pub day_length: f64,
    pub dawn_offset: f64,
}

impl SolarModel {
    /// One 24-hour day expressed in rounds of the given length.
    pub fn for_round_seconds(round_seconds: f64) -> Self {
        Self { day_length: (86_400.0 / round_seconds).round().max(1.0), dawn_offset: 0.0 }
    }
}

impl Default for SolarModel {
    fn default() -> Self {
        Self::for_round_seconds(30.0)
    }
}

/// Joules collected by `node` during `round_index`: a half-wave rectified
/// sine, zero through the night.
pub fn harvest(solar: &SolarModel, node: &NodeSpec, round_index: u64) -> f64 {
    let phase = TAU * (round_index as f64 - solar.dawn_offset) / solar.day_length;
    node.harvest_peak * phase.sin().max(0.0)
}

/// Adds `amount` joules to the accumulator, spilling whatever exceeds
/// `capacity`. Dead nodes store nothing.
pub fn charge(state: &NodeState, capacity: f64, amount: f64) -> (NodeState, f64) {
    if !state.alive {
        return (state.clone(), amount);
    }
    let total = state.residual_energy + amount;
    let stored = total.min(capacity);
    let overflow = total - stored;
    let mut next = state.clone();
    next.residual_energy = stored;
    (next, overflow)
}

/// Failure rate λ of the exponential reliability model `R(t) = exp(−λt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityParams {
    pub failure_rate: f64,
}

impl ReliabilityParams {
    pub fn new(failure_rate: f64) -> Self {
        Self { failure_rate }
    }
}

/// Probability the node is still working after `t` rounds.
pub fn reliability(params: &ReliabilityParams, t: f64) -> f64 {
    (-params.failure_rate * t).exp()
}

/// Bernoulli draw: does the node fail within the next `dt` rounds?
pub fn sample_failure<R: Rng + ?Sized>(params: &ReliabilityParams, dt: f64, rng: &mut R) -> bool {
    let p = -(-params.failure_rate * dt).exp_m1();
    rng.random::<f64>() < p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeId, NodeKind, Position};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const R: RadioModel = RadioModel { e_elec: 50e-9, eps_fs: 10e-12, eps_mp: 0.0013e-12, e_da: 5e-9 };

    fn close(a: f64, b: f64, rtol: f64) -> bool {
        (a - b).abs() <= rtol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn tx_reference_points() {
        assert!(close(tx_energy(&R, 4000, 0.0), 2.0e-4, 1e-12));
        assert!(close(tx_energy(&R, 4000, 50.0), 3.0e-4, 1e-12));
        assert!(R.d0() > 87.7 && R.d0() < 87.71);
        assert!(close(tx_energy(&R, 4000, 100.0), 7.2e-4, 1e-12));
    }

    #[test]
    fn rx_and_aggregation() {
        assert_eq!(rx_energy(&R, 0), 0.0);
        assert!(close(rx_energy(&R, 4000), 2.0e-4, 1e-12));
        assert_eq!(aggregate_energy(&R, 4000, 0), 0.0);
        assert!(close(aggregate_energy(&R, 4000, 10), 2.0e-4, 1e-12));
        assert_eq!(aggregate_energy(&R, 4000, 14), 2.0 * aggregate_energy(&R, 4000, 7));
    }

    #[test]
    fn continuous_at_crossover() {
        let d0 = R.d0();
        let bits = 4000.0;
        let fs = bits * R.eps_fs * d0 * d0;
        let mp = bits * R.eps_mp * d0.powi(4);
        assert!((fs - mp).abs() <= 1e-18_f64.max(1e-12 * fs));
    }

    fn node(peak: f64) -> NodeSpec {
        NodeSpec {
            id: NodeId(0),
            kind: NodeKind::Ordinary,
            position: Position::new(0.0, 0.0),
            initial_energy: 0.5,
            accumulator_capacity: 1.0,
            failure_rate: 0.0,
            harvest_peak: peak,
        }
    }

    #[test]
    fn harvest_shape() {
        let solar = SolarModel { day_length: 1200.0, dawn_offset: 100.0 };
        let n = node(2e-3);
        assert_eq!(harvest(&solar, &n, 100), 0.0);
        assert!(close(harvest(&solar, &n, 400), 2e-3, 1e-12));
        assert!(close(harvest(&solar, &n, 200), 1e-3, 1e-12));
        // night half of the cycle
        assert_eq!(harvest(&solar, &n, 800), 0.0);
        assert_eq!(harvest(&solar, &n, 50), 0.0);
    }

    #[test]
    fn charge_cases() {
        let mut s = NodeState::fresh(&node(0.0));
        s.residual_energy = 0.9;
        let (next, overflow) = charge(&s, 1.0, 0.2);
        assert_eq!(next.residual_energy, 1.0);
        assert!(close(overflow, 0.1, 1e-12));

        let (same, overflow) = charge(&s, 1.0, 0.0);
        assert_eq!((same, overflow), (s.clone(), 0.0));

        s.kill();
        let (dead, overflow) = charge(&s, 1.0, 0.3);
        assert_eq!((dead, overflow), (s, 0.3));
    }

    #[test]
    fn reliability_reference_points() {
        assert_eq!(reliability(&ReliabilityParams::new(0.0), 1e6), 1.0);
        let half = reliability(&ReliabilityParams::new(std::f64::consts::LN_2), 1.0);
        assert!((half - 0.5).abs() < 1e-15);
        let r = reliability(&ReliabilityParams::new(1e-3), 1000.0);
        assert!((r - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn failure_sampling_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert!((0..10_000).all(|_| !sample_failure(&ReliabilityParams::new(0.0), 1.0, &mut rng)));
        assert!((0..10_000).all(|_| sample_failure(&ReliabilityParams::new(1e9), 1.0, &mut rng)));
    }

    #[test]
    fn failure_frequency_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 100_000;
        let hits = (0..draws).filter(|_| sample_failure(&ReliabilityParams::new(0.01), 1.0, &mut rng)).count();
        let p = 1.0 - (-0.01_f64).exp();
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - draws as f64 * p).abs() <= 3.0 * sigma, "{hits} hits");
    }

    proptest! {
        #[test]
        fn tx_monotone(bits in 0u32..100_000, d in 0.0f64..500.0, dd in 0.0f64..100.0, db in 0u32..10_000) {
            prop_assert!(tx_energy(&R, bits, d + dd) >= tx_energy(&R, bits, d));
            prop_assert!(tx_energy(&R, bits + db, d) >= tx_energy(&R, bits, d));
            prop_assert_eq!(rx_energy(&R, bits), tx_energy(&R, bits, 0.0));
        }

        #[test]
        fn reliability_memoryless(lambda in 1e-6f64..1e-1, t1 in 0.0f64..500.0, t2 in 0.0f64..500.0) {
            let p = ReliabilityParams::new(lambda);
            let joint = reliability(&p, t1 + t2);
            prop_assert!((joint - reliability(&p, t1) * reliability(&p, t2)).abs() <= 1e-12 * joint.max(1e-300) + 1e-300);
            prop_assert!(reliability(&p, t1 + 1.0) < reliability(&p, t1));
        }

        #[test]
        fn charge_conserves(residual in 0.0f64..2.0, cap in 0.0f64..2.0, amount in 0.0f64..1.0) {
            let mut s = NodeState::fresh(&node(0.0));
            s.residual_energy = residual.min(cap).max(1e-9);
            let before = s.residual_energy;
            let (next, overflow) = charge(&s, cap.max(before), amount);
            prop_assert!(next.residual_energy <= cap.max(before));
            prop_assert!(overflow >= 0.0);
            prop_assert!((next.residual_energy + overflow - (before + amount)).abs() <= 1e-15);
        }
    }
}

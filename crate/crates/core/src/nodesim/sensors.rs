//! Water-quality probes and the synthetic water body they observe.

use crate::model::Position;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// An error bound either in engineering units or as a fraction of the reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spread {
    Absolute(f64),
    Relative(f64),
}

impl Spread {
    pub fn at(self, reading: f64) -> f64 {
        match self {
            Spread::Absolute(v) => v,
            Spread::Relative(f) => f * reading.abs(),
        }
    }

    fn value(self) -> f64 {
        match self {
            Spread::Absolute(v) | Spread::Relative(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorModel {
    pub min: f64,
    pub max: f64,
    pub resolution: f64,
    pub accuracy: Spread,
    pub noise_sigma: Spread,
}

impl SensorModel {
    /// Temperature probe: −15..70 °C, 0.1 °C steps, ±0.3 °C.
    ///
    /// The probe's datasheet table lists the range as 15..70 °C while its
    /// prose gives −15..70 °C; the wider range is used.
    pub fn temperature() -> Self {
        Self {
            min: -15.0,
            max: 70.0,
            resolution: 0.1,
            accuracy: Spread::Absolute(0.3),
            noise_sigma: Spread::Absolute(0.15),
        }
    }

    /// pH probe: 0..14, 0.01 steps, ±0.2.
    pub fn ph() -> Self {
        Self {
            min: 0.0,
            max: 14.0,
            resolution: 0.01,
            accuracy: Spread::Absolute(0.2),
            noise_sigma: Spread::Absolute(0.1),
        }
    }

    /// Conductivity probe: 0..200 mS/cm at the finest 0.0001 mS/cm step,
    /// ±1 % of reading.
    pub fn conductivity() -> Self {
        Self {
            min: 0.0,
            max: 200.0,
            resolution: 0.0001,
            accuracy: Spread::Relative(0.01),
            noise_sigma: Spread::Relative(0.005),
        }
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            out.push(format!("range [{}, {}] must satisfy min < max", self.min, self.max));
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            out.push(format!("resolution must be > 0 (got {})", self.resolution));
        }
        for (name, spread) in [("accuracy", self.accuracy), ("noise_sigma", self.noise_sigma)] {
            if !(spread.value().is_finite() && spread.value() >= 0.0) {
                out.push(format!("{name} must be finite and >= 0"));
            }
        }
        out
    }

    fn steps_per_unit(&self) -> Option<f64> {
        let inv = 1.0 / self.resolution;
        ((inv - inv.round()).abs() < 1e-9 * inv).then(|| inv.round())
    }

    /// Rounds half-up to the nearest resolution multiple inside the range.
    pub fn quantize(&self, value: f64) -> f64 {
        let v = value.clamp(self.min, self.max);
        // k / steps is correctly rounded, k * 0.01 is not
        let steps = self.steps_per_unit();
        let to_value = |k: f64| match steps {
            Some(s) => k / s,
            None => k * self.resolution,
        };
        let k = match steps {
            Some(s) => (v * s + 0.5).floor(),
            None => (v / self.resolution + 0.5).floor(),
        };
        let mut q = to_value(k);
        if q > self.max {
            q = to_value(k - 1.0);
        } else if q < self.min {
            q = to_value(k + 1.0);
        }
        // normalise -0.0
        q + 0.0
    }

    /// True when `value` lies in range and on the resolution grid.
    pub fn is_valid_reading(&self, value: f64) -> bool {
        if !(value >= self.min && value <= self.max) {
            return false;
        }
        let k = value / self.resolution;
        (k - k.round()).abs() <= 1e-6
    }
}

/// Noisy, clamped, quantized reading of `truth`.
pub fn sample_sensor<R: Rng + ?Sized>(model: &SensorModel, truth: f64, rng: &mut R) -> f64 {
    let sigma = model.noise_sigma.at(truth);
    let noisy = if sigma > 0.0 {
        truth + Normal::new(0.0, sigma).expect("sigma is finite and positive").sample(rng)
    } else {
        truth
    };
    model.quantize(noisy)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gradient {
    pub x: f64,
    pub y: f64,
}

/// Synthetic ground truth: a linear spatial trend plus a daily cycle for
/// each of temperature (°C), pH and conductivity (mS/cm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaterProfile {
    pub base_temp: f64,
    pub base_ph: f64,
    pub base_cond: f64,
    pub temp_gradient: Gradient,
    pub ph_gradient: Gradient,
    pub cond_gradient: Gradient,
    pub temp_amplitude: f64,
    pub ph_amplitude: f64,
    pub cond_amplitude: f64,
    pub day_seconds: f64,
}

impl Default for WaterProfile {
    fn default() -> Self {
        Self {
            base_temp: 25.0,
            base_ph: 7.0,
            base_cond: 0.5,
            temp_gradient: Gradient { x: 0.01, y: -0.005 },
            ph_gradient: Gradient { x: 0.002, y: 0.0 },
            cond_gradient: Gradient { x: 0.0005, y: 0.001 },
            temp_amplitude: 1.5,
            ph_amplitude: 0.1,
            cond_amplitude: 0.02,
            day_seconds: 86_400.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterTruth {
    pub temperature: f64,
    pub ph: f64,
    pub conductivity: f64,
}

impl WaterProfile {
    /// Extremes each quantity can reach anywhere in a `width × height` field,
    /// in the order temperature, pH, conductivity.
    pub fn truth_bounds(&self, width: f64, height: f64) -> [(f64, f64); 3] {
        let span = |base: f64, g: Gradient, amp: f64| {
            let xs = [0.0, g.x * width];
            let ys = [0.0, g.y * height];
            let lo = base + xs[0].min(xs[1]) + ys[0].min(ys[1]) - amp.abs();
            let hi = base + xs[0].max(xs[1]) + ys[0].max(ys[1]) + amp.abs();
            (lo, hi)
        };
        [
            span(self.base_temp, self.temp_gradient, self.temp_amplitude),
            span(self.base_ph, self.ph_gradient, self.ph_amplitude),
            span(self.base_cond, self.cond_gradient, self.cond_amplitude),
        ]
    }
}

pub fn truth_at(profile: &WaterProfile, pos: Position, time: f64) -> WaterTruth {
    let diurnal = (TAU * time / profile.day_seconds).sin();
    let field = |base: f64, g: Gradient, amp: f64| base + g.x * pos.x + g.y * pos.y + amp * diurnal;
    WaterTruth {
        temperature: field(profile.base_temp, profile.temp_gradient, profile.temp_amplitude),
        ph: field(profile.base_ph, profile.ph_gradient, profile.ph_amplitude),
        conductivity: field(profile.base_cond, profile.cond_gradient, profile.cond_amplitude),
    }
}

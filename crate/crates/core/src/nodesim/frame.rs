//! Measurement frame wire format.
//!
//! One ASCII line per frame:
//!
//! ```text
//! AWQMP,<node_id>,<seq>,<timestamp>,<temp>,<ph>,<cond>,<energy>\n
//! ```
//!
//! Temperature carries 1 decimal, pH 2, conductivity 4 and residual energy
//! 6. Decoding is strict: any other layout is rejected, so every accepted
//! line re-encodes to itself.

use super::sensors::SensorModel;
use crate::model::SensorSpecs;
use thiserror::Error;

pub const MAGIC: &str = "AWQMP";
const ENERGY_DECIMALS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementFrame {
    pub node_id: u32,
    pub sequence: u64,
    /// Seconds since deployment.
    pub timestamp: u64,
    /// °C
    pub temperature: f64,
    pub ph: f64,
    /// mS/cm
    pub conductivity: f64,
    /// Joules
    pub residual_energy: f64,
}

impl MeasurementFrame {
    /// Builds a frame with every reading snapped onto its sensor grid and
    /// the energy rounded to the wire precision.
    #[allow(clippy::too_many_arguments)]
    pub fn quantized(
        specs: &SensorSpecs,
        node_id: u32,
        sequence: u64,
        timestamp: u64,
        temperature: f64,
        ph: f64,
        conductivity: f64,
        residual_energy: f64,
    ) -> Self {
        Self {
            node_id,
            sequence,
            timestamp,
            temperature: specs.temperature.quantize(temperature),
            ph: specs.ph.quantize(ph),
            conductivity: specs.conductivity.quantize(conductivity),
            residual_energy: quantize_energy(residual_energy),
        }
    }
}

pub fn quantize_energy(joules: f64) -> f64 {
    (joules.max(0.0) * 1e6 + 0.5).floor() / 1e6 + 0.0
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("{field} value {value} is outside the sensor range")]
    OutOfRange { field: &'static str, value: f64 },
}

pub fn encode_frame(frame: &MeasurementFrame) -> Vec<u8> {
    format!(
        "{MAGIC},{},{},{},{:.1},{:.2},{:.4},{:.*}\n",
        frame.node_id,
        frame.sequence,
        frame.timestamp,
        frame.temperature,
        frame.ph,
        frame.conductivity,
        ENERGY_DECIMALS,
        frame.residual_energy,
    )
    .into_bytes()
}

/// Decodes against the default probe ranges.
pub fn decode_frame(bytes: &[u8]) -> Result<MeasurementFrame, FrameError> {
    decode_frame_with(bytes, &SensorSpecs::default())
}

pub fn decode_frame_with(bytes: &[u8], specs: &SensorSpecs) -> Result<MeasurementFrame, FrameError> {
    let text = std::str::from_utf8(bytes).map_err(|_| malformed("not UTF-8"))?;
    let line = text.strip_suffix('\n').unwrap_or(text);
    if line.contains(['\n', '\r']) {
        return Err(malformed("more than one line"));
    }
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 8 {
        return Err(malformed(&format!("expected 8 fields, found {}", fields.len())));
    }
    if fields[0] != MAGIC {
        return Err(malformed("bad magic"));
    }

    let node_id = unsigned(fields[1], "node_id")?
        .try_into()
        .map_err(|_| malformed("node_id does not fit in 32 bits"))?;
    let frame = MeasurementFrame {
        node_id,
        sequence: unsigned(fields[2], "sequence")?,
        timestamp: unsigned(fields[3], "timestamp")?,
        temperature: fixed(fields[4], 1, "temperature")?,
        ph: fixed(fields[5], 2, "ph")?,
        conductivity: fixed(fields[6], 4, "conductivity")?,
        residual_energy: fixed(fields[7], ENERGY_DECIMALS, "residual_energy")?,
    };

    in_range(&specs.temperature, frame.temperature, "temperature")?;
    in_range(&specs.ph, frame.ph, "ph")?;
    in_range(&specs.conductivity, frame.conductivity, "conductivity")?;
    if frame.residual_energy < 0.0 {
        return Err(FrameError::OutOfRange { field: "residual_energy", value: frame.residual_energy });
    }
    Ok(frame)
}

fn malformed(msg: &str) -> FrameError {
    FrameError::Malformed(msg.to_string())
}

fn canonical_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

fn unsigned(s: &str, field: &str) -> Result<u64, FrameError> {
    if !canonical_digits(s) {
        return Err(malformed(&format!("{field} is not a canonical unsigned integer")));
    }
    s.parse().map_err(|_| malformed(&format!("{field} overflows")))
}

fn fixed(s: &str, decimals: usize, field: &str) -> Result<f64, FrameError> {
    let unsigned_part = s.strip_prefix('-').unwrap_or(s);
    let ok = match unsigned_part.split_once('.') {
        Some((int, frac)) => {
            canonical_digits(int) && frac.len() == decimals && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    };
    if !ok {
        return Err(malformed(&format!("{field} must have exactly {decimals} decimals")));
    }
    let value: f64 = s.parse().map_err(|_| malformed(&format!("{field} is not a number")))?;
    if value == 0.0 && s.starts_with('-') {
        return Err(malformed(&format!("{field} is negative zero")));
    }
    Ok(value)
}

fn in_range(model: &SensorModel, value: f64, field: &'static str) -> Result<(), FrameError> {
    if value < model.min || value > model.max {
        Err(FrameError::OutOfRange { field, value })
    } else {
        Ok(())
    }
}

//! What happens inside one sensing node: the acquisition cycle, the probes
//! and the water they measure, and the frame sent toward the base station.

pub mod acquisition;
pub mod frame;
pub mod sensors;

pub use acquisition::{
    clock_event, run_cycle, step_acquisition, AcqState, Action, CycleOutcome, Event, IllegalTransition,
    Phase,
};
pub use frame::{decode_frame, decode_frame_with, encode_frame, FrameError, MeasurementFrame};
pub use sensors::{sample_sensor, truth_at, Gradient, SensorModel, Spread, WaterProfile, WaterTruth};

//! Per-node acquisition cycle: boot, bring up the serial link, wait, then
//! read temperature, pH and conductivity in that order before emitting a
//! frame. A sensor that does not answer in time aborts the cycle.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Boot,
    SerialInit,
    Wait,
    AcqTemp,
    AcqPh,
    AcqCond,
    Send,
}

impl Phase {
    pub const ALL: [Phase; 7] =
        [Phase::Boot, Phase::SerialInit, Phase::Wait, Phase::AcqTemp, Phase::AcqPh, Phase::AcqCond, Phase::Send];

    pub fn is_acquiring(self) -> bool {
        matches!(self, Phase::AcqTemp | Phase::AcqPh | Phase::AcqCond)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    PowerOn,
    /// Wait period elapsed.
    TimerExpired,
    /// The pending step completed: serial link up, sensor answered, or
    /// frame handed to the radio.
    DataReady,
    /// The pending sensor did not answer in time.
    Timeout,
}

impl Event {
    pub const ALL: [Event; 4] = [Event::PowerOn, Event::TimerExpired, Event::DataReady, Event::Timeout];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    None,
    RequestTemp,
    RequestPh,
    RequestCond,
    EmitFrame,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcqState {
    pub phase: Phase,
    /// Seconds spent in the current phase.
    pub phase_elapsed: f64,
    pub cycle_restarts: u64,
}

impl Default for AcqState {
    fn default() -> Self {
        Self { phase: Phase::Boot, phase_elapsed: 0.0, cycle_restarts: 0 }
    }
}

impl AcqState {
    /// A node that has booted and is idling in the wait phase.
    pub fn ready() -> Self {
        Self { phase: Phase::Wait, ..Self::default() }
    }

    pub fn advance(mut self, seconds: f64) -> Self {
        self.phase_elapsed += seconds.max(0.0);
        self
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("event {event:?} is not valid in phase {phase:?}")]
pub struct IllegalTransition {
    pub phase: Phase,
    pub event: Event,
}

/// The transition function. Entering a new phase resets `phase_elapsed`.
pub fn step_acquisition(state: AcqState, event: Event) -> Result<(AcqState, Action), IllegalTransition> {
    use Phase::*;
    let (phase, action, restarted) = match (state.phase, event) {
        (Boot, Event::PowerOn) => (SerialInit, Action::None, false),
        (SerialInit, Event::DataReady) => (Wait, Action::None, false),
        (Wait, Event::TimerExpired) => (AcqTemp, Action::RequestTemp, false),
        (AcqTemp, Event::DataReady) => (AcqPh, Action::RequestPh, false),
        (AcqPh, Event::DataReady) => (AcqCond, Action::RequestCond, false),
        (AcqCond, Event::DataReady) => (Send, Action::EmitFrame, false),
        (AcqTemp | AcqPh | AcqCond, Event::Timeout) => (Wait, Action::None, true),
        (Send, Event::DataReady) => (Wait, Action::None, false),
        (phase, event) => return Err(IllegalTransition { phase, event }),
    };
    Ok((
        AcqState {
            phase,
            phase_elapsed: 0.0,
            cycle_restarts: state.cycle_restarts + u64::from(restarted),
        },
        action,
    ))
}

/// Time-driven event source: given how long the node has been in its
/// phase, returns the event the clock would raise, if any.
pub fn clock_event(state: &AcqState, wait_seconds: f64, timeout_seconds: f64) -> Option<Event> {
    match state.phase {
        Phase::Wait if state.phase_elapsed >= wait_seconds => Some(Event::TimerExpired),
        p if p.is_acquiring() && state.phase_elapsed >= timeout_seconds => Some(Event::Timeout),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOutcome {
    pub state: AcqState,
    pub emitted: bool,
}

/// Drives one full cycle from `Wait` back to `Wait`. `fail_at` names the
/// acquisition phase whose sensor stays silent, if any.
pub fn run_cycle(
    state: AcqState,
    fail_at: Option<Phase>,
    wait_seconds: f64,
    timeout_seconds: f64,
) -> Result<CycleOutcome, IllegalTransition> {
    let mut state = state;
    // a node still booting comes up first
    if state.phase == Phase::Boot {
        state = step_acquisition(state, Event::PowerOn)?.0;
    }
    if state.phase == Phase::SerialInit {
        state = step_acquisition(state, Event::DataReady)?.0;
    }
    let mut emitted = false;
    state = state.advance(wait_seconds);
    let event = clock_event(&state, wait_seconds, timeout_seconds).unwrap_or(Event::TimerExpired);
    state = step_acquisition(state, event)?.0;
    while state.phase != Phase::Wait {
        let event = if Some(state.phase) == fail_at {
            state = state.advance(timeout_seconds);
            clock_event(&state, wait_seconds, timeout_seconds).unwrap_or(Event::Timeout)
        } else {
            Event::DataReady
        };
        let (next, action) = step_acquisition(state, event)?;
        emitted |= action == Action::EmitFrame;
        state = next;
    }
    Ok(CycleOutcome { state, emitted })
}

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::state::{Mode, SimState, TiltState};

/// Speed below which the vehicle counts as at rest for a transition.
pub const TRANSITION_SPEED_LIMIT_MPS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum TransitionRejected {
    #[error("already in {0:?}")]
    SameMode(Mode),
    #[error("a transition is already running")]
    Busy,
    #[error("cannot target {0:?}")]
    InvalidTarget(Mode),
    #[error("{from:?} -> {to:?} needs all four wheels on a surface")]
    NotInContact { from: Mode, to: Mode },
    #[error("speed {speed_mps:.3} m/s above the {limit_mps} m/s transition limit")]
    Moving { speed_mps: f64, limit_mps: f64 },
    #[error("{from:?} -> {to:?} is not a supported transition")]
    Unsupported { from: Mode, to: Mode },
}

/// Linear sweep of both axles from one configuration to another. The front
/// axle moves through the flight position when it changes sense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltSchedule {
    pub from_mode: Mode,
    pub target_mode: Mode,
    pub start: TiltState,
    pub end: TiltState,
    pub duration_s: f64,
}

impl TiltSchedule {
    pub fn new(from_mode: Mode, target_mode: Mode, start: TiltState, end: TiltState, tilt_time_s: f64) -> Self {
        let rate = 90.0 / tilt_time_s;
        let sweep = (end.front_signed() - start.front_signed()).abs().max((end.rear_deg - start.rear_deg).abs());
        Self { from_mode, target_mode, start, end, duration_s: sweep / rate }
    }

    /// Axle configuration `elapsed_s` after the start.
    pub fn at(&self, elapsed_s: f64) -> TiltState {
        if elapsed_s >= self.duration_s {
            return self.end;
        }
        let f = (elapsed_s / self.duration_s).max(0.0);
        let lerp = |a: f64, b: f64| a + (b - a) * f;
        TiltState::from_signed(
            lerp(self.start.front_signed(), self.end.front_signed()),
            lerp(self.start.rear_deg, self.end.rear_deg),
        )
    }

    /// Tilt setpoints sampled every `interval_s`, end point included.
    pub fn samples(&self, interval_s: f64) -> Vec<(f64, TiltState)> {
        let n = (self.duration_s / interval_s).ceil() as usize;
        (0..=n).map(|k| (k as f64 * interval_s).min(self.duration_s)).map(|t| (t, self.at(t))).collect()
    }
}

/// Plans the axle sweep for `state.mode → target` or says why it cannot run.
///
/// Every supported transition happens at rest with all wheels down: leaving
/// the ground for flight, landing, and rolling onto a wall from its foot.
pub fn mode_transition(state: &SimState, target: Mode, tilt_time_s: f64) -> Result<TiltSchedule, TransitionRejected> {
    if state.transition.is_some() || state.mode == Mode::Transition {
        return Err(TransitionRejected::Busy);
    }
    if state.mode == target {
        return Err(TransitionRejected::SameMode(target));
    }
    let end = TiltState::for_mode(target).ok_or(TransitionRejected::InvalidTarget(target))?;
    let supported = matches!(
        (state.mode, target),
        (Mode::Flight, Mode::Ground | Mode::Incline)
            | (Mode::Ground | Mode::Incline, Mode::Flight)
            | (Mode::Ground, Mode::Wall)
            | (Mode::Wall, Mode::Ground)
            | (Mode::Ground, Mode::Incline)
            | (Mode::Incline, Mode::Ground)
    );
    if !supported {
        return Err(TransitionRejected::Unsupported { from: state.mode, to: target });
    }
    if !state.all_wheels_in_contact() {
        return Err(TransitionRejected::NotInContact { from: state.mode, to: target });
    }
    let speed = state.speed();
    if speed >= TRANSITION_SPEED_LIMIT_MPS {
        return Err(TransitionRejected::Moving { speed_mps: speed, limit_mps: TRANSITION_SPEED_LIMIT_MPS });
    }
    Ok(TiltSchedule::new(state.mode, target, state.tilt, end, tilt_time_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SurfaceModel;
    use crate::vehicle::VehicleParams;
    use nalgebra::Vector3;

    #[test]
    fn landing_sweep_takes_one_tilt_time() {
        let state = SimState::resting(&VehicleParams::default(), &SurfaceModel::flat(), Mode::Flight, 0.0);
        let s = mode_transition(&state, Mode::Ground, 1.0).unwrap();
        assert_eq!(s.duration_s, 1.0);
        assert_eq!(s.at(0.5).front_deg, 45.0);
        assert_eq!(s.at(2.0), TiltState::GROUND);
    }

    #[test]
    fn wall_sweep_crosses_flight_position() {
        let state = SimState::resting(&VehicleParams::default(), &SurfaceModel::flat(), Mode::Ground, 0.0);
        let s = mode_transition(&state, Mode::Wall, 1.0).unwrap();
        assert_eq!(s.duration_s, 2.5);
        assert_eq!(s.at(2.5), TiltState::WALL);
        assert!(s.samples(0.1).iter().all(|(_, t)| (0.0..=180.0).contains(&t.front_deg)));
    }

    #[test]
    fn airborne_landing_is_rejected() {
        let state = SimState::hovering(Vector3::new(0.0, 0.0, -5.0), 0.0);
        assert!(matches!(mode_transition(&state, Mode::Ground, 1.0), Err(TransitionRejected::NotInContact { .. })));
    }

    #[test]
    fn moving_vehicle_is_rejected() {
        let mut state = SimState::resting(&VehicleParams::default(), &SurfaceModel::flat(), Mode::Ground, 0.0);
        state.velocity.x = 1.0;
        assert!(matches!(mode_transition(&state, Mode::Flight, 1.0), Err(TransitionRejected::Moving { .. })));
    }
}

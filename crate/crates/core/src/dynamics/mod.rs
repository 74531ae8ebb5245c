//! Time-stepped rigid-body simulation in every locomotion mode.
//!
//! On a surface the wheels are a velocity constraint: motion stays in the
//! plane and only yaw rotates the body. In flight the vehicle is a free
//! 6-DOF body under a cascaded position controller. Mode changes sweep the
//! tilt axles while the vehicle sits still.

mod config;
mod run;
mod sim;
mod state;
mod surface;
mod trace;
mod transition;

pub use config::{ControllerGains, DrivetrainLosses, Geofence, SimConfig};
pub use run::{run_script, RejectedTransition, RunOptions, RunStop, ScriptAction, ScriptEntry, SimRun};
pub use sim::{allocate_ground, FaultKind, GroundAllocation, SimError, SimFault, Simulator, TipAxis};
pub use state::{ActiveTransition, AxleSense, ControlSetpoint, ControllerMemory, Mode, SimState, TiltState};
pub use surface::{SurfaceKind, SurfaceModel};
pub use trace::{TraceWriter, TRACE_COLUMNS};
pub use transition::{mode_transition, TiltSchedule, TransitionRejected, TRANSITION_SPEED_LIMIT_MPS};

use serde::{Deserialize, Serialize};

use super::sim::{SimFault, Simulator};
use super::state::{ControlSetpoint, Mode, SimState};
use super::surface::SurfaceModel;
use super::trace::TraceWriter;
use super::transition::TransitionRejected;
use crate::energy::{Battery, BatteryId, EnergyError, EnergyLedger, ProtectionEvent};

/// Something to do at a scheduled time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ScriptAction {
    Setpoint { setpoint: ControlSetpoint },
    Transition { target: Mode },
    Surface { surface: SurfaceModel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub time_s: f64,
    #[serde(flatten)]
    pub action: ScriptAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub dt_s: f64,
    pub duration_s: f64,
    /// Keep one trace row per this many steps.
    pub trace_decimation: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { dt_s: 0.001, duration_s: 10.0, trace_decimation: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedTransition {
    pub time_s: f64,
    pub target: Mode,
    pub reason: TransitionRejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunStop {
    Completed,
    Fault(SimFault),
    /// A propulsion pack tripped its protection.
    BatteryProtection(BatteryId),
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub trace_csv: String,
    pub ledger: EnergyLedger,
    pub final_state: SimState,
    pub stop: RunStop,
    pub protection_events: Vec<ProtectionEvent>,
    pub rejected_transitions: Vec<RejectedTransition>,
    /// Path length travelled by the center of mass.
    pub distance_m: f64,
    pub batteries: Vec<Battery>,
}

impl SimRun {
    pub fn completed(&self) -> bool {
        self.stop == RunStop::Completed
    }
}

/// Steps `initial` through `script` for `options.duration_s`, booking
/// propulsion energy per mode and draining the packs. Propulsion power is
/// split evenly over the propulsion packs; the avionics draw comes from the
/// electronics pack.
pub fn run_script(
    sim: &Simulator,
    initial: SimState,
    surface: SurfaceModel,
    script: &[ScriptEntry],
    options: &RunOptions,
    mut batteries: Vec<Battery>,
) -> SimRun {
    let mut script: Vec<&ScriptEntry> = script.iter().collect();
    script.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
    let mut pending = script.into_iter().peekable();

    let dt = options.dt_s;
    let steps = (options.duration_s / dt).round() as usize;
    let mut state = initial;
    let mut surface = surface;
    let mut setpoint = ControlSetpoint::Idle;
    let mut trace = TraceWriter::new(options.trace_decimation);
    let mut ledger = EnergyLedger::new();
    let mut events = Vec::new();
    let mut rejected = Vec::new();
    let mut distance = 0.0;
    let mut stop = RunStop::Completed;
    let propulsion_count = batteries.iter().filter(|b| b.id.is_propulsion()).count().max(1) as f64;

    trace.push(&state);
    'steps: for _ in 0..steps {
        while let Some(entry) = pending.next_if(|e| e.time_s <= state.time_s + 1e-9) {
            match &entry.action {
                ScriptAction::Setpoint { setpoint: sp } => setpoint = *sp,
                ScriptAction::Surface { surface: s } => surface = *s,
                ScriptAction::Transition { target } => match sim.begin_transition(&state, *target) {
                    Ok(s) => state = s,
                    Err(reason) => rejected.push(RejectedTransition { time_s: state.time_s, target: *target, reason }),
                },
            }
        }
        let next = match sim.step(&state, &setpoint, &surface, dt) {
            Ok(next) => next,
            Err(fault) => {
                stop = RunStop::Fault(fault);
                break;
            }
        };
        ledger.record(state.mode.name(), state.time_s, next.power_w, dt);
        for battery in batteries.iter_mut() {
            let power = if battery.id.is_propulsion() {
                next.power_w / propulsion_count
            } else {
                sim.config().avionics_power_w
            };
            match battery.drain(power, dt) {
                Ok(out) => {
                    ledger.record_draw(battery.id, out.drawn_ah);
                    if !battery.id.is_propulsion() {
                        ledger.record_avionics(out.delivered_wh);
                    }
                    if let Some(event) = out.event {
                        events.push(event);
                        if battery.id.is_propulsion() {
                            stop = RunStop::BatteryProtection(battery.id);
                        }
                    }
                }
                Err(EnergyError::Protection(_)) => {}
                Err(e) => unreachable!("drain input is finite and non-negative: {e}"),
            }
        }
        distance += (next.position - state.position).norm();
        state = next;
        trace.push(&state);
        if stop != RunStop::Completed {
            break 'steps;
        }
    }
    SimRun {
        trace_csv: trace.finish(),
        ledger,
        final_state: state,
        stop,
        protection_events: events,
        rejected_transitions: rejected,
        distance_m: distance,
        batteries,
    }
}

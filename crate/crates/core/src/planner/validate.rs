use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::search::{LegMode, MissionPlan, PlanLeg};
use super::terrain::{Cell, TerrainGrid};
use super::PlanError;
use crate::dynamics::{ControlSetpoint, FaultKind, Mode, SimConfig, SimState, Simulator, SurfaceModel};
use crate::energy::{Battery, EnergyLedger};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationOptions {
    /// Relative energy deviation above which a leg is flagged.
    pub tolerance_frac: f64,
    pub dt_s: f64,
    pub fly_clearance_m: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { tolerance_frac: 0.15, dt_s: 0.001, fly_clearance_m: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegReport {
    pub index: usize,
    pub mode: LegMode,
    pub predicted_wh: f64,
    pub simulated_wh: f64,
    pub simulated_duration_s: f64,
    pub deviation_frac: f64,
    /// Transition legs are reported but not held to the tolerance.
    pub checked: bool,
    pub flagged: bool,
    pub fault: Option<FaultKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub legs: Vec<LegReport>,
    pub predicted_total_wh: f64,
    pub simulated_total_wh: f64,
    pub total_deviation_frac: f64,
    /// Whether draining the packs with the predicted leg energies tripped
    /// over-discharge protection.
    pub protection_tripped: bool,
    pub passed: bool,
}

fn deviation(simulated: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        if simulated == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (simulated - predicted) / predicted
    }
}

struct LegOutcome {
    energy_wh: f64,
    duration_s: f64,
    fault: Option<FaultKind>,
}

/// Flies or drives every leg of `plan` in the simulator and compares the
/// energy it took with the prediction. Drive segments start at cruise speed
/// on a plane with the segment's slope; fly legs start at cruise speed at
/// clearance height and chase a point ahead on the path.
pub fn validate_plan(
    plan: &MissionPlan,
    terrain: &TerrainGrid,
    sim: &Simulator,
    ledger: &mut EnergyLedger,
    batteries: &[Battery],
    options: &ValidationOptions,
) -> Result<ValidationReport, PlanError> {
    let mut clock = 0.0;
    let mut legs = Vec::with_capacity(plan.legs.len());
    for (index, leg) in plan.legs.iter().enumerate() {
        for &c in &leg.cells {
            if !terrain.contains(c) {
                return Err(PlanError::OutOfBounds(c));
            }
        }
        let outcome = match leg.mode {
            LegMode::Drive => drive_leg(sim, terrain, leg, options, ledger, &mut clock),
            LegMode::Fly => fly_leg(sim, terrain, leg, options, ledger, &mut clock)?,
            LegMode::TransitionToFly | LegMode::TransitionToGround => {
                transition_leg(sim, leg, options, ledger, &mut clock)
            }
        };
        let checked = matches!(leg.mode, LegMode::Drive | LegMode::Fly);
        let deviation_frac = deviation(outcome.energy_wh, leg.energy_wh);
        legs.push(LegReport {
            index,
            mode: leg.mode,
            predicted_wh: leg.energy_wh,
            simulated_wh: outcome.energy_wh,
            simulated_duration_s: outcome.duration_s,
            deviation_frac,
            checked,
            flagged: checked && deviation_frac.abs() > options.tolerance_frac,
            fault: outcome.fault,
        });
    }

    let mut packs: Vec<Battery> = batteries.iter().filter(|b| b.id.is_propulsion()).cloned().collect();
    let share = packs.len().max(1) as f64;
    let mut protection_tripped = false;
    for leg in &plan.legs {
        for pack in packs.iter_mut() {
            // One second at the leg's mean power delivers its energy.
            match pack.drain(leg.energy_wh * 3600.0 / share, 1.0) {
                Ok(out) => protection_tripped |= out.event.is_some(),
                Err(_) => protection_tripped = true,
            }
        }
    }

    let predicted_total_wh = plan.legs.iter().map(|l| l.energy_wh).sum();
    let simulated_total_wh = legs.iter().map(|l| l.simulated_wh).sum();
    let passed = !protection_tripped && legs.iter().all(|l| l.fault.is_none() && !l.flagged);
    Ok(ValidationReport {
        total_deviation_frac: deviation(simulated_total_wh, predicted_total_wh),
        legs,
        predicted_total_wh,
        simulated_total_wh,
        protection_tripped,
        passed,
    })
}

fn world(terrain: &TerrainGrid, cell: Cell, height: f64) -> Vector3<f64> {
    let s = terrain.cell_size_m();
    Vector3::new(cell.0 as f64 * s, cell.1 as f64 * s, -(terrain.elevation(cell) + height))
}

fn drive_leg(
    sim: &Simulator,
    terrain: &TerrainGrid,
    leg: &PlanLeg,
    options: &ValidationOptions,
    ledger: &mut EnergyLedger,
    clock: &mut f64,
) -> LegOutcome {
    let params = sim.params();
    let dt = options.dt_s;
    let mut total = LegOutcome { energy_wh: 0.0, duration_s: 0.0, fault: None };
    for pair in leg.cells.windows(2) {
        let rise = terrain.elevation(pair[1]) - terrain.elevation(pair[0]);
        let slope = terrain.gradient_deg(pair[0], pair[1]);
        let mut surface = if slope == 0.0 { SurfaceModel::flat() } else { SurfaceModel::incline(slope) };
        surface.rolling_resistance = params.rolling_resistance_coeff;
        let mode = if slope == 0.0 { Mode::Ground } else { Mode::Incline };
        let heading = if rise < 0.0 { std::f64::consts::PI } else { 0.0 };
        let mut state = SimState::resting(params, &surface, mode, heading);
        state.velocity = state.attitude * Vector3::x() * leg.speed_mps;
        let setpoint = ControlSetpoint::Ground { speed_mps: leg.speed_mps, yaw_rate_radps: 0.0 };
        let length = terrain.cell_size_m().hypot(rise);
        let limit = 5.0 * length / leg.speed_mps;
        let mut travelled = 0.0;
        let mut elapsed = 0.0;
        while travelled < length {
            if elapsed > limit {
                total.fault = Some(FaultKind::Diverged);
                return total;
            }
            match sim.step(&state, &setpoint, &surface, dt) {
                Ok(next) => {
                    travelled += (next.position - state.position).norm();
                    book(ledger, clock, mode.name(), next.power_w, dt, &mut total);
                    elapsed += dt;
                    state = next;
                }
                Err(fault) => {
                    total.fault = Some(fault.kind);
                    return total;
                }
            }
        }
    }
    total
}

fn book(ledger: &mut EnergyLedger, clock: &mut f64, mode: &str, power_w: f64, dt: f64, out: &mut LegOutcome) {
    ledger.record(mode, *clock, power_w, dt);
    *clock += dt;
    out.energy_wh += power_w * dt / 3600.0;
    out.duration_s += dt;
}

/// Simulator with the flight speed limit set to `speed`.
fn with_flight_speed(sim: &Simulator, speed: f64) -> Result<Simulator, PlanError> {
    let mut config: SimConfig = sim.config().clone();
    config.gains.flight_max_horizontal_speed_mps = speed;
    Simulator::new(sim.params().clone(), sim.rotor().clone(), config)
        .map_err(|e| PlanError::InvalidConfig(e.to_string()))
}

fn fly_leg(
    sim: &Simulator,
    terrain: &TerrainGrid,
    leg: &PlanLeg,
    options: &ValidationOptions,
    ledger: &mut EnergyLedger,
    clock: &mut f64,
) -> Result<LegOutcome, PlanError> {
    let sim = with_flight_speed(sim, leg.speed_mps)?;
    let dt = options.dt_s;
    let height = options.fly_clearance_m + sim.params().com_height;
    let points: Vec<Vector3<f64>> = leg.cells.iter().map(|&c| world(terrain, c, height)).collect();
    let mut total = LegOutcome { energy_wh: 0.0, duration_s: 0.0, fault: None };
    if points.len() < 2 {
        return Ok(total);
    }
    let lookahead = leg.speed_mps / sim.config().gains.flight_position_p_per_s;
    let mut state = SimState::hovering(points[0], 0.0);
    state.velocity = (points[1] - points[0]).normalize() * leg.speed_mps;
    state.velocity.z = 0.0;
    let nominal: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum::<f64>() / leg.speed_mps;
    let surface = SurfaceModel::flat();
    let mut k = 1;
    while k < points.len() {
        let (a, b) = (points[k - 1], points[k]);
        let dir = (b - a).normalize();
        if (state.position - a).dot(&dir) >= (b - a).norm() {
            k += 1;
            continue;
        }
        if total.duration_s > 5.0 * nominal + 10.0 {
            total.fault = Some(FaultKind::Diverged);
            break;
        }
        let target = b + dir * lookahead;
        let setpoint = ControlSetpoint::Flight { position_m: target.into(), yaw_rad: 0.0 };
        match sim.step(&state, &setpoint, &surface, dt) {
            Ok(next) => {
                book(ledger, clock, "flight", next.power_w, dt, &mut total);
                state = next;
            }
            Err(fault) => {
                total.fault = Some(fault.kind);
                break;
            }
        }
    }
    Ok(total)
}

/// Axle sweep on the ground plus the vertical move between the ground and
/// clearance height, in the order the transition needs.
fn transition_leg(
    sim: &Simulator,
    leg: &PlanLeg,
    options: &ValidationOptions,
    ledger: &mut EnergyLedger,
    clock: &mut f64,
) -> LegOutcome {
    let dt = options.dt_s;
    let params = sim.params();
    let flat = SurfaceModel::flat();
    // Cell-local frame, so the flat model's ground plane is the cell itself.
    let ground = Vector3::new(0.0, 0.0, -params.com_height);
    let aloft = Vector3::new(0.0, 0.0, -(params.com_height + options.fly_clearance_m));
    let mut total = LegOutcome { energy_wh: 0.0, duration_s: 0.0, fault: None };

    let sweep = |from: Mode, to: Mode, total: &mut LegOutcome, ledger: &mut EnergyLedger, clock: &mut f64| {
        let mut state = SimState::resting(params, &flat, from, 0.0);
        state = match sim.begin_transition(&state, to) {
            Ok(s) => s,
            Err(_) => {
                total.fault = Some(FaultKind::InvalidSetpoint { reason: "transition rejected".into() });
                return;
            }
        };
        while state.mode == Mode::Transition {
            match sim.step(&state, &ControlSetpoint::Idle, &flat, dt) {
                Ok(next) => {
                    book(ledger, clock, "transition", next.power_w, dt, total);
                    state = next;
                }
                Err(fault) => {
                    total.fault = Some(fault.kind);
                    return;
                }
            }
        }
    };

    let (start, goal) = match leg.mode {
        LegMode::TransitionToFly => {
            sweep(Mode::Ground, Mode::Flight, &mut total, ledger, clock);
            (ground, aloft)
        }
        _ => (aloft, ground),
    };
    if total.fault.is_none() {
        let mut state = SimState::hovering(start, 0.0);
        let setpoint = ControlSetpoint::Flight { position_m: goal.into(), yaw_rad: 0.0 };
        let mut elapsed = 0.0;
        while (state.position - goal).norm() > 0.02 && elapsed < 20.0 {
            match sim.step(&state, &setpoint, &flat, dt) {
                Ok(next) => {
                    book(ledger, clock, "flight", next.power_w, dt, &mut total);
                    state = next;
                    elapsed += dt;
                }
                Err(fault) => {
                    total.fault = Some(fault.kind);
                    break;
                }
            }
        }
    }
    if leg.mode == LegMode::TransitionToGround && total.fault.is_none() {
        sweep(Mode::Flight, Mode::Ground, &mut total, ledger, clock);
    }
    total
}

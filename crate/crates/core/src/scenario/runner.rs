use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{Model, PlanTask, Scenario, ScenarioError, SimulateTask, Task};
use crate::dynamics::{
    run_script, ControlSetpoint, FaultKind, Mode, RejectedTransition, RunStop, ScriptAction, SimState, Simulator,
};
use crate::energy::{EnergyLedger, ProtectionEvent};
use crate::planner::{plan, validate_plan, LegMode, MissionPlan, PlanError, TerrainGrid, ValidationReport};
use crate::statics::{incline_equilibrium, tipping_slope, wall_climb_analysis, SlopeAnalysis, WallClimbAnalysis};
use crate::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: String,
    pub seed: u64,
    pub completed: bool,
    pub fault: Option<FaultKind>,
    pub fault_time_s: Option<f64>,
    pub battery_protection: bool,
    pub final_time_s: f64,
    pub final_mode: Mode,
    pub final_position_m: [f64; 3],
    /// Velocity along the body x axis at the end of the run.
    pub final_speed_mps: f64,
    pub target_speed_mps: Option<f64>,
    pub speed_error_frac: Option<f64>,
    pub target_position_m: Option<[f64; 3]>,
    pub position_error_m: Option<f64>,
    pub distance_m: f64,
    pub propulsion_energy_wh: f64,
    pub tipping_slope_deg: f64,
    pub incline: Option<SlopeAnalysis>,
    pub wall: Option<WallClimbAnalysis>,
    pub rejected_transitions: Vec<RejectedTransition>,
    pub protection_events: Vec<ProtectionEvent>,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub report: SimulationReport,
    pub trace_csv: String,
    pub ledger: EnergyLedger,
    pub final_state: SimState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub scenario: String,
    pub seed: u64,
    pub plan: MissionPlan,
    pub fly_legs: usize,
    pub expected_fly_legs: Option<usize>,
    pub validation: Option<ValidationReport>,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub summary: PlanSummary,
    pub terrain: TerrainGrid,
    pub ledger: Option<EnergyLedger>,
}

#[derive(Debug, Clone)]
pub enum ScenarioOutcome {
    Simulation(Box<SimulationOutcome>),
    Plan(Box<PlanOutcome>),
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        match self {
            ScenarioOutcome::Simulation(s) => s.report.passed,
            ScenarioOutcome::Plan(p) => p.summary.passed,
        }
    }

    pub fn failures(&self) -> &[String] {
        match self {
            ScenarioOutcome::Simulation(s) => &s.report.failures,
            ScenarioOutcome::Plan(p) => &p.summary.failures,
        }
    }

    /// Output files as `(file name, contents)`, in a fixed order.
    pub fn files(&self) -> Vec<(&'static str, String)> {
        let json = |v: &dyn erased::Json| v.to_pretty();
        match self {
            ScenarioOutcome::Simulation(s) => vec![
                ("trace.csv", s.trace_csv.clone()),
                ("ledger.json", json(&s.ledger.summary_json())),
                ("report.json", json(&s.report)),
            ],
            ScenarioOutcome::Plan(p) => {
                let mut files =
                    vec![("plan.json", json(&p.summary)), ("waypoints.csv", p.summary.plan.waypoints_csv(&p.terrain))];
                if let Some(ledger) = &p.ledger {
                    files.push(("ledger.json", json(&ledger.summary_json())));
                }
                files
            }
        }
    }

    pub fn write_outputs(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.files()
            .into_iter()
            .map(|(name, contents)| {
                let path = dir.join(name);
                std::fs::write(&path, contents)?;
                Ok(path)
            })
            .collect()
    }
}

mod erased {
    pub trait Json {
        fn to_pretty(&self) -> String;
    }

    impl<T: serde::Serialize> Json for T {
        fn to_pretty(&self) -> String {
            let mut s = serde_json::to_string_pretty(self).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

/// Builds the model and runs the scenario's task. Plans are validated in the
/// simulator only when `validate` is set.
pub fn run_scenario(
    scenario: &Scenario,
    base_dir: &Path,
    validate: bool,
    seed: u64,
) -> Result<ScenarioOutcome, ScenarioError> {
    scenario.validate()?;
    let model = scenario.model.build(base_dir)?;
    let sim = Simulator::new(model.params.clone(), model.rotor.clone(), model.sim_config.clone())
        .map_err(|e| ScenarioError::Model(e.to_string()))?;
    match &scenario.task {
        Task::Simulate(task) => {
            Ok(ScenarioOutcome::Simulation(Box::new(run_simulation(&scenario.name, &model, &sim, task, seed))))
        }
        Task::Plan(task) => run_plan(&scenario.name, &model, &sim, task, base_dir, validate, seed)
            .map(|p| ScenarioOutcome::Plan(Box::new(p))),
    }
}

/// Every bundled scenario, validated, in bundle order.
pub fn run_bundled(execution: Execution) -> Vec<(String, Result<ScenarioOutcome, ScenarioError>)> {
    let scenarios = super::bundled_scenarios();
    execution.map(&scenarios, |s| (s.name.clone(), run_scenario(s, Path::new("."), true, 0)))
}

fn body_forward_speed(state: &SimState) -> f64 {
    state.velocity.dot(&(state.attitude * Vector3::x()))
}

fn run_simulation(name: &str, model: &Model, sim: &Simulator, task: &SimulateTask, seed: u64) -> SimulationOutcome {
    let initial = SimState::resting(&model.params, &task.surface, task.initial_mode, task.heading_deg.to_radians());
    let initial_tilt = initial.tilt;
    let run = run_script(sim, initial, task.surface, &task.script, &task.run, model.batteries.clone());

    let last_setpoint = task.script.iter().rev().find_map(|e| match &e.action {
        ScriptAction::Setpoint { setpoint } => Some(*setpoint),
        _ => None,
    });
    let mut failures = Vec::new();
    let end = &run.final_state;
    let final_speed = body_forward_speed(end);

    let target_speed = last_setpoint.and_then(|sp| sp.speed_target()).filter(|&v| v != 0.0);
    let speed_error = target_speed.map(|v| (final_speed - v).abs() / v.abs());
    if let Some(err) = speed_error {
        if err > task.checks.speed_tolerance_frac {
            failures.push(format!(
                "final speed {final_speed:.4} m/s is {:.2}% off the {:.4} m/s setpoint",
                err * 100.0,
                target_speed.unwrap_or_default()
            ));
        }
    }
    let target_position = match last_setpoint {
        Some(ControlSetpoint::Flight { position_m, .. }) => Some(position_m),
        _ => None,
    };
    let position_error = target_position.map(|p| (end.position - Vector3::from(p)).norm());
    if let Some(err) = position_error {
        if err > task.checks.position_tolerance_m {
            failures.push(format!("final position is {err:.4} m from the flight setpoint"));
        }
    }
    if let Some(min) = task.checks.min_distance_m {
        if run.distance_m < min {
            failures.push(format!("travelled {:.3} m, expected at least {min} m", run.distance_m));
        }
    }
    let (fault, fault_time) = match &run.stop {
        RunStop::Fault(f) => {
            failures.push(format!("{f}"));
            (Some(f.kind.clone()), Some(f.time_s))
        }
        _ => (None, None),
    };
    let battery_protection = matches!(run.stop, RunStop::BatteryProtection(_));
    if battery_protection {
        failures.push("propulsion battery protection tripped".into());
    }
    for r in &run.rejected_transitions {
        failures.push(format!("transition to {} rejected at t = {:.3} s: {}", r.target.name(), r.time_s, r.reason));
    }

    let slope = task.surface.slope_deg();
    let incline = (task.initial_mode == Mode::Incline)
        .then(|| incline_equilibrium(&model.params, &model.rotor, slope, true).ok())
        .flatten();
    let wall = (task.initial_mode == Mode::Wall)
        .then(|| wall_climb_analysis(&model.params, &model.rotor, initial_tilt.front_deg, true).ok())
        .flatten();
    if let Some(w) = &wall {
        if !w.climb_feasible {
            failures.push(format!("wall climb infeasible at {} deg tilt", w.tilt_deg));
        }
    }

    let report = SimulationReport {
        scenario: name.to_string(),
        seed,
        completed: run.completed(),
        fault,
        fault_time_s: fault_time,
        battery_protection,
        final_time_s: end.time_s,
        final_mode: end.mode,
        final_position_m: end.position.into(),
        final_speed_mps: final_speed,
        target_speed_mps: target_speed,
        speed_error_frac: speed_error,
        target_position_m: target_position,
        position_error_m: position_error,
        distance_m: run.distance_m,
        propulsion_energy_wh: run.ledger.mode_sum_wh(),
        tipping_slope_deg: tipping_slope(&model.params),
        incline,
        wall,
        rejected_transitions: run.rejected_transitions.clone(),
        protection_events: run.protection_events.clone(),
        passed: failures.is_empty(),
        failures,
    };
    SimulationOutcome { report, trace_csv: run.trace_csv, ledger: run.ledger, final_state: run.final_state }
}

fn run_plan(
    name: &str,
    model: &Model,
    sim: &Simulator,
    task: &PlanTask,
    base_dir: &Path,
    validate: bool,
    seed: u64,
) -> Result<PlanOutcome, ScenarioError> {
    let terrain = task.terrain.load(base_dir)?;
    let mission = plan(&terrain, task.start, task.goal, &task.planner, &model.power, &model.batteries)?;
    let mut failures = Vec::new();
    if !mission.feasible {
        failures.push(format!(
            "plan needs {:.3} Wh, only {:.3} Wh usable",
            mission.total_energy_wh, mission.available_energy_wh
        ));
    }
    let fly_legs = mission.legs_of(LegMode::Fly);
    if let Some(expected) = task.expected_fly_legs {
        if fly_legs != expected {
            failures.push(format!("plan has {fly_legs} fly legs, expected {expected}"));
        }
    }
    let (validation, ledger) = if validate {
        let mut ledger = EnergyLedger::new();
        let report = validate_plan(&mission, &terrain, sim, &mut ledger, &model.batteries, &task.validation)?;
        for leg in report.legs.iter().filter(|l| l.flagged || l.fault.is_some()) {
            failures.push(format!(
                "leg {} ({:?}): simulated {:.4} Wh vs predicted {:.4} Wh ({:+.1}%){}",
                leg.index,
                leg.mode,
                leg.simulated_wh,
                leg.predicted_wh,
                leg.deviation_frac * 100.0,
                leg.fault.as_ref().map(|f| format!(", fault {f:?}")).unwrap_or_default()
            ));
        }
        if report.protection_tripped {
            failures.push("battery protection trips before the plan completes".into());
        }
        (Some(report), Some(ledger))
    } else {
        (None, None)
    };
    let summary = PlanSummary {
        scenario: name.to_string(),
        seed,
        fly_legs,
        expected_fly_legs: task.expected_fly_legs,
        plan: mission,
        validation,
        passed: failures.is_empty(),
        failures,
    };
    Ok(PlanOutcome { summary, terrain, ledger })
}

impl From<PlanError> for ScenarioError {
    fn from(e: PlanError) -> Self {
        ScenarioError::Plan(e)
    }
}

//! JSON scenario files, the bundled experiment scenarios and their runners.
//!
//! A scenario names the vehicle model (all parts optional, defaulting to the
//! bundled data) and one task: a scripted simulation or a planner query.
//! Relative file paths resolve against the scenario file's directory.

mod bundled;
mod runner;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bundled::{bundled_scenario, bundled_scenarios};
pub use runner::{
    run_bundled, run_scenario, PlanOutcome, PlanSummary, ScenarioOutcome, SimulationOutcome, SimulationReport,
};

use crate::dynamics::{Mode, RunOptions, ScriptAction, ScriptEntry, SimConfig, SurfaceModel};
use crate::energy::{default_batteries, Battery, PowerCalibration, PowerModel};
use crate::planner::{Cell, PlannerConfig, TerrainGrid, TerrainSpec, ValidationOptions};
use crate::vehicle::{MassBudget, RotorModel, VehicleParams};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse { source_name: String, line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("model: {0}")]
    Model(String),
    #[error("unknown bundled scenario '{0}'")]
    UnknownScenario(String),
    #[error("plan: {0}")]
    Plan(crate::planner::PlanError),
}

impl ScenarioError {
    pub fn parse(source_name: &str, e: &serde_json::Error) -> Self {
        ScenarioError::Parse {
            source_name: source_name.to_string(),
            line: e.line(),
            column: e.column(),
            message: strip_location(&e.to_string()),
        }
    }
}

/// serde_json appends " at line L column C"; the error carries those already.
fn strip_location(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

fn model_err(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Model(e.to_string())
}

pub(crate) fn read_text(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Parses JSON, reporting errors with the line and column they occur on.
pub fn parse_json<T: for<'de> Deserialize<'de>>(source_name: &str, text: &str) -> Result<T, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::parse(source_name, &e))
}

/// Which vehicle, rotor, calibration and packs to use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<VehicleParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vehicle_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotor_table_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_budget_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_calibration: Option<PowerCalibration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batteries: Option<Vec<Battery>>,
    /// Full simulator config. Omitted means defaults calibrated against the
    /// power model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
}

/// Everything a run needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: VehicleParams,
    pub rotor: RotorModel,
    pub budget: MassBudget,
    pub power: PowerModel,
    pub batteries: Vec<Battery>,
    pub sim_config: SimConfig,
}

impl ModelConfig {
    pub fn build(&self, base_dir: &Path) -> Result<Model, ScenarioError> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
        let params = match (&self.vehicle, &self.vehicle_path) {
            (Some(_), Some(_)) => return Err(ScenarioError::Invalid("give vehicle or vehicle_path, not both".into())),
            (Some(v), None) => v.clone(),
            (None, Some(p)) => {
                let path = resolve(p);
                parse_json(&path.display().to_string(), &read_text(&path)?)?
            }
            (None, None) => VehicleParams::default(),
        };
        params.validate().map_err(model_err)?;
        let rotor = match &self.rotor_table_path {
            Some(p) => RotorModel::from_path(&resolve(p)).map_err(model_err)?,
            None => RotorModel::default_rotor(),
        };
        let budget = match &self.mass_budget_path {
            Some(p) => MassBudget::from_path(&resolve(p)).map_err(model_err)?,
            None => MassBudget::default_budget(),
        };
        let calibration = self.power_calibration.clone().unwrap_or_default();
        let power = PowerModel::calibrate(&params, &rotor, &calibration).map_err(model_err)?;
        let batteries = self.batteries.clone().unwrap_or_else(default_batteries);
        for b in &batteries {
            b.validate().map_err(model_err)?;
        }
        let sim_config = match &self.sim {
            Some(c) => c.clone(),
            None => SimConfig::calibrated(&power, params.payload_mass).map_err(model_err)?,
        };
        sim_config.validate().map_err(ScenarioError::Model)?;
        Ok(Model { params, rotor, budget, power, batteries, sim_config })
    }
}

/// Where a planner query's terrain comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerrainSource {
    /// One string per row: `.` free, `#` obstacle, `X` no-fly zone.
    Ascii {
        rows: Vec<String>,
        cell_size_m: f64,
    },
    Grid(TerrainSpec),
    File {
        path: PathBuf,
    },
}

impl TerrainSource {
    pub fn load(&self, base_dir: &Path) -> Result<TerrainGrid, ScenarioError> {
        let invalid = |e: crate::planner::PlanError| ScenarioError::Invalid(e.to_string());
        match self {
            TerrainSource::Ascii { rows, cell_size_m } => {
                TerrainGrid::from_ascii(&rows.join("\n"), *cell_size_m).map_err(invalid)
            }
            TerrainSource::Grid(spec) => TerrainGrid::try_from(spec.clone()).map_err(invalid),
            TerrainSource::File { path } => {
                let path = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let text = read_text(&path)?;
                let name = path.display().to_string();
                if path.extension().is_some_and(|e| e == "json") {
                    parse_json(&name, &text)
                } else {
                    TerrainGrid::from_ascii(&text, 1.0).map_err(invalid)
                }
            }
        }
    }
}

/// Pass/fail thresholds for a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationChecks {
    /// Final speed against the last speed setpoint.
    pub speed_tolerance_frac: f64,
    /// Final position against the last flight setpoint.
    pub position_tolerance_m: f64,
    pub min_distance_m: Option<f64>,
}

impl Default for SimulationChecks {
    fn default() -> Self {
        Self { speed_tolerance_frac: 0.05, position_tolerance_m: 0.05, min_distance_m: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateTask {
    #[serde(default = "SurfaceModel::flat")]
    pub surface: SurfaceModel,
    #[serde(default = "default_mode")]
    pub initial_mode: Mode,
    #[serde(default)]
    pub heading_deg: f64,
    #[serde(default)]
    pub run: RunOptions,
    #[serde(default)]
    pub script: Vec<ScriptEntry>,
    #[serde(default)]
    pub checks: SimulationChecks,
}

fn default_mode() -> Mode {
    Mode::Ground
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanTask {
    pub terrain: TerrainSource,
    pub start: Cell,
    pub goal: Cell,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub validation: ValidationOptions,
    /// Number of fly legs the plan must contain, if set.
    #[serde(default)]
    pub expected_fly_legs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Task {
    Simulate(SimulateTask),
    Plan(PlanTask),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub model: ModelConfig,
    pub task: Task,
}

impl Scenario {
    pub fn from_json_str(source_name: &str, text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = parse_json(source_name, text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_json_str(&path.display().to_string(), &read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let Task::Simulate(task) = &self.task else {
            return Ok(());
        };
        if !task.surface.is_valid() {
            return Err(ScenarioError::Invalid(
                "surface slope must lie in [0, 90) deg and coefficients be non-negative".into(),
            ));
        }
        let run = &task.run;
        if !(run.dt_s > 0.0 && run.dt_s <= 0.02) || !(run.duration_s >= 0.0) || run.trace_decimation == 0 {
            return Err(ScenarioError::Invalid(
                "run needs dt_s in (0, 0.02], duration_s >= 0, trace_decimation >= 1".into(),
            ));
        }
        for pair in task.script.windows(2) {
            if !(pair[1].time_s > pair[0].time_s) {
                return Err(ScenarioError::Invalid(format!(
                    "script times must be strictly increasing ({} then {})",
                    pair[0].time_s, pair[1].time_s
                )));
            }
        }
        if let Some(e) = task.script.iter().find(|e| !(e.time_s.is_finite() && e.time_s >= 0.0)) {
            return Err(ScenarioError::Invalid(format!("script time {} must be finite and non-negative", e.time_s)));
        }
        if let Some(ScriptEntry { action: ScriptAction::Surface { surface }, .. }) =
            task.script.iter().find(|e| matches!(&e.action, ScriptAction::Surface { surface } if !surface.is_valid()))
        {
            return Err(ScenarioError::Invalid(format!("invalid scripted surface {surface:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Scenario::from_json_str("s.json", "{\n  \"name\": \"x\",\n  \"task\": 3\n}").unwrap_err();
        match err {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"name":"x","task":{"type":"simulate","durations":3}}"#;
        assert!(matches!(Scenario::from_json_str("s", text), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn script_must_increase() {
        let text = r#"{"name":"x","task":{"type":"simulate","script":[
            {"time_s":1.0,"action":"setpoint","setpoint":{"mode":"idle"}},
            {"time_s":1.0,"action":"setpoint","setpoint":{"mode":"idle"}}]}}"#;
        assert!(matches!(Scenario::from_json_str("s", text), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn grid_terrain_parses_inline() {
        let text = r#"{"kind":"grid","width":2,"height":1,"cell_size_m":1.0,"obstacles":[[1,0]]}"#;
        let src: TerrainSource = serde_json::from_str(text).unwrap();
        let grid = src.load(Path::new(".")).unwrap();
        assert_eq!(grid.class((1, 0)), crate::planner::CellClass::Obstacle);
    }

    #[test]
    fn default_model_builds() {
        let model = ModelConfig::default().build(Path::new(".")).unwrap();
        assert!(model.sim_config.installed_factor > 1.0);
    }
}

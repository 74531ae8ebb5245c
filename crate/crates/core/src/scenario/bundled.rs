use super::{ModelConfig, PlanTask, Scenario, ScenarioError, SimulateTask, SimulationChecks, Task, TerrainSource};
use crate::dynamics::{ControlSetpoint, Mode, RunOptions, ScriptAction, ScriptEntry, SurfaceModel};
use crate::planner::{PlannerConfig, TerrainSpec, ValidationOptions};

fn setpoint(time_s: f64, setpoint: ControlSetpoint) -> ScriptEntry {
    ScriptEntry { time_s, action: ScriptAction::Setpoint { setpoint } }
}

fn transition(time_s: f64, target: Mode) -> ScriptEntry {
    ScriptEntry { time_s, action: ScriptAction::Transition { target } }
}

fn scenario(name: &str, description: &str, task: Task) -> Scenario {
    Scenario { name: name.into(), description: description.into(), model: ModelConfig::default(), task }
}

fn simulate(
    surface: SurfaceModel,
    initial_mode: Mode,
    duration_s: f64,
    script: Vec<ScriptEntry>,
    checks: SimulationChecks,
) -> Task {
    Task::Simulate(SimulateTask {
        surface,
        initial_mode,
        heading_deg: 0.0,
        run: RunOptions { duration_s, ..RunOptions::default() },
        script,
        checks,
    })
}

fn ascii(rows: &[&str], cell_size_m: f64) -> TerrainSource {
    TerrainSource::Ascii { rows: rows.iter().map(|r| r.to_string()).collect(), cell_size_m }
}

/// Centimetre-scale bumps from a fixed trigonometric pattern.
fn rocky_elevations(width: usize, height: usize) -> Vec<f64> {
    (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            let e = 0.01 * (1.7 * x + 2.3 * y).sin() * (0.9 * x - 0.4 * y).cos();
            (e * 1e4).round() / 1e4
        })
        .collect()
}

fn plan_task(
    terrain: TerrainSource,
    start: (usize, usize),
    goal: (usize, usize),
    expected_fly_legs: Option<usize>,
) -> PlanTask {
    PlanTask {
        terrain,
        start,
        goal,
        planner: PlannerConfig::default(),
        validation: ValidationOptions::default(),
        expected_fly_legs,
    }
}

/// One scenario per experiment class, plus flat driving and hovering.
pub fn bundled_scenarios() -> Vec<Scenario> {
    let flat = SurfaceModel::flat();
    vec![
        scenario(
            "confined-corridor",
            "Ground route through a winding corridor walled by no-fly cells.",
            Task::Plan(plan_task(
                ascii(
                    &[
                        "XXXXXXXXXXXX",
                        "X......X...X",
                        "XXXXXX.X.X.X",
                        "X......X.X.X",
                        "X.XXXXXX.X.X",
                        "X........X.X",
                        "XXXXXXXXXXXX",
                    ],
                    0.5,
                ),
                (1, 1),
                (10, 1),
                Some(0),
            )),
        ),
        scenario(
            "rocky-soil",
            "Ground route across a field of centimetre-scale bumps.",
            Task::Plan(plan_task(
                TerrainSource::Grid(TerrainSpec {
                    width: 10,
                    height: 4,
                    cell_size_m: 0.5,
                    elevation_m: rocky_elevations(10, 4),
                    obstacles: vec![],
                    no_fly_zones: vec![],
                }),
                (0, 0),
                (9, 3),
                Some(0),
            )),
        ),
        scenario(
            "multimodal-obstacle",
            "Drive, fly over a wall that blocks the whole field, drive on.",
            Task::Plan(plan_task(ascii(&["....#....", "....#....", "....#...."], 1.0), (0, 1), (8, 1), Some(1))),
        ),
        scenario(
            "incline-33",
            "Climb a 33 deg ramp at 0.5 m/s for 10 s.",
            simulate(
                SurfaceModel::incline(33.0),
                Mode::Incline,
                10.0,
                vec![setpoint(0.0, ControlSetpoint::Incline { speed_mps: 0.5 })],
                SimulationChecks { min_distance_m: Some(4.5), ..SimulationChecks::default() },
            ),
        ),
        scenario(
            "wall-climb",
            "Climb a vertical wall at 0.3 m/s with both axles at 135 deg.",
            simulate(
                SurfaceModel::wall(),
                Mode::Wall,
                8.0,
                vec![setpoint(0.0, ControlSetpoint::Wall { climb_speed_mps: 0.3 })],
                SimulationChecks { min_distance_m: Some(2.0), ..SimulationChecks::default() },
            ),
        ),
        scenario(
            "flat-drive",
            "Drive on flat ground at 1 m/s, then at 4.1 m/s.",
            simulate(
                flat,
                Mode::Ground,
                20.0,
                vec![
                    setpoint(0.0, ControlSetpoint::Ground { speed_mps: 1.0, yaw_rate_radps: 0.0 }),
                    setpoint(10.0, ControlSetpoint::Ground { speed_mps: 4.1, yaw_rate_radps: 0.0 }),
                ],
                SimulationChecks { min_distance_m: Some(30.0), ..SimulationChecks::default() },
            ),
        ),
        scenario(
            "takeoff-hover",
            "Tilt to flight on the ground, climb 2 m and hold.",
            simulate(
                flat,
                Mode::Ground,
                10.0,
                vec![
                    transition(0.0, Mode::Flight),
                    setpoint(1.5, ControlSetpoint::Flight { position_m: [0.0, 0.0, -2.15], yaw_rad: 0.0 }),
                ],
                SimulationChecks::default(),
            ),
        ),
    ]
}

pub fn bundled_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    bundled_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ScenarioError::UnknownScenario(name.to_string()))
}

//! `tiltaxle`: run simulations, plans, analyses, calibrations and design
//! reports from JSON configs. Every result lands under `--out`.
//!
//! Exit status: 0 success, 1 a run or validation check failed, 2 bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tiltaxle::energy::{endurance_ratio, propulsion_usable_energy_wh, range_estimate, PowerMode};
use tiltaxle::planner::PlanError;
use tiltaxle::scenario::{
    bundled_scenario, bundled_scenarios, parse_json, run_scenario, Model, ModelConfig, Scenario, ScenarioError,
    ScenarioOutcome, Task,
};
use tiltaxle::statics::{
    incline_equilibrium, lateral_tipping_slope, optimal_wall_tilt, tipping_slope, wall_climb_analysis,
};
use tiltaxle::vehicle::{design_metrics, MultimodalComparison};

#[derive(Parser)]
#[command(name = "tiltaxle", version, about = "Dual tilt-axle aerial-ground vehicle toolkit")]
struct Cli {
    /// Directory for all output files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Recorded in reports; the models are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    config: Option<PathBuf>,
    /// Run a bundled scenario instead of a file.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
}

#[derive(Args)]
struct ModelArgs {
    /// Model JSON file (vehicle, rotor table, calibration, batteries).
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted simulation; writes trace.csv, ledger.json, report.json.
    Simulate(ScenarioArgs),
    /// Plan a drive/fly route; writes plan.json and waypoints.csv.
    Plan {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Replay the plan in the simulator and compare energies.
        #[arg(long)]
        validate: bool,
    },
    /// Static force balances; writes statics.json.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        tipping: bool,
        /// Incline to analyze, repeatable.
        #[arg(long = "slope-deg")]
        slopes: Vec<f64>,
        /// Wall tilt to analyze.
        #[arg(long = "wall-tilt-deg")]
        wall_tilt: Option<f64>,
        /// Search for the least-thrust wall tilt.
        #[arg(long)]
        optimal_wall: bool,
    },
    /// Fit the power model; writes power_model.json.
    Calibrate(ModelArgs),
    /// Sizing metrics; writes design.json.
    Design(ModelArgs),
    /// List the bundled scenarios, or write them as JSON files.
    Scenarios {
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Check(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Plan(PlanError::NoPath { .. } | PlanError::Energy(_)) => Failure::Check(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate(args) => run_task(cli, args, false, "simulate"),
        Command::Plan { scenario, validate } => run_task(cli, scenario, *validate, "plan"),
        Command::Analyze { model, tipping, slopes, wall_tilt, optimal_wall } => {
            let model = load_model(model)?;
            let all = !*tipping && slopes.is_empty() && wall_tilt.is_none() && !*optimal_wall;
            let mut report = serde_json::Map::new();
            if all || *tipping {
                report.insert(
                    "tipping".into(),
                    json!({
                        "longitudinal_deg": tipping_slope(&model.params),
                        "lateral_deg": lateral_tipping_slope(&model.params),
                    }),
                );
            }
            let slopes = if all { vec![33.0] } else { slopes.clone() };
            if !slopes.is_empty() {
                let analyses = slopes
                    .iter()
                    .map(|&s| incline_equilibrium(&model.params, &model.rotor, s, true))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::Input(e.to_string()))?;
                report.insert("inclines".into(), json!(analyses));
            }
            if let Some(tilt) = wall_tilt.or(all.then_some(135.0)) {
                let wall = wall_climb_analysis(&model.params, &model.rotor, tilt, true)
                    .map_err(|e| Failure::Input(e.to_string()))?;
                report.insert("wall".into(), json!(wall));
            }
            if all || *optimal_wall {
                let value = match optimal_wall_tilt(&model.params, &model.rotor) {
                    Ok(o) => json!(o),
                    Err(e) => json!({ "error": e.to_string() }),
                };
                report.insert("optimal_wall_tilt".into(), value);
            }
            write_json(&cli.out, "statics.json", &serde_json::Value::Object(report))
        }
        Command::Calibrate(args) => {
            let model = load_model(args)?;
            let usable = propulsion_usable_energy_wh(&model.batteries);
            let mut configs = Vec::new();
            for c in &model.power.configs {
                let p = c.payload_kg;
                let check = |e: tiltaxle::energy::EnergyError| Failure::Input(e.to_string());
                configs.push(json!({
                    "payload_kg": p,
                    "ground": c.ground,
                    "flight_power_w": c.flight_power_w,
                    "hover_power_w": c.hover_power_w,
                    "installed_factor": c.installed_factor,
                    "endurance_ratio_at_1_mps": endurance_ratio(&model.power, p, 1.0).map_err(check)?,
                    "ground_range_at_1_mps_m": range_estimate(&model.power, &model.batteries, PowerMode::Ground, 1.0, p, 0.0).map_err(check)?,
                    "ground_range_at_4_1_mps_m": range_estimate(&model.power, &model.batteries, PowerMode::Ground, 4.1, p, 0.0).map_err(check)?,
                }));
            }
            let report = json!({
                "usable_propulsion_energy_wh": usable,
                "payload_configs": configs,
                "sim_drivetrain": model.sim_config.drivetrain,
            });
            write_json(&cli.out, "power_model.json", &report)
        }
        Command::Design(args) => {
            let model = load_model(args)?;
            let usable = propulsion_usable_energy_wh(&model.batteries);
            let metrics = design_metrics(&model.params, &model.rotor, &model.budget, usable)
                .map_err(|e| Failure::Input(e.to_string()))?;
            let report = json!({
                "metrics": metrics,
                "comparison": MultimodalComparison::bundled().summary(&[]),
            });
            write_json(&cli.out, "design.json", &report)
        }
        Command::Scenarios { export } => {
            for s in bundled_scenarios() {
                let kind = match s.task {
                    Task::Simulate(_) => "simulate",
                    Task::Plan(_) => "plan",
                };
                println!("{:<22}{:<10}{}", s.name, kind, s.description);
                if let Some(dir) = export {
                    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
                    let path = dir.join(format!("{}.json", s.name));
                    std::fs::write(&path, s.to_json() + "\n").map_err(|e| io_failure(&path, e))?;
                }
            }
            Ok(())
        }
    }
}

fn load_scenario(args: &ScenarioArgs) -> Result<(Scenario, PathBuf), Failure> {
    match (&args.config, &args.scenario) {
        (Some(path), None) => {
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((Scenario::from_path(path)?, base))
        }
        (None, Some(name)) => Ok((bundled_scenario(name)?, PathBuf::from("."))),
        _ => Err(Failure::Input("give a scenario file or --scenario NAME".into())),
    }
}

fn run_task(cli: &Cli, args: &ScenarioArgs, validate: bool, command: &str) -> Result<(), Failure> {
    let (scenario, base) = load_scenario(args)?;
    let wanted = matches!((&scenario.task, command), (Task::Simulate(_), "simulate") | (Task::Plan(_), "plan"));
    if !wanted {
        return Err(Failure::Input(format!("scenario '{}' is not a {command} task", scenario.name)));
    }
    let outcome = run_scenario(&scenario, &base, validate, cli.seed)?;
    let written = outcome.write_outputs(&cli.out).map_err(|e| io_failure(&cli.out, e))?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    match &outcome {
        ScenarioOutcome::Simulation(s) => println!(
            "{}: distance {:.3} m, propulsion energy {:.4} Wh",
            scenario.name, s.report.distance_m, s.report.propulsion_energy_wh
        ),
        ScenarioOutcome::Plan(p) => println!(
            "{}: {} legs, {:.4} Wh, {:.1} s",
            scenario.name,
            p.summary.plan.legs.len(),
            p.summary.plan.total_energy_wh,
            p.summary.plan.total_duration_s
        ),
    }
    if outcome.passed() {
        Ok(())
    } else {
        Err(Failure::Check(outcome.failures().join("; ")))
    }
}

fn load_model(args: &ModelArgs) -> Result<Model, Failure> {
    let (config, base) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let config: ModelConfig = parse_json(&path.display().to_string(), &text)?;
            (config, path.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (ModelConfig::default(), PathBuf::from(".")),
    };
    Ok(config.build(&base)?)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
    std::fs::write(&path, &text).map_err(|e| io_failure(&path, e))?;
    print!("{text}");
    println!("wrote {}", path.display());
    Ok(())
}

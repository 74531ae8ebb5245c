mod support;

use approx::assert_relative_eq;
use proptest::prelude::*;
use tiltaxle::dynamics::{SimConfig, Simulator};
use tiltaxle::energy::{default_batteries, Battery, BatteryId, EnergyLedger, PowerModel};
use tiltaxle::planner::{
    classify_traversability, plan, plan_batch, CellClass, EdgeCosts, EdgeKind, LegMode, MissionPlan, Node, NodeMode,
    PlanError, PlanLeg, PlannerConfig, TerrainGrid, ValidationOptions,
};
use tiltaxle::vehicle::{RotorModel, VehicleParams};
use tiltaxle::Execution;

fn model() -> PowerModel {
    PowerModel::calibrated_default()
}

fn simulator() -> Simulator {
    let m = model();
    Simulator::new(VehicleParams::default(), RotorModel::default_rotor(), SimConfig::calibrated(&m, 0.0).unwrap())
        .unwrap()
}

fn check_structure(p: &MissionPlan) {
    for w in p.legs.windows(2) {
        assert_eq!(w[0].cells.last(), w[1].cells.first(), "legs must connect");
        let fly_drive =
            matches!((w[0].mode, w[1].mode), (LegMode::Drive, LegMode::Fly) | (LegMode::Fly, LegMode::Drive));
        assert!(!fly_drive, "mode change without a transition leg");
    }
}

#[test]
fn flat_grid_is_drivable() {
    let t = TerrainGrid::flat(4, 3, 1.0).unwrap();
    let tr = classify_traversability(&t, &VehicleParams::default(), &PlannerConfig::default());
    assert!(tr.drivable.iter().all(|&d| d));
    assert!(tr.flyable.iter().all(|&f| f));
}

#[test]
fn steep_pairs_are_not_drivable() {
    let cfg = PlannerConfig::default();
    let params = VehicleParams::default();
    let mut t = TerrainGrid::flat(2, 1, 1.0).unwrap();
    t.set_elevation((1, 0), 65f64.to_radians().tan()).unwrap();
    assert!(classify_traversability(&t, &params, &cfg).drivable.iter().all(|&d| !d));
    t.set_elevation((1, 0), 33f64.to_radians().tan()).unwrap();
    assert!(classify_traversability(&t, &params, &cfg).drivable.iter().all(|&d| d));
}

#[test]
fn classes_gate_traversal() {
    let t = TerrainGrid::from_ascii(".#X", 1.0).unwrap();
    let tr = classify_traversability(&t, &VehicleParams::default(), &PlannerConfig::default());
    assert_eq!(tr.drivable, vec![true, false, false]);
    assert_eq!(tr.flyable, vec![true, true, false]);
}

#[test]
fn corridor_is_all_drive() {
    let t = TerrainGrid::flat(5, 1, 1.0).unwrap();
    let p = plan(&t, (0, 0), (4, 0), &PlannerConfig::default(), &model(), &default_batteries()).unwrap();
    assert_eq!(p.legs.len(), 1);
    assert_eq!(p.legs[0].mode, LegMode::Drive);
    assert_relative_eq!(p.total_energy_wh, 29.8 * 4.0 / 3600.0, max_relative = 1e-12);
    assert!(p.feasible);
}

#[test]
fn blocked_corridor_flies_over() {
    let t = TerrainGrid::from_ascii("..#..", 1.0).unwrap();
    let cfg = PlannerConfig::default();
    let p = plan(&t, (0, 0), (4, 0), &cfg, &model(), &default_batteries()).unwrap();
    let modes: Vec<LegMode> = p.legs.iter().map(|l| l.mode).collect();
    assert_eq!(
        modes,
        [LegMode::Drive, LegMode::TransitionToFly, LegMode::Fly, LegMode::TransitionToGround, LegMode::Drive]
    );
    check_structure(&p);

    let costs = EdgeCosts::new(&t, &cfg, &model()).unwrap();
    let all = support::enumerate_all_paths(&costs, (0, 0), (4, 0));
    let best = all.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    assert_eq!(p.total_energy_wh, best);
}

#[test]
fn edge_costs_follow_mode_powers() {
    let t = TerrainGrid::flat(2, 1, 1.0).unwrap();
    let cfg = PlannerConfig { fly_speed_mps: 1.0, ..PlannerConfig::default() };
    let costs = EdgeCosts::new(&t, &cfg, &model()).unwrap();
    let d0 = costs.node_id(Node { cell: (0, 0), mode: NodeMode::Drive });
    let f0 = costs.node_id(Node { cell: (0, 0), mode: NodeMode::Fly });
    let drive = costs.edges(d0).iter().find(|e| e.kind == EdgeKind::Drive).unwrap();
    let fly = costs.edges(f0).iter().find(|e| e.kind == EdgeKind::Fly).unwrap();
    assert_relative_eq!(drive.cost.energy_wh * 3600.0, 29.8, epsilon = 1e-9);
    assert_relative_eq!(fly.cost.energy_wh * 3600.0, 858.24, epsilon = 1e-9);

    let p = plan(&t, (0, 0), (1, 0), &cfg, &model(), &default_batteries()).unwrap();
    assert_eq!(p.legs.len(), 1);
    assert_eq!(p.legs[0].mode, LegMode::Drive);
}

#[test]
fn unreachable_goal_reports_frontier() {
    let t = TerrainGrid::from_ascii("..X..\n..X..\n", 1.0).unwrap();
    let err = plan(&t, (0, 0), (4, 1), &PlannerConfig::default(), &model(), &default_batteries()).unwrap_err();
    match err {
        PlanError::NoPath { explored_nodes, closest_cell } => {
            assert!(explored_nodes > 0);
            assert_eq!(closest_cell.0, 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn bad_endpoints_are_rejected() {
    let t = TerrainGrid::from_ascii("..#", 1.0).unwrap();
    let m = model();
    let b = default_batteries();
    let cfg = PlannerConfig::default();
    assert_eq!(plan(&t, (0, 0), (2, 0), &cfg, &m, &b), Err(PlanError::NotDrivable((2, 0))));
    assert_eq!(plan(&t, (0, 0), (5, 0), &cfg, &m, &b), Err(PlanError::OutOfBounds((5, 0))));
    let bad = PlannerConfig { drive_speed_mps: 0.0, ..cfg };
    assert!(matches!(plan(&t, (0, 0), (1, 0), &bad, &m, &b), Err(PlanError::InvalidConfig(_))));
}

#[test]
fn same_start_and_goal_is_empty() {
    let t = TerrainGrid::flat(3, 3, 1.0).unwrap();
    let p = plan(&t, (1, 1), (1, 1), &PlannerConfig::default(), &model(), &default_batteries()).unwrap();
    assert!(p.legs.is_empty());
    assert_eq!(p.total_energy_wh, 0.0);
    let report = tiltaxle::planner::validate_plan(
        &p,
        &t,
        &simulator(),
        &mut EnergyLedger::new(),
        &default_batteries(),
        &ValidationOptions::default(),
    )
    .unwrap();
    assert!(report.passed);
    assert_eq!(report.simulated_total_wh, 0.0);
}

#[test]
fn low_battery_marks_plan_infeasible() {
    let t = TerrainGrid::flat(20, 1, 1.0).unwrap();
    let mut batteries = default_batteries();
    for b in batteries.iter_mut().filter(|b| b.id.is_propulsion()) {
        b.soc = b.protection_threshold() + 1e-6;
    }
    let p = plan(&t, (0, 0), (19, 0), &PlannerConfig::default(), &model(), &batteries).unwrap();
    assert!(!p.feasible);
    assert!(p.total_energy_wh > p.available_energy_wh);
}

#[test]
fn matches_exhaustive_search_on_suite() {
    let m = model();
    let cfg = PlannerConfig::default();
    let mut solved = 0;
    for inst in support::instance_suite() {
        let costs = EdgeCosts::new(&inst.terrain, &cfg, &m).unwrap();
        let oracle = support::exhaustive_min_energy(&costs, inst.start, inst.goal);
        match plan(&inst.terrain, inst.start, inst.goal, &cfg, &m, &default_batteries()) {
            Ok(p) => {
                assert_eq!(Some(p.total_energy_wh), oracle);
                check_structure(&p);
                solved += 1;
            }
            Err(PlanError::NoPath { .. }) => assert_eq!(oracle, None),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(solved >= 40, "suite should be mostly solvable, got {solved}");
}

#[test]
fn pricier_transitions_never_lower_cost() {
    let m = model();
    let b = default_batteries();
    for inst in support::instance_suite().iter().take(15) {
        let mut last = 0.0;
        for e in [0.0, 0.1, 0.25, 0.5, 1.0, 5.0] {
            let cfg = PlannerConfig { transition_energy_wh: Some(e), ..PlannerConfig::default() };
            if let Ok(p) = plan(&inst.terrain, inst.start, inst.goal, &cfg, &m, &b) {
                assert!(p.total_energy_wh >= last);
                last = p.total_energy_wh;
            }
        }
    }
}

#[test]
fn mirrored_grid_mirrors_energy() {
    let m = model();
    let b = default_batteries();
    let cfg = PlannerConfig::default();
    for inst in support::instance_suite() {
        let w = inst.terrain.width();
        let mirror = inst.terrain.mirrored();
        let flip = |c: (usize, usize)| (w - 1 - c.0, c.1);
        let a = plan(&inst.terrain, inst.start, inst.goal, &cfg, &m, &b);
        let z = plan(&mirror, flip(inst.start), flip(inst.goal), &cfg, &m, &b);
        match (a, z) {
            (Ok(a), Ok(z)) => {
                assert_eq!(a.total_energy_wh, z.total_energy_wh);
                assert_eq!(a.transitions, z.transitions);
            }
            (Err(_), Err(_)) => {}
            (a, z) => panic!("mirror disagrees: {a:?} vs {z:?}"),
        }
    }
}

#[test]
fn batch_paths_agree() {
    let t = TerrainGrid::from_ascii("......\n..##..\n......\n.X....\n", 1.0).unwrap();
    let queries: Vec<_> = (0..6).flat_map(|x| (0..4).map(move |y| ((0, 0), (x, y)))).collect();
    let m = model();
    let b = default_batteries();
    let cfg = PlannerConfig::default();
    let seq = plan_batch(&t, &queries, &cfg, &m, &b, Execution::Sequential).unwrap();
    let par = plan_batch(&t, &queries, &cfg, &m, &b, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn flat_drive_plan_validates() {
    let t = TerrainGrid::from_ascii("......\n.####.\n......\n", 1.0).unwrap();
    let p = plan(&t, (0, 0), (5, 2), &PlannerConfig::default(), &model(), &default_batteries()).unwrap();
    assert_eq!(p.legs_of(LegMode::Fly), 0);
    let mut ledger = EnergyLedger::new();
    let report = tiltaxle::planner::validate_plan(
        &p,
        &t,
        &simulator(),
        &mut ledger,
        &default_batteries(),
        &ValidationOptions::default(),
    )
    .unwrap();
    assert!(report.passed, "{report:?}");
    assert!(report.total_deviation_frac.abs() < 0.15);
    assert_relative_eq!(ledger.total_wh, report.simulated_total_wh, max_relative = 1e-9);
}

#[test]
fn fly_leg_validates() {
    let t = TerrainGrid::from_ascii("..###..", 1.0).unwrap();
    let p = plan(&t, (0, 0), (6, 0), &PlannerConfig::default(), &model(), &default_batteries()).unwrap();
    assert_eq!(p.legs_of(LegMode::Fly), 1);
    let report = tiltaxle::planner::validate_plan(
        &p,
        &t,
        &simulator(),
        &mut EnergyLedger::new(),
        &default_batteries(),
        &ValidationOptions::default(),
    )
    .unwrap();
    let fly = report.legs.iter().find(|l| l.mode == LegMode::Fly).unwrap();
    assert!(fly.deviation_frac.abs() < 0.15, "{fly:?}");
    assert!(report.legs.iter().all(|l| l.fault.is_none()));
}

#[test]
fn forced_steep_drive_tips() {
    let mut t = TerrainGrid::flat(2, 1, 1.0).unwrap();
    t.set_elevation((1, 0), 61f64.to_radians().tan()).unwrap();
    let forced = MissionPlan {
        legs: vec![PlanLeg {
            mode: LegMode::Drive,
            cells: vec![(0, 0), (1, 0)],
            speed_mps: 1.0,
            energy_wh: 1.0,
            duration_s: 2.0,
        }],
        total_energy_wh: 1.0,
        total_duration_s: 2.0,
        transitions: 0,
        available_energy_wh: 95.2,
        feasible: true,
    };
    let report = tiltaxle::planner::validate_plan(
        &forced,
        &t,
        &simulator(),
        &mut EnergyLedger::new(),
        &default_batteries(),
        &ValidationOptions::default(),
    )
    .unwrap();
    assert!(!report.passed);
    assert!(matches!(report.legs[0].fault, Some(tiltaxle::dynamics::FaultKind::Tip { .. })));
}

#[test]
fn waypoint_export_lists_every_cell() {
    let t = TerrainGrid::from_ascii("..#..", 1.0).unwrap();
    let p = plan(&t, (0, 0), (4, 0), &PlannerConfig::default(), &model(), &default_batteries()).unwrap();
    let csv = p.waypoints_csv(&t);
    assert!(csv.starts_with("leg,mode,x,y,elevation_m\n"));
    assert!(csv.contains(",fly,2,0,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn feasible_plans_never_trip_protection(len in 2usize..30, soc in 0.25f64..1.0) {
        let t = TerrainGrid::flat(len, 1, 1.0).unwrap();
        let mut batteries = default_batteries();
        for b in batteries.iter_mut().filter(|b| b.id.is_propulsion()) {
            b.soc = soc;
        }
        let cfg = PlannerConfig { drive_speed_mps: 4.0, ..PlannerConfig::default() };
        let p = plan(&t, (0, 0), (len - 1, 0), &cfg, &model(), &batteries).unwrap();
        if p.feasible {
            let mut packs: Vec<Battery> = batteries.iter().filter(|b| b.id != BatteryId::Electronics).cloned().collect();
            for leg in &p.legs {
                for pack in packs.iter_mut() {
                    let out = pack.drain(leg.energy_wh * 3600.0 / 2.0, 1.0).unwrap();
                    prop_assert!(out.event.is_none());
                }
            }
        }
    }

    #[test]
    fn obstacle_classes_block_driving(x in 0usize..5) {
        let mut t = TerrainGrid::flat(5, 1, 1.0).unwrap();
        t.set_class((x, 0), CellClass::Obstacle).unwrap();
        let tr = classify_traversability(&t, &VehicleParams::default(), &PlannerConfig::default());
        prop_assert!(!tr.drivable[x]);
        prop_assert!(tr.flyable[x]);
    }
}

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::terrain::{Cell, CellClass, TerrainGrid};
use super::PlanError;
use crate::energy::{Battery, PowerMode, PowerModel};
use crate::statics::tipping_slope;
use crate::vehicle::VehicleParams;
use crate::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub drive_speed_mps: f64,
    pub fly_speed_mps: f64,
    /// Energy of one takeoff or landing. `None` means hover power held for
    /// `transition_time_s`.
    pub transition_energy_wh: Option<f64>,
    pub transition_time_s: f64,
    pub fly_clearance_m: f64,
    pub slope_margin_deg: f64,
    pub payload_kg: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            drive_speed_mps: 1.0,
            fly_speed_mps: 2.0,
            transition_energy_wh: None,
            transition_time_s: 1.0,
            fly_clearance_m: 1.0,
            slope_margin_deg: 5.0,
            payload_kg: 0.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: String| Err(PlanError::InvalidConfig(m));
        for (name, v) in [("drive_speed_mps", self.drive_speed_mps), ("fly_speed_mps", self.fly_speed_mps)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("transition_time_s", self.transition_time_s),
            ("fly_clearance_m", self.fly_clearance_m),
            ("slope_margin_deg", self.slope_margin_deg),
            ("payload_kg", self.payload_kg),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if let Some(e) = self.transition_energy_wh {
            if !(e.is_finite() && e >= 0.0) {
                return bad(format!("transition_energy_wh must be non-negative, got {e}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Traversability {
    pub drivable: Vec<bool>,
    pub flyable: Vec<bool>,
    pub slope_limit_deg: f64,
}

/// A cell is drivable when it is free and its steepest neighbor gradient
/// stays within the tipping slope less the margin; flyable unless it is a
/// no-fly zone.
pub fn classify_traversability(terrain: &TerrainGrid, params: &VehicleParams, cfg: &PlannerConfig) -> Traversability {
    let limit = tipping_slope(params) - cfg.slope_margin_deg;
    let drivable =
        terrain.cells().map(|c| terrain.class(c) == CellClass::Free && terrain.local_slope_deg(c) <= limit).collect();
    let flyable = terrain.cells().map(|c| terrain.class(c) != CellClass::NoFlyZone).collect();
    Traversability { drivable, flyable, slope_limit_deg: limit }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeMode {
    Drive,
    Fly,
}

/// A vertex of the mode-augmented graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub cell: Cell,
    pub mode: NodeMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCost {
    pub energy_wh: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Drive,
    Fly,
    Takeoff,
    Landing,
}

impl EdgeKind {
    pub fn is_transition(self) -> bool {
        matches!(self, EdgeKind::Takeoff | EdgeKind::Landing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub to: usize,
    pub kind: EdgeKind,
    pub cost: EdgeCost,
}

/// Every edge of the mode-augmented graph with its energy and time.
///
/// Node ids are `2·cell_index` for driving and `2·cell_index + 1` for flying.
/// Driving costs the incline power at the segment slope in either direction;
/// flying costs the flight power over the horizontal distance plus the
/// potential energy of any climb. Takeoff adds the climb to clearance on top
/// of the transition energy.
#[derive(Debug, Clone)]
pub struct EdgeCosts {
    terrain: TerrainGrid,
    traversability: Traversability,
    adjacency: Vec<Vec<Edge>>,
    cfg: PlannerConfig,
}

impl EdgeCosts {
    pub fn new(terrain: &TerrainGrid, cfg: &PlannerConfig, model: &PowerModel) -> Result<Self, PlanError> {
        cfg.validate()?;
        let params = model.params().with_payload(cfg.payload_kg);
        let traversability = classify_traversability(terrain, &params, cfg);
        let weight = params.weight();
        let flight_w = model.mode_power(PowerMode::Flight, cfg.fly_speed_mps, cfg.payload_kg, 0.0)?;
        let hover_w = model.mode_power(PowerMode::Hover, 0.0, cfg.payload_kg, 0.0)?;
        let transition_wh = cfg.transition_energy_wh.unwrap_or(hover_w * cfg.transition_time_s / 3600.0);
        let s = terrain.cell_size_m();

        let mut adjacency = vec![Vec::new(); 2 * terrain.len()];
        for cell in terrain.cells() {
            let i = terrain.index(cell);
            let (drive, fly) = (2 * i, 2 * i + 1);
            let (can_drive, can_fly) = (traversability.drivable[i], traversability.flyable[i]);
            if can_drive && can_fly {
                let takeoff = EdgeCost {
                    energy_wh: transition_wh + weight * cfg.fly_clearance_m / 3600.0,
                    duration_s: cfg.transition_time_s,
                };
                adjacency[drive].push(Edge { to: fly, kind: EdgeKind::Takeoff, cost: takeoff });
                let landing = EdgeCost { energy_wh: transition_wh, duration_s: cfg.transition_time_s };
                adjacency[fly].push(Edge { to: drive, kind: EdgeKind::Landing, cost: landing });
            }
            for next in terrain.neighbors(cell) {
                let j = terrain.index(next);
                let rise = terrain.elevation(next) - terrain.elevation(cell);
                if can_drive && traversability.drivable[j] {
                    let slope = terrain.gradient_deg(cell, next);
                    let power = if rise == 0.0 {
                        model.mode_power(PowerMode::Ground, cfg.drive_speed_mps, cfg.payload_kg, 0.0)?
                    } else {
                        model.mode_power(PowerMode::Incline, cfg.drive_speed_mps, cfg.payload_kg, slope)?
                    };
                    let duration_s = s.hypot(rise) / cfg.drive_speed_mps;
                    let cost = EdgeCost { energy_wh: power * duration_s / 3600.0, duration_s };
                    adjacency[drive].push(Edge { to: 2 * j, kind: EdgeKind::Drive, cost });
                }
                if can_fly && traversability.flyable[j] {
                    let duration_s = s / cfg.fly_speed_mps;
                    let energy_wh = (flight_w * duration_s + weight * rise.max(0.0)) / 3600.0;
                    adjacency[fly].push(Edge {
                        to: 2 * j + 1,
                        kind: EdgeKind::Fly,
                        cost: EdgeCost { energy_wh, duration_s },
                    });
                }
            }
        }
        Ok(Self { terrain: terrain.clone(), traversability, adjacency, cfg: cfg.clone() })
    }

    pub fn terrain(&self) -> &TerrainGrid {
        &self.terrain
    }

    pub fn traversability(&self) -> &Traversability {
        &self.traversability
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn node_id(&self, node: Node) -> usize {
        2 * self.terrain.index(node.cell) + usize::from(node.mode == NodeMode::Fly)
    }

    pub fn node(&self, id: usize) -> Node {
        let mode = if id.is_multiple_of(2) { NodeMode::Drive } else { NodeMode::Fly };
        Node { cell: self.terrain.cell(id / 2), mode }
    }

    pub fn edges(&self, id: usize) -> &[Edge] {
        &self.adjacency[id]
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.adjacency[from].iter().find(|e| e.to == to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegMode {
    Drive,
    Fly,
    TransitionToFly,
    TransitionToGround,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanLeg {
    pub mode: LegMode,
    pub cells: Vec<Cell>,
    pub speed_mps: f64,
    pub energy_wh: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub legs: Vec<PlanLeg>,
    pub total_energy_wh: f64,
    pub total_duration_s: f64,
    pub transitions: usize,
    /// Usable propulsion energy left in the packs at planning time.
    pub available_energy_wh: f64,
    pub feasible: bool,
}

impl MissionPlan {
    pub fn legs_of(&self, mode: LegMode) -> usize {
        self.legs.iter().filter(|l| l.mode == mode).count()
    }

    /// One row per cell visited: leg index, mode, cell and elevation.
    pub fn waypoints_csv(&self, terrain: &TerrainGrid) -> String {
        let mut out = String::from("leg,mode,x,y,elevation_m\n");
        for (i, leg) in self.legs.iter().enumerate() {
            let mode = serde_json::to_value(leg.mode).expect("enum serializes");
            for &c in &leg.cells {
                out.push_str(&format!(
                    "{i},{},{},{},{}\n",
                    mode.as_str().unwrap_or(""),
                    c.0,
                    c.1,
                    terrain.elevation(c)
                ));
            }
        }
        out
    }
}

/// Search label: energy first, then transition count, then the smaller
/// predecessor id.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    energy_wh: f64,
    transitions: usize,
}

impl Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.energy_wh.total_cmp(&other.energy_wh).then(self.transitions.cmp(&other.transitions))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry(Label, usize);

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Energy-minimal drive/fly route from `start` to `goal`, both on the ground.
pub fn plan(
    terrain: &TerrainGrid,
    start: Cell,
    goal: Cell,
    cfg: &PlannerConfig,
    model: &PowerModel,
    batteries: &[Battery],
) -> Result<MissionPlan, PlanError> {
    let costs = EdgeCosts::new(terrain, cfg, model)?;
    plan_with_costs(&costs, start, goal, batteries)
}

/// [`plan`] over precomputed edge costs.
pub fn plan_with_costs(
    costs: &EdgeCosts,
    start: Cell,
    goal: Cell,
    batteries: &[Battery],
) -> Result<MissionPlan, PlanError> {
    let terrain = costs.terrain();
    for cell in [start, goal] {
        if !terrain.contains(cell) {
            return Err(PlanError::OutOfBounds(cell));
        }
        if !costs.traversability().drivable[terrain.index(cell)] {
            return Err(PlanError::NotDrivable(cell));
        }
    }
    let source = costs.node_id(Node { cell: start, mode: NodeMode::Drive });
    let target = costs.node_id(Node { cell: goal, mode: NodeMode::Drive });

    let n = costs.node_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source] = Some(Label { energy_wh: 0.0, transitions: 0 });
    heap.push(Reverse(QueueEntry(best[source].unwrap(), source)));
    let mut settled = 0;

    while let Some(Reverse(QueueEntry(label, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        settled += 1;
        if u == target {
            break;
        }
        for edge in costs.edges(u) {
            let v = edge.to;
            if done[v] {
                continue;
            }
            let candidate = Label {
                energy_wh: label.energy_wh + edge.cost.energy_wh,
                transitions: label.transitions + usize::from(edge.kind.is_transition()),
            };
            let better = match best[v] {
                None => true,
                Some(old) => match candidate.cmp(&old) {
                    Ordering::Less => true,
                    Ordering::Equal => parent[v].is_some_and(|p| u < p),
                    Ordering::Greater => false,
                },
            };
            if better {
                best[v] = Some(candidate);
                parent[v] = Some(u);
                heap.push(Reverse(QueueEntry(candidate, v)));
            }
        }
    }

    let Some(label) = best[target].filter(|_| done[target]) else {
        let closest = (0..n)
            .filter(|&i| done[i])
            .map(|i| costs.node(i).cell)
            .min_by_key(|c| (c.0.abs_diff(goal.0) + c.1.abs_diff(goal.1), *c))
            .unwrap_or(start);
        return Err(PlanError::NoPath { explored_nodes: settled, closest_cell: closest });
    };

    let mut path = vec![target];
    while let Some(p) = parent[*path.last().unwrap()] {
        path.push(p);
    }
    path.reverse();
    let available = batteries.iter().filter(|b| b.id.is_propulsion()).map(Battery::remaining_usable_wh).sum();
    Ok(assemble(costs, &path, label, available))
}

fn assemble(costs: &EdgeCosts, path: &[usize], label: Label, available_energy_wh: f64) -> MissionPlan {
    let cfg = costs.config();
    let mut legs: Vec<PlanLeg> = Vec::new();
    for pair in path.windows(2) {
        let edge = costs.edge(pair[0], pair[1]).expect("path follows graph edges");
        let (from, to) = (costs.node(pair[0]).cell, costs.node(pair[1]).cell);
        let (mode, speed) = match edge.kind {
            EdgeKind::Drive => (LegMode::Drive, cfg.drive_speed_mps),
            EdgeKind::Fly => (LegMode::Fly, cfg.fly_speed_mps),
            EdgeKind::Takeoff => (LegMode::TransitionToFly, 0.0),
            EdgeKind::Landing => (LegMode::TransitionToGround, 0.0),
        };
        match legs.last_mut() {
            Some(leg) if leg.mode == mode && !edge.kind.is_transition() => {
                leg.cells.push(to);
                leg.energy_wh += edge.cost.energy_wh;
                leg.duration_s += edge.cost.duration_s;
            }
            _ => {
                let cells = if edge.kind.is_transition() { vec![from] } else { vec![from, to] };
                legs.push(PlanLeg {
                    mode,
                    cells,
                    speed_mps: speed,
                    energy_wh: edge.cost.energy_wh,
                    duration_s: edge.cost.duration_s,
                });
            }
        }
    }
    MissionPlan {
        total_duration_s: legs.iter().map(|l| l.duration_s).sum(),
        legs,
        total_energy_wh: label.energy_wh,
        transitions: label.transitions,
        available_energy_wh,
        feasible: label.energy_wh <= available_energy_wh,
    }
}

/// Many start/goal queries over one terrain, sharing the edge costs.
pub fn plan_batch(
    terrain: &TerrainGrid,
    queries: &[(Cell, Cell)],
    cfg: &PlannerConfig,
    model: &PowerModel,
    batteries: &[Battery],
    execution: Execution,
) -> Result<Vec<Result<MissionPlan, PlanError>>, PlanError> {
    let costs = EdgeCosts::new(terrain, cfg, model)?;
    Ok(execution.map(queries, |&(start, goal)| plan_with_costs(&costs, start, goal, batteries)))
}

//! Reference searches and the fixed planner instance suite shared by the
//! integration tests.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tiltaxle::planner::{Cell, CellClass, EdgeCosts, Node, NodeMode, TerrainGrid};

/// Minimum path energy by depth-first search over simple paths of the
/// mode-augmented graph. Branches are cut when they cannot beat the best
/// complete path or when an earlier branch reached the same node no dearer;
/// both cuts are exact because every edge costs strictly positive energy.
/// Sums accumulate in path order, as the planner's labels do.
pub fn exhaustive_min_energy(costs: &EdgeCosts, start: Cell, goal: Cell) -> Option<f64> {
    let source = costs.node_id(Node { cell: start, mode: NodeMode::Drive });
    let target = costs.node_id(Node { cell: goal, mode: NodeMode::Drive });
    let mut best = f64::INFINITY;
    let mut reached = vec![f64::INFINITY; costs.node_count()];
    let mut on_path = vec![false; costs.node_count()];
    dfs(costs, source, target, 0.0, &mut best, &mut reached, &mut on_path);
    best.is_finite().then_some(best)
}

fn dfs(
    costs: &EdgeCosts,
    u: usize,
    target: usize,
    energy: f64,
    best: &mut f64,
    reached: &mut [f64],
    on_path: &mut [bool],
) {
    if energy >= *best || energy > reached[u] {
        return;
    }
    reached[u] = energy;
    if u == target {
        *best = energy;
        return;
    }
    on_path[u] = true;
    for edge in costs.edges(u) {
        if !on_path[edge.to] {
            dfs(costs, edge.to, target, energy + edge.cost.energy_wh, best, reached, on_path);
        }
    }
    on_path[u] = false;
}

/// Every simple path with no pruning at all. Only for tiny grids.
pub fn enumerate_all_paths(costs: &EdgeCosts, start: Cell, goal: Cell) -> Vec<(f64, Vec<usize>)> {
    let source = costs.node_id(Node { cell: start, mode: NodeMode::Drive });
    let target = costs.node_id(Node { cell: goal, mode: NodeMode::Drive });
    let mut out = Vec::new();
    let mut path = vec![source];
    let mut on_path = vec![false; costs.node_count()];
    on_path[source] = true;
    walk(costs, target, 0.0, &mut path, &mut on_path, &mut out);
    out
}

fn walk(
    costs: &EdgeCosts,
    target: usize,
    energy: f64,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<(f64, Vec<usize>)>,
) {
    let u = *path.last().unwrap();
    if u == target {
        out.push((energy, path.clone()));
        return;
    }
    for edge in costs.edges(u) {
        if !on_path[edge.to] {
            on_path[edge.to] = true;
            path.push(edge.to);
            walk(costs, target, energy + edge.cost.energy_wh, path, on_path, out);
            path.pop();
            on_path[edge.to] = false;
        }
    }
}

pub struct Instance {
    pub terrain: TerrainGrid,
    pub start: Cell,
    pub goal: Cell,
}

/// Fifty 6×6 grids with at most two obstacles, seeded so the suite never
/// changes. Elevations mix flat cells, gentle steps and the odd wall too
/// steep to drive.
pub fn instance_suite() -> Vec<Instance> {
    let mut rng = StdRng::seed_from_u64(0x7117_a41e);
    let levels = [0.0, 0.0, 0.0, 0.1, 0.3, 0.6, 2.0];
    (0..50)
        .map(|_| {
            let elevation = (0..36).map(|_| levels[rng.random_range(0..levels.len())]).collect();
            let mut terrain = TerrainGrid::new(6, 6, 1.0, elevation).unwrap();
            let cell = |rng: &mut StdRng| (rng.random_range(0..6), rng.random_range(0..6));
            for _ in 0..rng.random_range(0..=2) {
                let c = cell(&mut rng);
                terrain.set_class(c, CellClass::Obstacle).unwrap();
            }
            let start = cell(&mut rng);
            let goal = cell(&mut rng);
            for c in [start, goal] {
                terrain.set_class(c, CellClass::Free).unwrap();
                terrain.set_elevation(c, 0.0).unwrap();
                // Keep the endpoints drivable.
                let steep: Vec<Cell> = terrain.neighbors(c).filter(|&n| terrain.elevation(n) > 0.6).collect();
                for n in steep {
                    terrain.set_elevation(n, 0.6).unwrap();
                }
            }
            Instance { terrain, start, goal }
        })
        .collect()
}

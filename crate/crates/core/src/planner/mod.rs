//! Energy-optimal routing over slope-annotated grids, choosing per segment
//! whether to drive or fly.
//!
//! The search runs on a mode-augmented graph: every cell appears once on the
//! ground and once in the air, joined by takeoff and landing edges.

mod search;
mod terrain;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use search::{
    classify_traversability, plan, plan_batch, plan_with_costs, Edge, EdgeCost, EdgeCosts, EdgeKind, LegMode,
    MissionPlan, Node, NodeMode, PlanLeg, PlannerConfig, Traversability,
};
pub use terrain::{Cell, CellClass, TerrainGrid, TerrainSpec};
pub use validate::{validate_plan, LegReport, ValidationOptions, ValidationReport};

use crate::energy::EnergyError;

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum PlanError {
    #[error("invalid terrain: {0}")]
    InvalidTerrain(String),
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
    #[error("cell {0:?} is outside the grid")]
    OutOfBounds(Cell),
    #[error("cell {0:?} is not drivable")]
    NotDrivable(Cell),
    #[error("goal unreachable after settling {explored_nodes} nodes; closest cell reached {closest_cell:?}")]
    NoPath { explored_nodes: usize, closest_cell: Cell },
    #[error("energy model: {0}")]
    Energy(String),
}

impl From<EnergyError> for PlanError {
    fn from(e: EnergyError) -> Self {
        PlanError::Energy(e.to_string())
    }
}

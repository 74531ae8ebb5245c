//! Physical parameterization of the vehicle and its propulsion.

mod comparison;
mod design;
mod mass;
mod params;
mod rotor;

pub use comparison::{ComparisonEntry, ComparisonSummary, GainQualifier, GamType, MultimodalComparison};
pub use design::{design_metrics, servo_torque_check, DesignMetrics, ServoCheck};
pub use mass::{MassBudget, MassBudgetError, MassCategory, MassComponent};
pub use params::{ParamError, RotorIndex, VehicleParams};
pub use rotor::{RotorError, RotorModel};

//! Batteries, the calibrated per-mode power model and energy bookkeeping.

mod battery;
mod ledger;
mod power;

use thiserror::Error;

pub use battery::{default_batteries, propulsion_usable_energy_wh, Battery, BatteryId, DrainOutcome, ProtectionEvent};
pub use ledger::{EnergyLedger, PowerSample};
pub use power::{
    calibrate_ground_power, endurance_ratio, range_estimate, GroundPowerCoeffs, PayloadCalibration, PayloadConfig,
    PowerCalibration, PowerMode, PowerModel, SpeedPowerPoint,
};

use crate::statics::StaticsError;
use crate::vehicle::RotorError;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("calibration needs at least two points with distinct positive speeds, got {0}")]
    Underdetermined(usize),
    #[error("calibration speeds must be positive and finite, got {0} m/s")]
    BadSpeed(f64),
    #[error("calibration system is singular (duplicate speeds?)")]
    Singular,
    #[error("no power configuration for payload {0} kg")]
    UnknownPayload(f64),
    #[error("speed must be non-negative and finite, got {0} m/s")]
    NegativeSpeed(f64),
    #[error("speed must be positive for a range estimate, got {0} m/s")]
    NonPositiveSpeed(f64),
    #[error("endurance ratio undefined: ground power is zero at {0} m/s")]
    UndefinedRatio(f64),
    #[error("{mode} outside envelope: {reason}")]
    OutsideEnvelope { mode: &'static str, reason: String },
    #[error(transparent)]
    Rotor(#[from] RotorError),
    #[error(transparent)]
    Statics(#[from] StaticsError),
    #[error("battery {0:?} protection has tripped; further drain refused")]
    Protection(BatteryId),
    #[error("invalid battery {id:?}: {reason}")]
    InvalidBattery { id: BatteryId, reason: String },
    #[error("power must be non-negative and finite, got {0} W")]
    NegativePower(f64),
}

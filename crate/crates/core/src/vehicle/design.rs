use serde::{Deserialize, Serialize};

use super::{MassBudget, RotorError, RotorModel, VehicleParams};

/// Headline sizing figures of a vehicle/rotor combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMetrics {
    /// Total maximum thrust over weight at MTOM.
    pub tw_ratio: f64,
    pub payload_capacity_kg: f64,
    pub gam_mass_fraction: f64,
    /// Four rotors holding MTOM, from the static rotor table.
    pub hover_power_estimate_w: f64,
    pub hover_endurance_estimate_s: f64,
}

pub fn design_metrics(
    params: &VehicleParams,
    rotor: &RotorModel,
    budget: &MassBudget,
    usable_energy_wh: f64,
) -> Result<DesignMetrics, RotorError> {
    let mtom_weight = params.mtom * params.gravity;
    let hover_power = 4.0 * rotor.power_at_thrust(mtom_weight / 4.0)?;
    Ok(DesignMetrics {
        tw_ratio: 4.0 * rotor.max_thrust() / mtom_weight,
        payload_capacity_kg: params.mtom - params.empty_mass,
        gam_mass_fraction: budget.gam_mass() / params.mtom,
        hover_power_estimate_w: hover_power,
        hover_endurance_estimate_s: usable_energy_wh * 3600.0 / hover_power,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServoCheck {
    /// Gyroscopic moment times the safety factor.
    pub required_torque_nm: f64,
    pub margin_nm: f64,
    pub pass: bool,
}

/// Checks a tilt servo against the gyroscopic moment `I·Ω·ω_tilt` of a
/// spinning rotor being precessed by the tilt motion.
pub fn servo_torque_check(
    rotor_inertia: f64,
    spin_rate: f64,
    tilt_rate: f64,
    servo_torque: f64,
    safety_factor: f64,
) -> ServoCheck {
    let required = safety_factor * rotor_inertia * spin_rate * tilt_rate;
    ServoCheck { required_torque_nm: required, margin_nm: servo_torque - required, pass: servo_torque >= required }
}

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::energy::{EnergyError, PowerModel};

/// Speed-dependent drive losses on top of rolling resistance:
/// `b·|v| + k·v²`, opposing motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivetrainLosses {
    pub viscous_n_per_mps: f64,
    pub quadratic_n_per_mps2: f64,
}

impl DrivetrainLosses {
    pub fn force(&self, speed: f64) -> f64 {
        let v = speed.abs();
        self.viscous_n_per_mps * v + self.quadratic_n_per_mps2 * v * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerGains {
    pub ground_speed_p_per_s: f64,
    pub ground_speed_i_per_s2: f64,
    pub ground_accel_limit_mps2: f64,
    pub speed_integral_limit_m: f64,
    pub yaw_rate_p_per_s: f64,
    pub flight_position_p_per_s: f64,
    pub flight_velocity_p_per_s: f64,
    pub flight_max_horizontal_speed_mps: f64,
    pub flight_max_vertical_speed_mps: f64,
    pub flight_max_tilt_deg: f64,
    pub attitude_p_per_s: f64,
    pub rate_p_per_s: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            ground_speed_p_per_s: 2.0,
            ground_speed_i_per_s2: 0.5,
            ground_accel_limit_mps2: 0.5,
            speed_integral_limit_m: 1.0,
            yaw_rate_p_per_s: 4.0,
            // kv = 4·kp gives a critically damped altitude loop.
            flight_position_p_per_s: 1.0,
            flight_velocity_p_per_s: 4.0,
            flight_max_horizontal_speed_mps: 3.0,
            flight_max_vertical_speed_mps: 1.5,
            flight_max_tilt_deg: 25.0,
            attitude_p_per_s: 8.0,
            rate_p_per_s: 25.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geofence {
    pub max_altitude_m: f64,
    pub max_horizontal_m: f64,
}

impl Default for Geofence {
    fn default() -> Self {
        Self { max_altitude_m: 120.0, max_horizontal_m: 1000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt_s: f64,
    /// Time for an axle to sweep 90°.
    pub tilt_time_s: f64,
    pub speed_limit_mps: f64,
    /// Scales static rotor-table power to installed power.
    pub installed_factor: f64,
    pub drivetrain: DrivetrainLosses,
    pub flight_drag_n_per_mps: f64,
    /// Rotor drag torque per newton of thrust.
    pub yaw_torque_coeff_m: f64,
    pub avionics_power_w: f64,
    pub geofence: Geofence,
    pub gains: ControllerGains,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_s: 0.001,
            tilt_time_s: 1.0,
            speed_limit_mps: 4.1,
            installed_factor: 1.0,
            drivetrain: DrivetrainLosses { viscous_n_per_mps: 0.0, quadratic_n_per_mps2: 0.0 },
            flight_drag_n_per_mps: 0.3,
            yaw_torque_coeff_m: 0.016,
            avionics_power_w: 5.0,
            geofence: Geofence::default(),
            gains: ControllerGains::default(),
        }
    }
}

impl SimConfig {
    /// Defaults with the installed factor and drive losses taken from the
    /// power model, so a steady drive at the calibration speeds draws the
    /// calibrated ground power.
    pub fn calibrated(model: &PowerModel, payload_kg: f64) -> Result<Self, EnergyError> {
        let config = model.config(payload_kg)?;
        let mut sim = Self { installed_factor: config.installed_factor, ..Self::default() };
        sim.drivetrain = fit_drivetrain(model, payload_kg, [1.0, sim.speed_limit_mps])?;
        Ok(sim)
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("dt_s", self.dt_s),
            ("tilt_time_s", self.tilt_time_s),
            ("speed_limit_mps", self.speed_limit_mps),
            ("installed_factor", self.installed_factor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.dt_s <= 0.02) {
            return Err(format!("dt_s must not exceed 0.02, got {}", self.dt_s));
        }
        let d = self.drivetrain;
        if !(d.viscous_n_per_mps >= 0.0 && d.quadratic_n_per_mps2 >= 0.0 && self.flight_drag_n_per_mps >= 0.0) {
            return Err("loss coefficients must be non-negative".into());
        }
        Ok(())
    }
}

/// Solves for `b`, `k` such that the rear pair, pushing against rolling
/// resistance plus `b·v + k·v²`, draws the calibrated ground power at both
/// `speeds`.
fn fit_drivetrain(model: &PowerModel, payload_kg: f64, speeds: [f64; 2]) -> Result<DrivetrainLosses, EnergyError> {
    let config = model.config(payload_kg)?;
    let params = model.params().with_payload(payload_kg);
    let rolling = params.rolling_resistance_coeff * params.weight();
    let mut losses = [0.0; 2];
    for (loss, &v) in losses.iter_mut().zip(&speeds) {
        let per_rotor = config.ground.power(v) / (2.0 * config.installed_factor);
        let thrust = model.rotor().thrust_for_power(per_rotor)?;
        *loss = 2.0 * thrust - rolling;
    }
    let [v1, v2] = speeds;
    let a = Matrix2::new(v1, v1 * v1, v2, v2 * v2);
    let x = a.lu().solve(&Vector2::new(losses[0], losses[1])).ok_or(EnergyError::Singular)?;
    Ok(DrivetrainLosses { viscous_n_per_mps: x[0].max(0.0), quadratic_n_per_mps2: x[1].max(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibrated_losses_are_positive() {
        let c = SimConfig::calibrated(&PowerModel::calibrated_default(), 0.0).unwrap();
        assert!(c.drivetrain.viscous_n_per_mps > 0.0);
        assert!(c.drivetrain.quadratic_n_per_mps2 > 0.0);
        assert!((c.installed_factor - 2.64).abs() < 0.05);
        c.validate().unwrap();
    }

    #[test]
    fn oversized_step_is_invalid() {
        let c = SimConfig { dt_s: 0.05, ..SimConfig::default() };
        assert!(c.validate().is_err());
    }
}

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::STANDARD_GRAVITY;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("empty mass {empty} kg + payload {payload} kg exceeds MTOM {mtom} kg")]
    OverMtom { empty: f64, payload: f64, mtom: f64 },
    #[error("center of mass height {com} m must be below body height {height} m")]
    ComAboveBody { com: f64, height: f64 },
    #[error("rotor positions must be symmetric about both body axes")]
    AsymmetricRotors,
    #[error("expected 2 tilt axles, got {0}")]
    TiltAxleCount(u32),
}

/// Rotor slots in body frame (x forward, y right, z down).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotorIndex {
    FrontLeft = 0,
    FrontRight = 1,
    RearLeft = 2,
    RearRight = 3,
}

impl RotorIndex {
    pub const ALL: [RotorIndex; 4] =
        [RotorIndex::FrontLeft, RotorIndex::FrontRight, RotorIndex::RearLeft, RotorIndex::RearRight];

    pub fn is_front(self) -> bool {
        matches!(self, RotorIndex::FrontLeft | RotorIndex::FrontRight)
    }

    pub fn is_left(self) -> bool {
        matches!(self, RotorIndex::FrontLeft | RotorIndex::RearLeft)
    }
}

/// Physical description of the vehicle. Every other module reads masses,
/// geometry and contact coefficients from here.
///
/// Serialized keys carry their unit as a suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    #[serde(rename = "empty_mass_kg")]
    pub empty_mass: f64,
    #[serde(rename = "payload_mass_kg")]
    pub payload_mass: f64,
    #[serde(rename = "mtom_kg")]
    pub mtom: f64,
    /// length, width, height
    #[serde(rename = "body_dims_m")]
    pub body_dims: [f64; 3],
    #[serde(rename = "wheel_contact_half_spacing_long_m")]
    pub wheel_contact_half_spacing_long: f64,
    #[serde(rename = "wheel_contact_half_spacing_lat_m")]
    pub wheel_contact_half_spacing_lat: f64,
    /// Height of the center of mass above the wheel contact plane.
    #[serde(rename = "com_height_m")]
    pub com_height: f64,
    #[serde(rename = "wheel_ground_clearance_m")]
    pub wheel_ground_clearance: f64,
    /// Rotor hub lever arms in body frame, ordered as [`RotorIndex::ALL`].
    #[serde(rename = "rotor_positions_m")]
    pub rotor_positions: [[f64; 3]; 4],
    pub tilt_axle_count: u32,
    #[serde(rename = "gravity_mps2")]
    pub gravity: f64,
    pub rolling_resistance_coeff: f64,
    pub wall_friction_coeff: f64,
    /// Principal moments of inertia about body x, y, z.
    #[serde(rename = "inertia_kgm2")]
    pub inertia: [f64; 3],
}

impl Default for VehicleParams {
    fn default() -> Self {
        let arm = 0.22;
        Self {
            empty_mass: 2.7,
            payload_mass: 0.0,
            mtom: 4.0,
            body_dims: [0.695, 0.6935, 0.302],
            // atan(0.270 / 0.1501) = 60.93 deg, the measured tipping slope.
            wheel_contact_half_spacing_long: 0.270,
            wheel_contact_half_spacing_lat: 0.300,
            com_height: 0.1501,
            wheel_ground_clearance: 0.05,
            rotor_positions: [[arm, -arm, 0.0], [arm, arm, 0.0], [-arm, -arm, 0.0], [-arm, arm, 0.0]],
            tilt_axle_count: 2,
            gravity: STANDARD_GRAVITY,
            rolling_resistance_coeff: 0.03,
            wall_friction_coeff: 0.6,
            inertia: [0.045, 0.045, 0.08],
        }
    }
}

impl VehicleParams {
    /// Mass currently carried: empty vehicle plus payload.
    pub fn mass(&self) -> f64 {
        self.empty_mass + self.payload_mass
    }

    pub fn weight(&self) -> f64 {
        self.mass() * self.gravity
    }

    pub fn rotor_position(&self, rotor: RotorIndex) -> Vector3<f64> {
        Vector3::from(self.rotor_positions[rotor as usize])
    }

    pub fn with_payload(&self, payload: f64) -> Self {
        Self { payload_mass: payload, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("empty_mass_kg", self.empty_mass),
            ("mtom_kg", self.mtom),
            ("body length", self.body_dims[0]),
            ("body width", self.body_dims[1]),
            ("body height", self.body_dims[2]),
            ("wheel_contact_half_spacing_long_m", self.wheel_contact_half_spacing_long),
            ("wheel_contact_half_spacing_lat_m", self.wheel_contact_half_spacing_lat),
            ("com_height_m", self.com_height),
            ("wheel_ground_clearance_m", self.wheel_ground_clearance),
            ("gravity_mps2", self.gravity),
            ("inertia x", self.inertia[0]),
            ("inertia y", self.inertia[1]),
            ("inertia z", self.inertia[2]),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive { field, value });
            }
        }
        for (field, value) in [
            ("payload_mass_kg", self.payload_mass),
            ("rolling_resistance_coeff", self.rolling_resistance_coeff),
            ("wall_friction_coeff", self.wall_friction_coeff),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ParamError::NonPositive { field, value });
            }
        }
        if self.empty_mass + self.payload_mass > self.mtom + 1e-12 {
            return Err(ParamError::OverMtom { empty: self.empty_mass, payload: self.payload_mass, mtom: self.mtom });
        }
        if self.com_height >= self.body_dims[2] {
            return Err(ParamError::ComAboveBody { com: self.com_height, height: self.body_dims[2] });
        }
        if self.tilt_axle_count != 2 {
            return Err(ParamError::TiltAxleCount(self.tilt_axle_count));
        }
        self.check_rotor_symmetry()
    }

    fn check_rotor_symmetry(&self) -> Result<(), ParamError> {
        let p = |r: RotorIndex| self.rotor_positions[r as usize];
        let (fl, fr, rl, rr) =
            (p(RotorIndex::FrontLeft), p(RotorIndex::FrontRight), p(RotorIndex::RearLeft), p(RotorIndex::RearRight));
        let tol = 1e-9;
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        let symmetric = fl[0] > 0.0
            && fl[1] < 0.0
            && close(fl[0], fr[0])
            && close(fl[1], -fr[1])
            && close(rl[0], -fl[0])
            && close(rl[1], fl[1])
            && close(rr[0], -fl[0])
            && close(rr[1], fr[1])
            && [fl, fr, rl, rr].iter().all(|q| close(q[2], fl[2]));
        if symmetric {
            Ok(())
        } else {
            Err(ParamError::AsymmetricRotors)
        }
    }

    /// Lateral distance from the body x axis to the rotor hubs.
    pub fn rotor_lateral_arm(&self) -> f64 {
        self.rotor_positions[RotorIndex::FrontRight as usize][1].abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        VehicleParams::default().validate().unwrap();
    }

    #[test]
    fn payload_over_mtom_is_rejected() {
        let p = VehicleParams::default().with_payload(1.5);
        assert!(matches!(p.validate(), Err(ParamError::OverMtom { .. })));
        VehicleParams::default().with_payload(1.3).validate().unwrap();
    }

    #[test]
    fn asymmetric_rotors_are_rejected() {
        let mut p = VehicleParams::default();
        p.rotor_positions[3][1] = 0.25;
        assert_eq!(p.validate(), Err(ParamError::AsymmetricRotors));
    }

    #[test]
    fn com_must_sit_below_body_top() {
        let p = VehicleParams { com_height: 0.4, ..VehicleParams::default() };
        assert!(matches!(p.validate(), Err(ParamError::ComAboveBody { .. })));
    }

    #[test]
    fn config_keys_carry_units() {
        let json = serde_json::to_value(VehicleParams::default()).unwrap();
        assert!(json.get("empty_mass_kg").is_some());
        assert!(json.get("com_height_m").is_some());
        let err = serde_json::from_str::<VehicleParams>(r#"{"empty_mass": 2.0}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }
}

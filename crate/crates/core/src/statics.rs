//! Closed-form static analyses.
//!
//! Conventions: angles are degrees at the API boundary. The tipping and
//! wall-attachment checks are quasi-static moment balances about a wheel
//! contact line, with thrust acting in the wheel contact plane (the rotors
//! ride on the wheel axles), so only gravity at the center of mass and the
//! contact normal load produce moments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vehicle::{RotorModel, VehicleParams};
use crate::Execution;

#[derive(Debug, Error, PartialEq)]
pub enum StaticsError {
    #[error("{name} = {value} deg outside [{min}, {max}] deg")]
    AngleOutOfRange { name: &'static str, value: f64, min: f64, max: f64 },
    #[error("thrust must be non-negative and finite, got {0} N")]
    NegativeThrust(f64),
    #[error("no tilt in (90, 180) deg keeps the vehicle attached and climbing with the available thrust")]
    NoFeasibleTilt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceDecomposition {
    pub f_parallel_n: f64,
    pub f_perpendicular_n: f64,
    pub pitch_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeAnalysis {
    pub slope_deg: f64,
    pub required_total_thrust_n: f64,
    pub tipping_margin_deg: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallClimbAnalysis {
    /// 0 = flight orientation, 90 = ground mode, 135 = the usual wall setting.
    pub tilt_deg: f64,
    /// `None` when no finite thrust balances gravity at this tilt.
    pub required_thrust_n: Option<f64>,
    pub normal_force_n: Option<f64>,
    /// Restoring minus peeling moment about the lower wheel pair.
    pub anti_tip_moment_nm: Option<f64>,
    pub attached: bool,
    pub climb_feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallTiltOptimum {
    pub tilt_deg: f64,
    pub required_thrust_n: f64,
    pub step_deg: f64,
}

fn check_angle(name: &'static str, value: f64, min: f64, max: f64) -> Result<(), StaticsError> {
    if value.is_finite() && (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(StaticsError::AngleOutOfRange { name, value, min, max })
    }
}

/// Splits the thrust of a pitched conventional multirotor into the
/// ground-parallel (propulsive) and ground-normal parts.
pub fn decompose_thrust(total_thrust: f64, pitch_deg: f64) -> Result<ForceDecomposition, StaticsError> {
    if !(total_thrust.is_finite() && total_thrust >= 0.0) {
        return Err(StaticsError::NegativeThrust(total_thrust));
    }
    check_angle("pitch", pitch_deg, 0.0, 90.0)?;
    let (s, c) = pitch_deg.to_radians().sin_cos();
    Ok(ForceDecomposition { f_parallel_n: total_thrust * s, f_perpendicular_n: total_thrust * c, pitch_deg })
}

/// Pitch a conventional design needs to push along a surface of the given slope.
pub fn conventional_pitch_for_slope(slope_deg: f64) -> Result<f64, StaticsError> {
    check_angle("slope", slope_deg, 0.0, 90.0)?;
    Ok(90.0 - slope_deg)
}

/// Longitudinal tipping slope: the gravity line through the center of mass
/// reaches the downhill wheel contact line.
pub fn tipping_slope(params: &VehicleParams) -> f64 {
    (params.wheel_contact_half_spacing_long / params.com_height).atan().to_degrees()
}

pub fn lateral_tipping_slope(params: &VehicleParams) -> f64 {
    (params.wheel_contact_half_spacing_lat / params.com_height).atan().to_degrees()
}

/// Thrust needed to hold (or, when `moving`, drive up) an incline with the
/// tilt-axle layout, where thrust acts parallel to the surface.
pub fn incline_equilibrium(
    params: &VehicleParams,
    rotor: &RotorModel,
    slope_deg: f64,
    moving: bool,
) -> Result<SlopeAnalysis, StaticsError> {
    check_angle("slope", slope_deg, 0.0, 90.0)?;
    let weight = params.weight();
    let (s, c) = slope_deg.to_radians().sin_cos();
    let mut required = weight * s;
    if moving {
        required += params.rolling_resistance_coeff * weight * c;
    }
    let limit = tipping_slope(params);
    Ok(SlopeAnalysis {
        slope_deg,
        required_total_thrust_n: required,
        tipping_margin_deg: limit - slope_deg,
        feasible: slope_deg < limit && required <= 4.0 * rotor.max_thrust(),
    })
}

/// Force balance on a vertical wall with both axles tilted the same way.
///
/// With `γ = β − 90°` the angle between thrust and the wall plane, the
/// wall-normal component `F·sin γ` presses the wheels on, and the steady
/// climb balance `F·cos γ = m·g + C_rr·F·sin γ` fixes `F`. Holding still
/// (`climbing == false`) drops the rolling term.
pub fn wall_climb_analysis(
    params: &VehicleParams,
    rotor: &RotorModel,
    tilt_deg: f64,
    climbing: bool,
) -> Result<WallClimbAnalysis, StaticsError> {
    check_angle("tilt", tilt_deg, 90.0, 180.0)?;
    let weight = params.weight();
    let gamma = (tilt_deg - 90.0).to_radians();
    let (s, c) = gamma.sin_cos();
    let rolling = if climbing { params.rolling_resistance_coeff } else { 0.0 };
    let denominator = c - rolling * s;

    let infeasible = WallClimbAnalysis {
        tilt_deg,
        required_thrust_n: None,
        normal_force_n: None,
        anti_tip_moment_nm: None,
        attached: false,
        climb_feasible: false,
    };
    if denominator <= 1e-12 {
        return Ok(infeasible);
    }
    let thrust = weight / denominator;
    let normal = thrust * s;
    let moment = normal * params.wheel_contact_half_spacing_long - weight * params.com_height;
    let attached = normal > 0.0 && moment >= 0.0;
    Ok(WallClimbAnalysis {
        required_thrust_n: Some(thrust),
        normal_force_n: Some(normal),
        anti_tip_moment_nm: Some(moment),
        attached,
        climb_feasible: attached && thrust <= 4.0 * rotor.max_thrust(),
        ..infeasible
    })
}

/// Grid search over `β ∈ (90°, 180°)` for the tilt with the least climbing
/// thrust that still keeps the vehicle attached; ties go to the smaller tilt.
pub fn optimal_wall_tilt(params: &VehicleParams, rotor: &RotorModel) -> Result<WallTiltOptimum, StaticsError> {
    optimal_wall_tilt_with_step(params, rotor, 0.1, Execution::default())
}

pub fn optimal_wall_tilt_with_step(
    params: &VehicleParams,
    rotor: &RotorModel,
    step_deg: f64,
    execution: Execution,
) -> Result<WallTiltOptimum, StaticsError> {
    let sweep = wall_tilt_sweep(params, rotor, step_deg, execution);
    sweep
        .iter()
        .filter(|a| a.climb_feasible)
        .filter_map(|a| a.required_thrust_n.map(|t| (a.tilt_deg, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .map(|(tilt_deg, required_thrust_n)| WallTiltOptimum { tilt_deg, required_thrust_n, step_deg })
        .ok_or(StaticsError::NoFeasibleTilt)
}

/// Wall analyses at `90 + k·step` for every grid point strictly inside (90, 180).
pub fn wall_tilt_sweep(
    params: &VehicleParams,
    rotor: &RotorModel,
    step_deg: f64,
    execution: Execution,
) -> Vec<WallClimbAnalysis> {
    assert!(step_deg > 0.0, "step must be positive");
    let count = (90.0 / step_deg).ceil() as usize;
    let tilts: Vec<f64> = (1..count).map(|k| 90.0 + k as f64 * step_deg).filter(|&b| b < 180.0).collect();
    execution.map(&tilts, |&tilt| wall_climb_analysis(params, rotor, tilt, true).expect("tilt inside domain"))
}

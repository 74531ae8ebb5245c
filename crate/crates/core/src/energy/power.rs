use serde::{Deserialize, Serialize};

use super::battery::{propulsion_usable_energy_wh, Battery};
use super::EnergyError;
use crate::statics::{tipping_slope, wall_climb_analysis};
use crate::vehicle::{RotorModel, VehicleParams};

/// Payload keys match within this tolerance.
const PAYLOAD_TOLERANCE_KG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedPowerPoint {
    pub speed_mps: f64,
    pub power_w: f64,
}

/// `P(v) = linear·v + cubic·v³`: rolling losses plus aerodynamic drag, zero at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPowerCoeffs {
    #[serde(rename = "c1_w_s_per_m")]
    pub linear: f64,
    #[serde(rename = "c3_w_s3_per_m3")]
    pub cubic: f64,
}

impl GroundPowerCoeffs {
    pub fn power(&self, speed: f64) -> f64 {
        self.linear * speed + self.cubic * speed * speed * speed
    }
}

/// Least-squares fit of [`GroundPowerCoeffs`]; two points are solved exactly.
pub fn calibrate_ground_power(points: &[SpeedPowerPoint]) -> Result<GroundPowerCoeffs, EnergyError> {
    if points.len() < 2 {
        return Err(EnergyError::Underdetermined(points.len()));
    }
    if let Some(p) = points.iter().find(|p| !(p.speed_mps.is_finite() && p.speed_mps > 0.0)) {
        return Err(EnergyError::BadSpeed(p.speed_mps));
    }
    // Normal equations of [v, v³]·[c1, c3]ᵀ = P. For two points this is the
    // square system itself, so solve that directly to keep the fit exact.
    let (a11, a12, a21, a22, b1, b2) = if points.len() == 2 {
        let (p, q) = (points[0], points[1]);
        (p.speed_mps, p.speed_mps.powi(3), q.speed_mps, q.speed_mps.powi(3), p.power_w, q.power_w)
    } else {
        let mut m = [0.0; 6];
        for p in points {
            let (v, v3) = (p.speed_mps, p.speed_mps.powi(3));
            m[0] += v * v;
            m[1] += v * v3;
            m[3] += v3 * v3;
            m[4] += v * p.power_w;
            m[5] += v3 * p.power_w;
        }
        (m[0], m[1], m[1], m[3], m[4], m[5])
    };
    let det = a11 * a22 - a12 * a21;
    let scale = (a11 * a22).abs().max((a12 * a21).abs());
    if !(det.abs() > 1e-12 * scale) {
        return Err(EnergyError::Singular);
    }
    Ok(GroundPowerCoeffs { linear: (b1 * a22 - a12 * b2) / det, cubic: (a11 * b2 - a21 * b1) / det })
}

/// Measurements for one payload configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadCalibration {
    pub payload_kg: f64,
    pub ground_points: Vec<SpeedPowerPoint>,
    /// Measured forward flight power at the reference speed.
    pub flight_power_w: f64,
    /// Defaults to `flight_power_w`: at the 1 m/s reference speed parasitic
    /// drag is negligible.
    #[serde(default)]
    pub hover_power_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerCalibration {
    pub payload_configs: Vec<PayloadCalibration>,
}

impl Default for PowerCalibration {
    /// Measured figures: 29.8 W driving at 1 m/s (28.8× less than flying),
    /// 58.6 W with 2 kg payload (25.5× less). The 4.1 m/s point follows from
    /// the 8.2 km range on 95.2 Wh. The payload curve reuses the empty curve
    /// shape scaled to its single measured point.
    fn default() -> Self {
        let empty_shape = [(1.0, 29.8), (4.1, 171.4)];
        let payload_scale = 58.6 / 29.8;
        let points = |scale: f64| {
            empty_shape.iter().map(|&(v, p)| SpeedPowerPoint { speed_mps: v, power_w: p * scale }).collect::<Vec<_>>()
        };
        let mut payload_points = points(payload_scale);
        payload_points[0].power_w = 58.6;
        Self {
            payload_configs: vec![
                PayloadCalibration {
                    payload_kg: 0.0,
                    ground_points: points(1.0),
                    flight_power_w: 29.8 * 28.8,
                    hover_power_w: None,
                },
                PayloadCalibration {
                    payload_kg: 2.0,
                    ground_points: payload_points,
                    flight_power_w: 58.6 * 25.5,
                    hover_power_w: None,
                },
            ],
        }
    }
}

/// Calibrated coefficients for one payload configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadConfig {
    pub payload_kg: f64,
    pub ground: GroundPowerCoeffs,
    pub flight_power_w: f64,
    pub hover_power_w: f64,
    /// Measured flight power over the static-table hover power at the same
    /// mass. Scales every rotor-table power to installed conditions (frame
    /// blockage, cage, wake interference).
    pub installed_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    Ground,
    Incline,
    Wall,
    Flight,
    Hover,
}

/// Per-mode electrical power of the propulsion system.
///
/// Ground power comes from the fitted speed curve. Incline and wall powers
/// add or use rotor-table power for the thrust the statics demand, scaled by
/// the installed factor. Flight and hover are calibrated constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub configs: Vec<PayloadConfig>,
    params: VehicleParams,
    rotor: RotorModel,
}

impl PowerModel {
    pub fn calibrate(
        params: &VehicleParams,
        rotor: &RotorModel,
        calibration: &PowerCalibration,
    ) -> Result<Self, EnergyError> {
        let base = params.with_payload(0.0);
        let mut configs = Vec::with_capacity(calibration.payload_configs.len());
        for cal in &calibration.payload_configs {
            let ground = calibrate_ground_power(&cal.ground_points)?;
            let hover_thrust = (base.empty_mass + cal.payload_kg) * base.gravity / 4.0;
            let table_hover = 4.0 * rotor.power_at_thrust(hover_thrust)?;
            configs.push(PayloadConfig {
                payload_kg: cal.payload_kg,
                ground,
                flight_power_w: cal.flight_power_w,
                hover_power_w: cal.hover_power_w.unwrap_or(cal.flight_power_w),
                installed_factor: cal.flight_power_w / table_hover,
            });
        }
        Ok(Self { configs, params: base, rotor: rotor.clone() })
    }

    /// Default vehicle, bundled rotor table and the measured calibration.
    pub fn calibrated_default() -> Self {
        Self::calibrate(&VehicleParams::default(), &RotorModel::default_rotor(), &PowerCalibration::default())
            .expect("default calibration is consistent")
    }

    pub fn rotor(&self) -> &RotorModel {
        &self.rotor
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn config(&self, payload_kg: f64) -> Result<&PayloadConfig, EnergyError> {
        self.configs
            .iter()
            .find(|c| (c.payload_kg - payload_kg).abs() <= PAYLOAD_TOLERANCE_KG)
            .ok_or(EnergyError::UnknownPayload(payload_kg))
    }

    /// Power for `mode` at `speed`; `angle_deg` is the slope for
    /// [`PowerMode::Incline`] and the axle tilt for [`PowerMode::Wall`], and
    /// ignored otherwise.
    pub fn mode_power(&self, mode: PowerMode, speed: f64, payload_kg: f64, angle_deg: f64) -> Result<f64, EnergyError> {
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(EnergyError::NegativeSpeed(speed));
        }
        let config = self.config(payload_kg)?;
        match mode {
            PowerMode::Ground => Ok(config.ground.power(speed)),
            PowerMode::Incline => self.incline_power(config, speed, angle_deg),
            PowerMode::Wall => self.wall_power(config, speed, angle_deg),
            PowerMode::Flight => Ok(config.flight_power_w),
            PowerMode::Hover => Ok(config.hover_power_w),
        }
    }

    /// Ground term plus the rear pair holding `m·g·sin ψ`, counted above idle
    /// so a zero slope reduces to plain ground power.
    fn incline_power(&self, config: &PayloadConfig, speed: f64, slope_deg: f64) -> Result<f64, EnergyError> {
        let limit = tipping_slope(&self.params);
        if !(slope_deg.is_finite() && (0.0..limit).contains(&slope_deg)) {
            return Err(EnergyError::OutsideEnvelope {
                mode: "incline",
                reason: format!("slope {slope_deg} deg outside [0, {limit:.2}) deg"),
            });
        }
        let weight = (self.params.empty_mass + config.payload_kg) * self.params.gravity;
        let per_rotor = weight * slope_deg.to_radians().sin() / 2.0;
        let rotor_power = self.rotor.power_at_thrust(per_rotor)? - self.rotor.idle_power();
        Ok(config.ground.power(speed) + config.installed_factor * 2.0 * rotor_power)
    }

    fn wall_power(&self, config: &PayloadConfig, speed: f64, tilt_deg: f64) -> Result<f64, EnergyError> {
        let params = self.params.with_payload(config.payload_kg);
        let analysis = wall_climb_analysis(&params, &self.rotor, tilt_deg, speed > 0.0)?;
        match analysis.required_thrust_n {
            Some(thrust) if analysis.attached => {
                Ok(config.installed_factor * 4.0 * self.rotor.power_at_thrust(thrust / 4.0)?)
            }
            _ => Err(EnergyError::OutsideEnvelope {
                mode: "wall",
                reason: format!("tilt {tilt_deg} deg cannot keep the vehicle attached"),
            }),
        }
    }
}

/// Flight power over ground power at the same speed.
pub fn endurance_ratio(model: &PowerModel, payload_kg: f64, speed: f64) -> Result<f64, EnergyError> {
    let ground = model.mode_power(PowerMode::Ground, speed, payload_kg, 0.0)?;
    if ground <= 0.0 {
        return Err(EnergyError::UndefinedRatio(speed));
    }
    Ok(model.mode_power(PowerMode::Flight, speed, payload_kg, 0.0)? / ground)
}

/// Distance in meters covered on the propulsion packs' usable energy.
pub fn range_estimate(
    model: &PowerModel,
    batteries: &[Battery],
    mode: PowerMode,
    speed: f64,
    payload_kg: f64,
    angle_deg: f64,
) -> Result<f64, EnergyError> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(EnergyError::NonPositiveSpeed(speed));
    }
    let power = model.mode_power(mode, speed, payload_kg, angle_deg)?;
    Ok(propulsion_usable_energy_wh(batteries) * 3600.0 / power * speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::default_batteries;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pt(speed_mps: f64, power_w: f64) -> SpeedPowerPoint {
        SpeedPowerPoint { speed_mps, power_w }
    }

    #[test]
    fn two_point_fit_matches_linear_solve() {
        let c = calibrate_ground_power(&[pt(1.0, 29.8), pt(4.1, 171.4)]).unwrap();
        assert_relative_eq!(c.linear, 29.04067818, epsilon = 1e-6);
        assert_relative_eq!(c.cubic, 0.75932182, epsilon = 1e-6);
    }

    #[test]
    fn exact_fit_reproduces_inputs() {
        let c = calibrate_ground_power(&[pt(1.0, 10.0), pt(2.0, 20.0)]).unwrap();
        assert_relative_eq!(c.power(1.0), 10.0, epsilon = 1e-12);
        assert_relative_eq!(c.power(2.0), 20.0, epsilon = 1e-12);
        assert_relative_eq!(c.cubic, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn calibration_errors() {
        assert_eq!(calibrate_ground_power(&[pt(1.0, 29.8)]), Err(EnergyError::Underdetermined(1)));
        assert_eq!(calibrate_ground_power(&[pt(2.0, 29.8), pt(2.0, 31.0)]), Err(EnergyError::Singular));
        assert_eq!(calibrate_ground_power(&[pt(0.0, 0.0), pt(2.0, 31.0)]), Err(EnergyError::BadSpeed(0.0)));
    }

    #[test]
    fn least_squares_recovers_noiseless_curve() {
        let truth = GroundPowerCoeffs { linear: 25.0, cubic: 0.9 };
        let points: Vec<_> = [0.5, 1.0, 2.0, 3.0, 4.0].iter().map(|&v| pt(v, truth.power(v))).collect();
        let fit = calibrate_ground_power(&points).unwrap();
        assert_relative_eq!(fit.linear, 25.0, epsilon = 1e-9);
        assert_relative_eq!(fit.cubic, 0.9, epsilon = 1e-9);
    }

    #[test]
    fn ground_power_hits_measurements() {
        let model = PowerModel::calibrated_default();
        assert_relative_eq!(model.mode_power(PowerMode::Ground, 1.0, 0.0, 0.0).unwrap(), 29.8, epsilon = 1e-12);
        assert_relative_eq!(model.mode_power(PowerMode::Ground, 1.0, 2.0, 0.0).unwrap(), 58.6, epsilon = 1e-12);
        assert_eq!(model.mode_power(PowerMode::Ground, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(model.mode_power(PowerMode::Ground, 1.0, 0.7, 0.0), Err(EnergyError::UnknownPayload(0.7)));
    }

    #[test]
    fn endurance_ratios() {
        let model = PowerModel::calibrated_default();
        assert!((endurance_ratio(&model, 0.0, 1.0).unwrap() - 28.8).abs() <= 0.1);
        assert!((endurance_ratio(&model, 2.0, 1.0).unwrap() - 25.5).abs() <= 0.1);
        assert_eq!(endurance_ratio(&model, 0.0, 0.0), Err(EnergyError::UndefinedRatio(0.0)));
    }

    #[test]
    fn ratio_invariant_to_common_scaling() {
        let mut cal = PowerCalibration::default();
        for c in &mut cal.payload_configs {
            c.flight_power_w *= 3.0;
            for p in &mut c.ground_points {
                p.power_w *= 3.0;
            }
        }
        let scaled = PowerModel::calibrate(&VehicleParams::default(), &RotorModel::default_rotor(), &cal).unwrap();
        let base = PowerModel::calibrated_default();
        assert_relative_eq!(
            endurance_ratio(&scaled, 0.0, 1.0).unwrap(),
            endurance_ratio(&base, 0.0, 1.0).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn ranges() {
        let model = PowerModel::calibrated_default();
        let batteries = default_batteries();
        let slow = range_estimate(&model, &batteries, PowerMode::Ground, 1.0, 0.0, 0.0).unwrap();
        let fast = range_estimate(&model, &batteries, PowerMode::Ground, 4.1, 0.0, 0.0).unwrap();
        assert!((slow - 11_500.0).abs() / 11_500.0 <= 0.05, "{slow}");
        assert!((fast - 8_200.0).abs() / 8_200.0 <= 0.05, "{fast}");

        let mut doubled = batteries.clone();
        for b in &mut doubled {
            b.capacity_ah *= 2.0;
        }
        let twice = range_estimate(&model, &doubled, PowerMode::Ground, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(twice, 2.0 * slow, max_relative = 1e-12);
        assert!(range_estimate(&model, &batteries, PowerMode::Ground, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn mode_ordering() {
        let model = PowerModel::calibrated_default();
        let p = |mode, v, a| model.mode_power(mode, v, 0.0, a).unwrap();
        let ground = p(PowerMode::Ground, 1.0, 0.0);
        let incline = p(PowerMode::Incline, 1.0, 33.0);
        let hover = p(PowerMode::Hover, 0.0, 0.0);
        let wall = p(PowerMode::Wall, 1.0, 135.0);
        let flight = p(PowerMode::Flight, 1.0, 0.0);
        assert!(
            0.0 < ground && ground < incline && incline < hover && hover < wall,
            "{ground} {incline} {hover} {wall}"
        );
        assert!(wall > flight);
    }

    #[test]
    fn incline_envelope() {
        let model = PowerModel::calibrated_default();
        assert_eq!(
            model.mode_power(PowerMode::Incline, 1.0, 0.0, 0.0).unwrap(),
            model.mode_power(PowerMode::Ground, 1.0, 0.0, 0.0).unwrap()
        );
        assert!(model.mode_power(PowerMode::Incline, 1.0, 0.0, 61.0).is_err());
    }

    #[test]
    fn installed_factor_reproduces_flight_power_at_hover_thrust() {
        let model = PowerModel::calibrated_default();
        let config = model.config(0.0).unwrap();
        let table = 4.0 * model.rotor().power_at_thrust(2.7 * 9.81 / 4.0).unwrap();
        assert_relative_eq!(config.installed_factor * table, 858.24, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn ground_power_increasing_and_convex(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let model = PowerModel::calibrated_default();
            let g = |v| model.mode_power(PowerMode::Ground, v, 0.0, 0.0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(g(lo) < g(hi));
            prop_assert!(g(0.5 * (lo + hi)) <= 0.5 * (g(lo) + g(hi)) + 1e-9);
        }

        #[test]
        fn incline_power_increasing(a in 0.0f64..60.9, b in 0.0f64..60.9) {
            prop_assume!((a - b).abs() > 1e-6);
            let model = PowerModel::calibrated_default();
            let f = |s| model.mode_power(PowerMode::Incline, 1.0, 0.0, s).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(f(lo) < f(hi));
        }
    }
}

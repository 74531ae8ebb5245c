use nalgebra::{Matrix3, Matrix4, Rotation3, UnitQuaternion, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::SimConfig;
use super::state::{ActiveTransition, ControlSetpoint, ControllerMemory, Mode, SimState, TiltState};
use super::surface::SurfaceModel;
use super::transition::{mode_transition, TiltSchedule, TransitionRejected};
use crate::vehicle::{ParamError, RotorIndex, RotorModel, VehicleParams};

/// Propeller spin direction, +1 for clockwise seen from above.
const SPIN: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid simulator config: {0}")]
    Config(String),
    #[error("flight mixer is singular for this rotor layout")]
    SingularMixer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TipAxis {
    Longitudinal,
    Lateral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultKind {
    Tip {
        axis: TipAxis,
    },
    /// Net force pulls the wheels off a floor or incline.
    LiftOff,
    /// Wall contact lost.
    Detached,
    Diverged,
    InvalidStep {
        dt_s: f64,
    },
    InvalidSetpoint {
        reason: String,
    },
    OutsideGeofence,
}

/// A step that could not be completed. `last_valid` is the input state.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("simulation fault at t = {time_s:.3} s: {kind:?}")]
pub struct SimFault {
    pub kind: FaultKind,
    pub time_s: f64,
    pub last_valid: Box<SimState>,
}

/// Per-rotor thrusts for surface driving with the resulting body force and
/// yaw moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundAllocation {
    pub thrusts_n: [f64; 4],
    pub commands: [f64; 4],
    pub longitudinal_force_n: f64,
    pub yaw_moment_nm: f64,
}

impl GroundAllocation {
    pub fn left_n(&self) -> f64 {
        self.thrusts_n[RotorIndex::RearLeft as usize] - self.thrusts_n[RotorIndex::FrontLeft as usize]
    }

    pub fn right_n(&self) -> f64 {
        self.thrusts_n[RotorIndex::RearRight as usize] - self.thrusts_n[RotorIndex::FrontRight as usize]
    }

    /// Left minus right net forward force.
    pub fn differential_n(&self) -> f64 {
        self.left_n() - self.right_n()
    }
}

/// Splits a forward force and yaw moment over the four rotors in the inward
/// ground configuration.
///
/// Each side pushes with its rear rotor or brakes with its front rotor,
/// never both. When the request exceeds what one rotor per side can give,
/// the yaw moment is cut first so the forward force survives.
pub fn allocate_ground(force_n: f64, yaw_moment_nm: f64, max_thrust_n: f64, lateral_arm_m: f64) -> [f64; 4] {
    let force = force_n.clamp(-2.0 * max_thrust_n, 2.0 * max_thrust_n);
    let headroom = (max_thrust_n - force.abs() / 2.0).max(0.0);
    let half_diff = (yaw_moment_nm / (2.0 * lateral_arm_m)).clamp(-headroom, headroom);
    let left = force / 2.0 + half_diff;
    let right = force / 2.0 - half_diff;
    let split = |side: f64| if side >= 0.0 { (0.0, side) } else { (-side, 0.0) };
    let (fl, rl) = split(left);
    let (fr, rr) = split(right);
    [fl, fr, rl, rr]
}

/// Velocity update for a body held by Coulomb-type resistance of magnitude
/// `resist` (static and kinetic equal), with zero-crossing clamped.
fn resisted(v: f64, drive: f64, resist: f64, mass: f64, dt: f64) -> f64 {
    if v == 0.0 {
        if drive.abs() <= resist {
            0.0
        } else {
            (drive - drive.signum() * resist) / mass * dt
        }
    } else {
        let next = v + (drive - v.signum() * resist) / mass * dt;
        if next * v < 0.0 {
            0.0
        } else {
            next
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulator {
    params: VehicleParams,
    rotor: RotorModel,
    config: SimConfig,
    inertia: Matrix3<f64>,
    mixer_inverse: Matrix4<f64>,
}

impl Simulator {
    pub fn new(params: VehicleParams, rotor: RotorModel, config: SimConfig) -> Result<Self, SimError> {
        params.validate()?;
        config.validate().map_err(SimError::Config)?;
        let inertia = Matrix3::from_diagonal(&Vector3::from(params.inertia));
        let mut sim = Self { params, rotor, config, inertia, mixer_inverse: Matrix4::zeros() };
        let mut mixer = Matrix4::zeros();
        for r in RotorIndex::ALL {
            let (f, tau) = sim.rotor_wrench(&TiltState::FLIGHT, r, 1.0);
            mixer.set_column(r as usize, &Vector4::new(-f.z, tau.x, tau.y, tau.z));
        }
        sim.mixer_inverse = mixer.try_inverse().ok_or(SimError::SingularMixer)?;
        Ok(sim)
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn rotor(&self) -> &RotorModel {
        &self.rotor
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Body force and torque (about the center of mass) of one rotor.
    fn rotor_wrench(&self, tilt: &TiltState, rotor: RotorIndex, thrust: f64) -> (Vector3<f64>, Vector3<f64>) {
        let d = tilt.thrust_direction(rotor);
        let f = d * thrust;
        let r = self.params.rotor_position(rotor);
        let drag_torque = d * (SPIN[rotor as usize] * self.config.yaw_torque_coeff_m * thrust);
        (f, r.cross(&f) + drag_torque)
    }

    fn total_wrench(&self, tilt: &TiltState, thrusts: &[f64; 4]) -> (Vector3<f64>, Vector3<f64>) {
        RotorIndex::ALL.iter().fold((Vector3::zeros(), Vector3::zeros()), |(f, t), &r| {
            let (fi, ti) = self.rotor_wrench(tilt, r, thrusts[r as usize]);
            (f + fi, t + ti)
        })
    }

    pub fn commands_for(&self, thrusts: &[f64; 4]) -> [f64; 4] {
        let max = self.rotor.max_thrust();
        thrusts.map(|t| self.rotor.command_for_thrust(t.clamp(0.0, max)).expect("thrust clamped to table range"))
    }

    /// Installed electrical power; stopped rotors draw nothing.
    pub fn electrical_power(&self, thrusts: &[f64; 4]) -> f64 {
        let max = self.rotor.max_thrust();
        let table: f64 = thrusts
            .iter()
            .filter(|&&t| t > 0.0)
            .map(|&t| self.rotor.power_at_thrust(t.min(max)).expect("thrust clamped to table range"))
            .sum();
        self.config.installed_factor * table
    }

    /// Normal load with no thrust component along the surface normal.
    fn static_normal_load(&self, surface: &SurfaceModel) -> f64 {
        -self.params.mass() * self.params.gravity * surface.normal().z
    }

    fn gravity(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.params.gravity)
    }

    fn resistance(&self, surface: &SurfaceModel, normal_load: f64, speed: f64) -> f64 {
        surface.rolling_resistance * normal_load + self.config.drivetrain.force(speed)
    }

    /// Speed and yaw controller output for Ground/Incline mode.
    pub fn ground_command(
        &self,
        state: &SimState,
        speed_target: f64,
        yaw_rate_target: f64,
        surface: &SurfaceModel,
    ) -> GroundAllocation {
        let g = &self.config.gains;
        let m = self.params.mass();
        let x_b = state.attitude * Vector3::x();
        let v = state.velocity.dot(&x_b);
        let normal = self.static_normal_load(surface);

        let accel =
            (g.ground_speed_p_per_s * (speed_target - v)).clamp(-g.ground_accel_limit_mps2, g.ground_accel_limit_mps2);
        let feedforward = if speed_target == 0.0 {
            0.0
        } else {
            speed_target.signum() * self.resistance(surface, normal, speed_target)
        };
        let gravity_comp = -m * self.gravity().dot(&x_b);
        let force =
            m * accel + feedforward + gravity_comp + m * g.ground_speed_i_per_s2 * state.controller.speed_integral;

        let r = state.angular_velocity.z;
        let scrub = if yaw_rate_target == 0.0 {
            0.0
        } else {
            yaw_rate_target.signum() * self.yaw_scrub_moment(surface, normal)
        };
        let moment = self.params.inertia[2] * g.yaw_rate_p_per_s * (yaw_rate_target - r) + scrub;

        let arm = self.params.rotor_lateral_arm();
        let thrusts = allocate_ground(force, moment, self.rotor.max_thrust(), arm);
        let (fl, fr, rl, rr) = (thrusts[0], thrusts[1], thrusts[2], thrusts[3]);
        GroundAllocation {
            thrusts_n: thrusts,
            commands: self.commands_for(&thrusts),
            longitudinal_force_n: rl + rr - fl - fr,
            yaw_moment_nm: arm * ((rl - fl) - (rr - fr)),
        }
    }

    /// Rotor commands that track `speed_target` along the body x axis.
    pub fn ground_longitudinal_control(&self, state: &SimState, speed_target: f64, surface: &SurfaceModel) -> [f64; 4] {
        self.ground_command(state, speed_target, 0.0, surface).commands
    }

    /// Left/right split for `yaw_rate_target` while holding the current speed.
    pub fn ground_yaw_control(
        &self,
        state: &SimState,
        yaw_rate_target: f64,
        surface: &SurfaceModel,
    ) -> GroundAllocation {
        let v = state.velocity.dot(&(state.attitude * Vector3::x()));
        self.ground_command(state, v, yaw_rate_target, surface)
    }

    fn yaw_scrub_moment(&self, surface: &SurfaceModel, normal_load: f64) -> f64 {
        surface.lateral_friction * normal_load * self.params.wheel_contact_half_spacing_long
    }

    /// Uniform rotor thrust that drives up a wall at `climb_speed` in the
    /// same-sense configuration while keeping the anti-tip moment positive.
    fn wall_thrusts(&self, state: &SimState, climb_speed: f64, surface: &SurfaceModel) -> [f64; 4] {
        let g = &self.config.gains;
        let m = self.params.mass();
        let x_b = state.attitude * Vector3::x();
        let n = surface.normal();
        let v = state.velocity.dot(&x_b);
        let d = state.tilt.thrust_direction(RotorIndex::RearLeft);
        let (along, into) = (d.x, d.z);
        if along <= 0.0 {
            return [0.0; 4];
        }
        let accel = (g.ground_speed_p_per_s * (climb_speed - v))
            .clamp(-g.ground_accel_limit_mps2, g.ground_accel_limit_mps2)
            + g.ground_speed_i_per_s2 * state.controller.speed_integral;
        let gravity_along = m * self.gravity().dot(&x_b);
        let gravity_normal = m * self.gravity().dot(&n);
        let crr = surface.rolling_resistance;
        let need = m * accel - gravity_along + self.config.drivetrain.force(climb_speed) - crr * gravity_normal;
        let per_rotor = need / (4.0 * (along - crr * into));
        let h = self.params.com_height;
        let attach = (gravity_along.abs() * h / self.params.wheel_contact_half_spacing_long + gravity_normal)
            / (4.0 * into.max(1e-9));
        let t = per_rotor.max(attach * 1.05).clamp(0.0, self.rotor.max_thrust());
        [t; 4]
    }

    /// Cascaded position, velocity, attitude and rate loops.
    pub fn flight_position_control(
        &self,
        state: &SimState,
        target: Vector3<f64>,
        yaw: f64,
    ) -> Result<[f64; 4], FaultKind> {
        let fence = &self.config.geofence;
        if -target.z > fence.max_altitude_m
            || target.xy().norm() > fence.max_horizontal_m
            || !target.iter().all(|v| v.is_finite())
        {
            return Err(FaultKind::OutsideGeofence);
        }
        let g = &self.config.gains;
        let m = self.params.mass();

        let mut v_cmd = (target - state.position) * g.flight_position_p_per_s;
        let horizontal = v_cmd.xy().norm();
        if horizontal > g.flight_max_horizontal_speed_mps {
            let s = g.flight_max_horizontal_speed_mps / horizontal;
            v_cmd.x *= s;
            v_cmd.y *= s;
        }
        v_cmd.z = v_cmd.z.clamp(-g.flight_max_vertical_speed_mps, g.flight_max_vertical_speed_mps);
        let accel = (v_cmd - state.velocity) * g.flight_velocity_p_per_s;

        let mut force = (accel - self.gravity()) * m + state.velocity * self.config.flight_drag_n_per_mps;
        force.z = force.z.min(-0.2 * m * self.params.gravity);
        let max_horizontal = g.flight_max_tilt_deg.to_radians().tan() * -force.z;
        let horizontal = force.xy().norm();
        if horizontal > max_horizontal {
            let s = max_horizontal / horizontal;
            force.x *= s;
            force.y *= s;
        }

        let z_des = -force.normalize();
        let heading = Vector3::new(yaw.cos(), yaw.sin(), 0.0);
        let y_des = z_des.cross(&heading).normalize();
        let x_des = y_des.cross(&z_des);
        let desired =
            UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[
                x_des, y_des, z_des,
            ])));
        let collective = force.dot(&-(state.attitude * Vector3::z())).max(0.0);

        let error = (state.attitude.inverse() * desired).scaled_axis();
        let w = state.angular_velocity;
        let rate_cmd = error * g.attitude_p_per_s;
        let torque = self.inertia * ((rate_cmd - w) * g.rate_p_per_s) + w.cross(&(self.inertia * w));

        let u = self.mixer_inverse * Vector4::new(collective, torque.x, torque.y, torque.z);
        let max = self.rotor.max_thrust();
        Ok([u[0], u[1], u[2], u[3]].map(|t| t.clamp(0.0, max)))
    }

    /// Axle sweep for a mode change, or the reason it is not allowed now.
    pub fn mode_transition(&self, state: &SimState, target: Mode) -> Result<TiltSchedule, TransitionRejected> {
        mode_transition(state, target, self.config.tilt_time_s)
    }

    /// Puts `state` into the transition towards `target`.
    pub fn begin_transition(&self, state: &SimState, target: Mode) -> Result<SimState, TransitionRejected> {
        let schedule = self.mode_transition(state, target)?;
        let mut next = state.clone();
        next.mode = Mode::Transition;
        next.rotor_commands = [0.0; 4];
        next.velocity = Vector3::zeros();
        next.angular_velocity = Vector3::zeros();
        next.power_w = 0.0;
        next.transition = Some(ActiveTransition { schedule, started_at_s: state.time_s });
        Ok(next)
    }

    /// One semi-implicit Euler step.
    pub fn step(
        &self,
        state: &SimState,
        setpoint: &ControlSetpoint,
        surface: &SurfaceModel,
        dt: f64,
    ) -> Result<SimState, SimFault> {
        let fault = |kind: FaultKind| SimFault { kind, time_s: state.time_s, last_valid: Box::new(state.clone()) };
        if !(dt > 0.0 && dt <= 0.02) {
            return Err(fault(FaultKind::InvalidStep { dt_s: dt }));
        }
        if let Some(v) = setpoint.speed_target() {
            if !(v.is_finite() && v.abs() <= self.config.speed_limit_mps) {
                return Err(fault(FaultKind::InvalidSetpoint {
                    reason: format!("speed {v} m/s outside ±{} m/s", self.config.speed_limit_mps),
                }));
            }
        }
        let mut next = match state.mode {
            Mode::Transition => self.step_transition(state, surface, dt),
            Mode::Flight => self.step_flight(state, setpoint, surface, dt).map_err(fault)?,
            Mode::Ground | Mode::Incline | Mode::Wall => {
                self.step_surface(state, setpoint, surface, dt).map_err(fault)?
            }
        };
        next.time_s = state.time_s + dt;
        if !next.is_finite() {
            return Err(fault(FaultKind::Diverged));
        }
        Ok(next)
    }

    fn step_transition(&self, state: &SimState, surface: &SurfaceModel, dt: f64) -> SimState {
        let mut next = state.clone();
        next.velocity = Vector3::zeros();
        next.angular_velocity = Vector3::zeros();
        next.rotor_commands = [0.0; 4];
        next.power_w = 0.0;
        let Some(active) = &state.transition else {
            return next;
        };
        let elapsed = state.time_s + dt - active.started_at_s;
        let schedule = &active.schedule;
        next.tilt = schedule.at(elapsed);
        if elapsed >= schedule.duration_s {
            next.tilt = schedule.end;
            next.mode = schedule.target_mode;
            next.transition = None;
            next.controller = ControllerMemory::default();
            if next.mode.on_surface() {
                next.attitude = surface.attitude(heading_on(surface, &state.attitude));
                let offset = surface.height_of(&next.position) - self.params.com_height;
                if offset != 0.0 {
                    next.position -= surface.normal() * offset;
                }
                next.contact = [true; 4];
            }
        }
        next
    }

    fn step_surface(
        &self,
        state: &SimState,
        setpoint: &ControlSetpoint,
        surface: &SurfaceModel,
        dt: f64,
    ) -> Result<SimState, FaultKind> {
        let m = self.params.mass();
        let gains = &self.config.gains;
        let mut memory = state.controller;
        let x_b = state.attitude * Vector3::x();
        let v_long = state.velocity.dot(&x_b);

        let thrusts = match (state.mode, setpoint) {
            (_, ControlSetpoint::Idle) => [0.0; 4],
            (Mode::Ground | Mode::Incline, ControlSetpoint::Ground { speed_mps, yaw_rate_radps }) => {
                self.ground_command(state, *speed_mps, *yaw_rate_radps, surface).thrusts_n
            }
            (Mode::Ground | Mode::Incline, ControlSetpoint::Incline { speed_mps }) => {
                self.ground_command(state, *speed_mps, 0.0, surface).thrusts_n
            }
            (Mode::Wall, ControlSetpoint::Wall { climb_speed_mps }) => {
                self.wall_thrusts(state, *climb_speed_mps, surface)
            }
            (mode, sp) => {
                return Err(FaultKind::InvalidSetpoint { reason: format!("{sp:?} not accepted in {mode:?} mode") });
            }
        };
        if let Some(target) = setpoint.speed_target() {
            let limit = gains.speed_integral_limit_m;
            memory.speed_integral = (memory.speed_integral + (target - v_long) * dt).clamp(-limit, limit);
        }

        let (f_body, tau_body) = self.total_wrench(&state.tilt, &thrusts);
        let applied = state.attitude * f_body + self.gravity() * m;
        let n = surface.normal();
        let normal_load = -applied.dot(&n);
        if normal_load < -1e-9 * applied.norm().max(1.0) {
            return Err(if state.mode == Mode::Wall { FaultKind::Detached } else { FaultKind::LiftOff });
        }
        let normal_load = normal_load.max(0.0);

        // Quasi-static tipping about the downhill and side wheel lines.
        let y_b = state.attitude * Vector3::y();
        let h = self.params.com_height;
        let weight = self.gravity() * m;
        if weight.dot(&x_b).abs() * h > normal_load * self.params.wheel_contact_half_spacing_long {
            return Err(if state.mode == Mode::Wall {
                FaultKind::Detached
            } else {
                FaultKind::Tip { axis: TipAxis::Longitudinal }
            });
        }
        if weight.dot(&y_b).abs() * h > normal_load * self.params.wheel_contact_half_spacing_lat {
            return Err(FaultKind::Tip { axis: TipAxis::Lateral });
        }

        let v_long_next = resisted(v_long, applied.dot(&x_b), self.resistance(surface, normal_load, v_long), m, dt);
        let v_lat = state.velocity.dot(&y_b);
        let v_lat_next = resisted(v_lat, applied.dot(&y_b), surface.lateral_friction * normal_load, m, dt);
        let r = state.angular_velocity.z;
        let r_next = resisted(r, tau_body.z, self.yaw_scrub_moment(surface, normal_load), self.params.inertia[2], dt);

        let mut next = state.clone();
        if r_next != 0.0 {
            next.attitude = state.attitude * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), r_next * dt);
        }
        let (x_n, y_n) = (next.attitude * Vector3::x(), next.attitude * Vector3::y());
        next.velocity = x_n * v_long_next + y_n * v_lat_next;
        next.angular_velocity = Vector3::new(0.0, 0.0, r_next);
        next.position = state.position + next.velocity * dt;
        let offset = surface.height_of(&next.position) - h;
        if offset != 0.0 {
            next.position -= n * offset;
        }
        next.rotor_commands = self.commands_for(&thrusts);
        next.power_w = self.electrical_power(&thrusts);
        next.contact = [true; 4];
        next.controller = memory;
        Ok(next)
    }

    fn step_flight(
        &self,
        state: &SimState,
        setpoint: &ControlSetpoint,
        surface: &SurfaceModel,
        dt: f64,
    ) -> Result<SimState, FaultKind> {
        let thrusts = match setpoint {
            ControlSetpoint::Idle => [0.0; 4],
            ControlSetpoint::Flight { position_m, yaw_rad } => {
                self.flight_position_control(state, Vector3::from(*position_m), *yaw_rad)?
            }
            sp => return Err(FaultKind::InvalidSetpoint { reason: format!("{sp:?} not accepted in Flight mode") }),
        };
        let m = self.params.mass();
        let (f_body, tau_body) = self.total_wrench(&state.tilt, &thrusts);
        let force = state.attitude * f_body + self.gravity() * m - state.velocity * self.config.flight_drag_n_per_mps;
        let w = state.angular_velocity;
        let w_dot = self.inertia.try_inverse().expect("inertia is positive definite")
            * (tau_body - w.cross(&(self.inertia * w)));

        let mut next = state.clone();
        next.angular_velocity = w + w_dot * dt;
        next.attitude = state.attitude * UnitQuaternion::from_scaled_axis(next.angular_velocity * dt);
        next.velocity = state.velocity + force / m * dt;
        next.position = state.position + next.velocity * dt;

        let n = surface.normal();
        let offset = surface.height_of(&next.position) - self.params.com_height;
        let touching = offset <= 1e-9;
        if offset < 0.0 {
            next.position -= n * offset;
            let into = next.velocity.dot(&n);
            if into < 0.0 {
                next.velocity -= n * into;
            }
            // Resting on the wheels: friction and the wheel base hold it still.
            if force.dot(&n) <= 0.0 {
                next.velocity = Vector3::zeros();
                next.angular_velocity = Vector3::zeros();
                next.attitude = surface.attitude(heading_on(surface, &next.attitude));
            }
        }
        next.contact = [touching; 4];
        next.rotor_commands = self.commands_for(&thrusts);
        next.power_w = self.electrical_power(&thrusts);
        Ok(next)
    }
}

/// Heading of the body x axis projected on the surface, from uphill
/// towards the right.
fn heading_on(surface: &SurfaceModel, attitude: &UnitQuaternion<f64>) -> f64 {
    let x = attitude * Vector3::x();
    let uphill = surface.uphill();
    let right = (-surface.normal()).cross(&uphill);
    x.dot(&right).atan2(x.dot(&uphill))
}

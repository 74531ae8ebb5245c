use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::surface::{sin_cos_deg, SurfaceModel};
use super::transition::TiltSchedule;
use crate::vehicle::{RotorIndex, VehicleParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Flight,
    Ground,
    Incline,
    Wall,
    Transition,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Flight => "flight",
            Mode::Ground => "ground",
            Mode::Incline => "incline",
            Mode::Wall => "wall",
            Mode::Transition => "transition",
        }
    }

    pub fn on_surface(self) -> bool {
        matches!(self, Mode::Ground | Mode::Incline | Mode::Wall)
    }
}

/// Which way the front axle is turned relative to the rear one. Inward puts
/// the front thrust rearward and the rear thrust forward; Same turns both
/// forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxleSense {
    Inward,
    Same,
}

/// Axle tilt configuration. Angles are measured from the flight position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltState {
    pub front_deg: f64,
    pub rear_deg: f64,
    pub sense: AxleSense,
}

impl TiltState {
    pub const FLIGHT: TiltState = TiltState { front_deg: 0.0, rear_deg: 0.0, sense: AxleSense::Inward };
    pub const GROUND: TiltState = TiltState { front_deg: 90.0, rear_deg: 90.0, sense: AxleSense::Inward };
    pub const WALL: TiltState = TiltState { front_deg: 135.0, rear_deg: 135.0, sense: AxleSense::Same };

    pub fn for_mode(mode: Mode) -> Option<TiltState> {
        match mode {
            Mode::Flight => Some(Self::FLIGHT),
            Mode::Ground | Mode::Incline => Some(Self::GROUND),
            Mode::Wall => Some(Self::WALL),
            Mode::Transition => None,
        }
    }

    /// Front tilt as one signed angle: positive inward, negative same-sense.
    pub(crate) fn front_signed(&self) -> f64 {
        match self.sense {
            AxleSense::Inward => self.front_deg,
            AxleSense::Same => -self.front_deg,
        }
    }

    pub(crate) fn from_signed(front_signed: f64, rear_deg: f64) -> Self {
        let sense = if front_signed < 0.0 { AxleSense::Same } else { AxleSense::Inward };
        Self { front_deg: front_signed.abs(), rear_deg, sense }
    }

    /// Unit thrust direction of `rotor` in body frame.
    pub fn thrust_direction(&self, rotor: RotorIndex) -> Vector3<f64> {
        if rotor.is_front() {
            let (s, c) = sin_cos_deg(self.front_signed());
            Vector3::new(-s, 0.0, -c)
        } else {
            let (s, c) = sin_cos_deg(self.rear_deg);
            Vector3::new(s, 0.0, -c)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerMemory {
    pub speed_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveTransition {
    pub schedule: TiltSchedule,
    pub started_at_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub time_s: f64,
    /// Center of mass, world north-east-down.
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Body to world rotation.
    pub attitude: UnitQuaternion<f64>,
    /// Body frame.
    pub angular_velocity: Vector3<f64>,
    pub tilt: TiltState,
    pub rotor_commands: [f64; 4],
    pub mode: Mode,
    pub contact: [bool; 4],
    /// Propulsion electrical power during the last step.
    pub power_w: f64,
    pub controller: ControllerMemory,
    pub transition: Option<ActiveTransition>,
}

impl SimState {
    /// At rest on `surface` with the mode's axle configuration.
    pub fn resting(params: &VehicleParams, surface: &SurfaceModel, mode: Mode, heading_rad: f64) -> Self {
        Self {
            time_s: 0.0,
            position: surface.normal() * params.com_height,
            velocity: Vector3::zeros(),
            attitude: surface.attitude(heading_rad),
            angular_velocity: Vector3::zeros(),
            tilt: TiltState::for_mode(mode).unwrap_or(TiltState::GROUND),
            rotor_commands: [0.0; 4],
            mode,
            contact: [true; 4],
            power_w: 0.0,
            controller: ControllerMemory::default(),
            transition: None,
        }
    }

    /// Airborne, level, at `position`.
    pub fn hovering(position: Vector3<f64>, heading_rad: f64) -> Self {
        Self {
            time_s: 0.0,
            position,
            velocity: Vector3::zeros(),
            attitude: UnitQuaternion::from_euler_angles(0.0, 0.0, heading_rad),
            angular_velocity: Vector3::zeros(),
            tilt: TiltState::FLIGHT,
            rotor_commands: [0.0; 4],
            mode: Mode::Flight,
            contact: [false; 4],
            power_w: 0.0,
            controller: ControllerMemory::default(),
            transition: None,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn all_wheels_in_contact(&self) -> bool {
        self.contact.iter().all(|&c| c)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.angular_velocity.iter().all(|v| v.is_finite())
            && self.attitude.coords.iter().all(|v| v.is_finite())
            && self.rotor_commands.iter().all(|v| v.is_finite())
            && self.power_w.is_finite()
    }

    /// Kinetic energy of translation plus rotation.
    pub fn kinetic_energy(&self, params: &VehicleParams) -> f64 {
        let w = &self.angular_velocity;
        let i = params.inertia;
        0.5 * params.mass() * self.velocity.norm_squared()
            + 0.5 * (i[0] * w.x * w.x + i[1] * w.y * w.y + i[2] * w.z * w.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ControlSetpoint {
    /// Zero commands in any mode.
    Idle,
    Flight {
        position_m: [f64; 3],
        #[serde(default)]
        yaw_rad: f64,
    },
    Ground {
        speed_mps: f64,
        #[serde(default)]
        yaw_rate_radps: f64,
    },
    Incline {
        speed_mps: f64,
    },
    Wall {
        climb_speed_mps: f64,
    },
}

impl ControlSetpoint {
    pub fn speed_target(&self) -> Option<f64> {
        match *self {
            ControlSetpoint::Ground { speed_mps, .. } | ControlSetpoint::Incline { speed_mps } => Some(speed_mps),
            ControlSetpoint::Wall { climb_speed_mps } => Some(climb_speed_mps),
            _ => None,
        }
    }
}

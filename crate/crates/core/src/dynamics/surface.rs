use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

/// Sine and cosine of an angle in degrees, exact at multiples of 90.
pub(crate) fn sin_cos_deg(deg: f64) -> (f64, f64) {
    match deg {
        0.0 => (0.0, 1.0),
        90.0 => (1.0, 0.0),
        180.0 => (0.0, -1.0),
        -90.0 => (-1.0, 0.0),
        d => d.to_radians().sin_cos(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    Flat,
    Incline { slope_deg: f64 },
    Wall,
}

/// A plane through the world origin the wheels can roll on.
///
/// World frame is north-east-down. An incline rises towards +x; a wall is
/// the limit of a 90° incline, its free side towards −x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceModel {
    #[serde(rename = "shape")]
    pub kind: SurfaceKind,
    pub rolling_resistance: f64,
    pub lateral_friction: f64,
}

impl SurfaceModel {
    pub fn flat() -> Self {
        Self { kind: SurfaceKind::Flat, rolling_resistance: 0.03, lateral_friction: 0.6 }
    }

    pub fn incline(slope_deg: f64) -> Self {
        Self { kind: SurfaceKind::Incline { slope_deg }, ..Self::flat() }
    }

    pub fn wall() -> Self {
        Self { kind: SurfaceKind::Wall, ..Self::flat() }
    }

    pub fn slope_deg(&self) -> f64 {
        match self.kind {
            SurfaceKind::Flat => 0.0,
            SurfaceKind::Incline { slope_deg } => slope_deg,
            SurfaceKind::Wall => 90.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        let slope_ok = match self.kind {
            SurfaceKind::Incline { slope_deg } => (0.0..90.0).contains(&slope_deg),
            _ => true,
        };
        slope_ok && self.rolling_resistance >= 0.0 && self.lateral_friction >= 0.0
    }

    /// Outward unit normal (towards free space).
    pub fn normal(&self) -> Vector3<f64> {
        let (s, c) = sin_cos_deg(self.slope_deg());
        Vector3::new(-s, 0.0, -c)
    }

    /// Unit vector pointing uphill in the plane.
    pub fn uphill(&self) -> Vector3<f64> {
        let (s, c) = sin_cos_deg(self.slope_deg());
        Vector3::new(c, 0.0, -s)
    }

    /// Body attitude resting on the surface with `heading` measured from
    /// uphill, positive to the right.
    pub fn attitude(&self, heading_rad: f64) -> UnitQuaternion<f64> {
        let down = -self.normal();
        let uphill = self.uphill();
        let right = down.cross(&uphill);
        let (s, c) = heading_rad.sin_cos();
        let x = uphill * c + right * s;
        let y = down.cross(&x);
        let rotation = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, down]));
        UnitQuaternion::from_rotation_matrix(&rotation)
    }

    /// Height of a point above the plane.
    pub fn height_of(&self, point: &Vector3<f64>) -> f64 {
        point.dot(&self.normal())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frames_are_orthonormal() {
        for surface in [SurfaceModel::flat(), SurfaceModel::incline(33.0), SurfaceModel::wall()] {
            let (n, u) = (surface.normal(), surface.uphill());
            assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(n.dot(&u), 0.0, epsilon = 1e-12);
            let q = surface.attitude(0.3);
            assert_relative_eq!(q * Vector3::z(), -n, epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_attitude_is_identity() {
        let q = SurfaceModel::flat().attitude(0.0);
        assert_relative_eq!(q.angle(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wall_uphill_is_world_up() {
        assert_eq!(SurfaceModel::wall().uphill(), Vector3::new(0.0, 0.0, -1.0));
        assert_eq!(SurfaceModel::wall().normal(), Vector3::new(-1.0, 0.0, 0.0));
    }
}

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Cartesian vector in the scene frame: x–y is the ground plane, z is up.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vector3 = Vector3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vector3 = Vector3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vector3 = Vector3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vector3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vector3) -> Vector3 {
        Vector3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vector3 {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn min(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    /// Rotation about +z by `angle_deg` (counter-clockwise seen from above).
    pub fn rotated_z(self, angle_deg: f64) -> Vector3 {
        let (s, c) = angle_deg.to_radians().sin_cos();
        Vector3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl From<[f64; 3]> for Vector3 {
    fn from(a: [f64; 3]) -> Self {
        Vector3::new(a[0], a[1], a[2])
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vector3 {
    fn add_assign(&mut self, o: Vector3) {
        *self = *self + o;
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vector3 {
    type Output = Vector3;
    fn div(self, s: f64) -> Vector3 {
        Vector3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

/// Unit vector pointing from the scene origin toward (azimuth, elevation).
///
/// Azimuth is measured counter-clockwise from +x in the ground plane and
/// wraps modulo 360; elevation is measured up from the ground plane.
pub fn direction_from_angles(azimuth_deg: f64, elevation_deg: f64) -> Vector3 {
    let az = azimuth_deg.rem_euclid(360.0).to_radians();
    let el = elevation_deg.to_radians();
    let (saz, caz) = az.sin_cos();
    let (sel, cel) = el.sin_cos();
    Vector3::new(cel * caz, cel * saz, sel)
}

/// Horizontal polarization unit vector (phi-hat) for a direction at `azimuth_deg`.
pub fn horizontal_unit(azimuth_deg: f64) -> Vector3 {
    let (s, c) = azimuth_deg.rem_euclid(360.0).to_radians().sin_cos();
    Vector3::new(-s, c, 0.0)
}

/// Vertical polarization unit vector: `r̂ × φ̂`, which points up for
/// directions above the horizon.
pub fn vertical_unit(azimuth_deg: f64, elevation_deg: f64) -> Vector3 {
    direction_from_angles(azimuth_deg, elevation_deg).cross(horizontal_unit(azimuth_deg))
}

/// Azimuth in degrees in [0, 360) of the ground projection of `v`.
pub fn azimuth_of(v: Vector3) -> f64 {
    v.y.atan2(v.x).to_degrees().rem_euclid(360.0)
}

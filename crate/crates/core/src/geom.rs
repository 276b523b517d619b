//! Small 3-D vector and oriented-cuboid toolkit shared by the scene, oracle and
//! point-cloud modules.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector, or zero for a zero-length input.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            Vec3::ZERO
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn rotate_z(self, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// One planar rectangular face of a cuboid.
#[derive(Debug, Clone, Copy)]
pub struct Face {
    pub center: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub half_u: f64,
    pub half_v: f64,
}

impl Face {
    /// Signed distance of `p` from the face plane, positive on the outward side.
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        (p - self.center).dot(self.normal)
    }

    /// Whether an in-plane point lies within the face rectangle (inflated by `tol`).
    pub fn contains_in_plane(&self, p: Vec3, tol: f64) -> bool {
        let d = p - self.center;
        d.dot(self.u).abs() <= self.half_u + tol && d.dot(self.v).abs() <= self.half_v + tol
    }

    pub fn mirror(&self, p: Vec3) -> Vec3 {
        p - self.normal * (2.0 * self.signed_distance(p))
    }
}

/// A box with a vertical axis, rotated by `yaw` about z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    pub center: Vec3,
    /// Full extents along the local x (length), y (width) and z (height) axes.
    pub dims: Vec3,
    pub yaw: f64,
}

impl Cuboid {
    pub fn new(center: Vec3, dims: Vec3, yaw: f64) -> Self {
        Cuboid { center, dims, yaw }
    }

    pub fn half(&self) -> Vec3 {
        self.dims * 0.5
    }

    pub fn to_local(&self, p: Vec3) -> Vec3 {
        (p - self.center).rotate_z(-self.yaw)
    }

    pub fn dir_to_local(&self, d: Vec3) -> Vec3 {
        d.rotate_z(-self.yaw)
    }

    pub fn from_local(&self, p: Vec3) -> Vec3 {
        p.rotate_z(self.yaw) + self.center
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        let l = self.to_local(p);
        let h = self.half();
        l.x.abs() <= h.x + tol && l.y.abs() <= h.y + tol && l.z.abs() <= h.z + tol
    }

    /// Euclidean distance from `p` to the cuboid boundary surface.
    pub fn surface_distance(&self, p: Vec3) -> f64 {
        let l = self.to_local(p);
        let h = self.half();
        let q = Vec3::new(l.x.abs() - h.x, l.y.abs() - h.y, l.z.abs() - h.z);
        let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
        let inside = q.x.max(q.y).max(q.z).min(0.0);
        outside + inside.abs()
    }

    /// Slab test in the local frame. Returns the entry/exit ray parameters when the
    /// infinite line `origin + t * dir` crosses the box.
    pub fn slab(&self, origin: Vec3, dir: Vec3) -> Option<(f64, f64)> {
        let o = self.to_local(origin);
        let d = self.dir_to_local(dir);
        let h = self.half();
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for (oa, da, ha) in [(o.x, d.x, h.x), (o.y, d.y, h.y), (o.z, d.z, h.z)] {
            if da == 0.0 {
                if oa.abs() > ha {
                    return None;
                }
            } else {
                let inv = 1.0 / da;
                let (mut a, mut b) = ((-ha - oa) * inv, (ha - oa) * inv);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                t0 = t0.max(a);
                t1 = t1.min(b);
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }

    /// First hit distance along a ray starting outside the box. Rays starting inside
    /// (or on the surface heading inward) report `None`.
    pub fn ray_hit(&self, origin: Vec3, dir: Vec3) -> Option<f64> {
        match self.slab(origin, dir) {
            Some((t0, t1)) if t0 > 0.0 && t0 <= t1 => Some(t0),
            _ => None,
        }
    }

    /// Whether the open segment `a`–`b` passes through the box interior. Grazing
    /// contact along a face or at an endpoint does not count.
    pub fn blocks_segment(&self, a: Vec3, b: Vec3) -> bool {
        const EPS: f64 = 1e-9;
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return false;
        }
        // Shrink the box slightly so that surface contact is not "interior".
        let shrunk = Cuboid {
            dims: Vec3::new(
                (self.dims.x - 2.0 * EPS).max(0.0),
                (self.dims.y - 2.0 * EPS).max(0.0),
                (self.dims.z - 2.0 * EPS).max(0.0),
            ),
            ..*self
        };
        match shrunk.slab(a, d) {
            Some((t0, t1)) => {
                let lo = t0.max(0.0);
                let hi = t1.min(1.0);
                (hi - lo) * len > EPS
            }
            None => false,
        }
    }

    /// Faces in the order +x, -x, +y, -y, +z, -z of the local frame.
    pub fn faces(&self) -> [Face; 6] {
        let h = self.half();
        let ex = Vec3::new(1.0, 0.0, 0.0).rotate_z(self.yaw);
        let ey = Vec3::new(0.0, 1.0, 0.0).rotate_z(self.yaw);
        let ez = Vec3::new(0.0, 0.0, 1.0);
        let c = self.center;
        [
            Face { center: c + ex * h.x, normal: ex, u: ey, v: ez, half_u: h.y, half_v: h.z },
            Face { center: c - ex * h.x, normal: -ex, u: ey, v: ez, half_u: h.y, half_v: h.z },
            Face { center: c + ey * h.y, normal: ey, u: ex, v: ez, half_u: h.x, half_v: h.z },
            Face { center: c - ey * h.y, normal: -ey, u: ex, v: ez, half_u: h.x, half_v: h.z },
            Face { center: c + ez * h.z, normal: ez, u: ex, v: ey, half_u: h.x, half_v: h.y },
            Face { center: c - ez * h.z, normal: -ez, u: ex, v: ey, half_u: h.x, half_v: h.y },
        ]
    }

    /// Footprint corners in the ground plane, counter-clockwise.
    pub fn footprint(&self) -> [(f64, f64); 4] {
        let h = self.half();
        [(-h.x, -h.y), (h.x, -h.y), (h.x, h.y), (-h.x, h.y)].map(|(x, y)| {
            let p = self.from_local(Vec3::new(x, y, 0.0));
            (p.x, p.y)
        })
    }
}

/// Azimuth in radians of the horizontal projection of `d`.
pub fn azimuth(d: Vec3) -> f64 {
    d.y.atan2(d.x)
}

/// Elevation in radians above the horizontal plane.
pub fn elevation(d: Vec3) -> f64 {
    d.z.atan2(d.x.hypot(d.y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Cuboid {
        Cuboid::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 2.0, 2.0), 0.0)
    }

    #[test]
    fn ray_hits_front_face() {
        let b = unit_box();
        let t = b.ray_hit(Vec3::new(-5.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
        assert!(b.ray_hit(Vec3::new(-5.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)).is_none());
        assert!(b.ray_hit(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn rotated_box_hit() {
        let b = Cuboid::new(Vec3::ZERO, Vec3::new(2.0, 2.0, 2.0), std::f64::consts::FRAC_PI_4);
        let t = b.ray_hit(Vec3::new(-5.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((t - (5.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn segment_touching_face_is_not_blocked() {
        let b = unit_box();
        assert!(!b.blocks_segment(Vec3::new(1.0, 0.0, 0.0), Vec3::new(5.0, 0.0, 0.0)));
        assert!(!b.blocks_segment(Vec3::new(-5.0, 1.0, 0.0), Vec3::new(5.0, 1.0, 0.0)));
        assert!(b.blocks_segment(Vec3::new(-5.0, 0.5, 0.0), Vec3::new(5.0, 0.5, 0.0)));
        assert!(!b.blocks_segment(Vec3::new(-5.0, 0.5, 0.0), Vec3::new(-1.5, 0.5, 0.0)));
    }

    #[test]
    fn surface_distance_inside_and_out() {
        let b = unit_box();
        assert!((b.surface_distance(Vec3::new(3.0, 0.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!((b.surface_distance(Vec3::new(0.5, 0.0, 0.0)) - 0.5).abs() < 1e-12);
        assert!(b.surface_distance(Vec3::new(1.0, 0.3, -0.2)).abs() < 1e-12);
    }

    #[test]
    fn faces_point_outward() {
        let b = Cuboid::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 2.0, 1.0), 0.3);
        for f in b.faces() {
            assert!((f.center - b.center).dot(f.normal) > 0.0);
            assert!(b.surface_distance(f.center) < 1e-12);
        }
    }
}

//! 3D vectors and the segment/sphere intersection used to locate
//! adsorption sites.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

/// Relative tolerance (fraction of the receiver radius) for deciding that a
/// computed point lies on the receiver surface.
pub const SURFACE_REL_TOL: f64 = 1e-9;

/// A point or displacement in µm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
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
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
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

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("segment does not reach the sphere (discriminant {discriminant:e})")]
    NoIntersection { discriminant: f64 },
    #[error("degenerate segment: start and end points coincide")]
    Degenerate,
}

pub fn distance_to_center(p: Vec3, center: Vec3) -> f64 {
    (p - center).norm()
}

/// Point where the segment from `p_prev` (outside or on the sphere) to
/// `p_new` (inside) first meets the sphere of radius `rr` about `center`.
///
/// The segment is parameterised by arc length `g ∈ [0, Δ]` along the unit
/// direction, and `g` is the smaller root of `a g² + b g + c = 0` with
/// `a = 1`, `b = 2 u·(p_prev − center)`, `c = |p_prev − center|² − rr²`.
pub fn line_sphere_intersection(p_prev: Vec3, p_new: Vec3, center: Vec3, rr: f64) -> Result<Vec3, GeometryError> {
    let step = p_new - p_prev;
    let length = step.norm();
    if length == 0.0 {
        return Err(GeometryError::Degenerate);
    }
    let dir = step * (1.0 / length);
    let rel = p_prev - center;

    let a = dir.norm_squared();
    let b = 2.0 * dir.dot(rel);
    let c = rel.norm_squared() - rr * rr;

    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        // Grazing segments land a hair below zero from rounding alone.
        if disc < -1e-12 * (b * b + (4.0 * a * c).abs()) {
            return Err(GeometryError::NoIntersection { discriminant: disc });
        }
        disc = 0.0;
    }
    let sqrt_disc = disc.sqrt();

    // Citardauq form: the two roots are q/a and c/q; neither suffers
    // cancellation.
    let q = -0.5 * (b + b.signum() * sqrt_disc);
    let g = if q == 0.0 {
        0.0
    } else {
        let (r1, r2) = (q / a, c / q);
        r1.min(r2)
    };
    let g = g.clamp(0.0, length);
    Ok(p_prev + dir * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: Vec3, b: Vec3, tol: f64) {
        assert!((a - b).norm() < tol, "{a:?} != {b:?}");
    }

    #[test]
    fn distances() {
        assert_eq!(distance_to_center(Vec3::new(3.0, 4.0, 0.0), Vec3::ZERO), 5.0);
        assert_eq!(distance_to_center(Vec3::new(10.0, 0.0, 0.0), Vec3::ZERO), 10.0);
        let p = Vec3::new(1.0, 1.0, 1.0);
        assert_eq!(distance_to_center(p, p), 0.0);
    }

    #[test]
    fn axis_aligned_crossing() {
        let hit =
            line_sphere_intersection(Vec3::new(12.0, 0.0, 0.0), Vec3::new(8.0, 0.0, 0.0), Vec3::ZERO, 10.0).unwrap();
        assert_close(hit, Vec3::new(10.0, 0.0, 0.0), 1e-12);
    }

    #[test]
    fn off_axis_crossing() {
        let hit =
            line_sphere_intersection(Vec3::new(11.0, 1.0, 0.0), Vec3::new(8.0, 1.0, 0.0), Vec3::ZERO, 10.0).unwrap();
        // x² + 1 = 100
        assert_close(hit, Vec3::new(99f64.sqrt(), 1.0, 0.0), 1e-12);
        assert!((hit.x - 9.94987).abs() < 1e-5);
    }

    #[test]
    fn start_on_surface_returns_start() {
        let start = Vec3::new(10.0, 0.0, 0.0);
        let hit = line_sphere_intersection(start, Vec3::new(9.0, 0.0, 0.0), Vec3::ZERO, 10.0).unwrap();
        assert_eq!(hit, start);
    }

    #[test]
    fn offset_center() {
        let c = Vec3::new(-3.0, 2.0, 5.0);
        let hit =
            line_sphere_intersection(c + Vec3::new(0.0, 0.0, 12.0), c + Vec3::new(0.0, 0.0, 8.0), c, 10.0).unwrap();
        assert_close(hit, c + Vec3::new(0.0, 0.0, 10.0), 1e-12);
    }

    #[test]
    fn error_cases() {
        let p = Vec3::new(12.0, 0.0, 0.0);
        assert_eq!(
            line_sphere_intersection(p, p, Vec3::ZERO, 10.0),
            Err(GeometryError::Degenerate)
        );
        let miss = line_sphere_intersection(
            Vec3::new(12.0, 11.0, 0.0),
            Vec3::new(-12.0, 11.0, 0.0),
            Vec3::ZERO,
            10.0,
        );
        assert!(matches!(miss, Err(GeometryError::NoIntersection { .. })));
    }

    #[test]
    fn tiny_step_from_near_surface_is_accurate() {
        // b² ≫ 4ac: the naive root formula loses most digits here.
        let rr = 10.0;
        let prev = Vec3::new(rr + 1e-9, 0.0, 0.0);
        let new = Vec3::new(rr - 1e-3, 1e-4, 0.0);
        let hit = line_sphere_intersection(prev, new, Vec3::ZERO, rr).unwrap();
        assert!((hit.norm() - rr).abs() <= 1e-12 * rr);
    }

    fn rotate(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
        // Rodrigues' formula; `axis` is normalised here.
        let k = axis * (1.0 / axis.norm());
        let (s, c) = angle.sin_cos();
        let cross = Vec3::new(k.y * v.z - k.z * v.y, k.z * v.x - k.x * v.z, k.x * v.y - k.y * v.x);
        v * c + cross * s + k * (k.dot(v) * (1.0 - c))
    }

    fn crossing() -> impl Strategy<Value = (Vec3, Vec3)> {
        // Start outside, end inside a sphere of radius 10 at the origin.
        (
            10.0f64..14.0,
            0.0f64..std::f64::consts::PI,
            0.0f64..std::f64::consts::TAU,
            0.0f64..9.99,
            0.0f64..std::f64::consts::PI,
            0.0f64..std::f64::consts::TAU,
        )
            .prop_map(|(r1, t1, p1, r2, t2, p2)| {
                let sph = |r: f64, t: f64, p: f64| Vec3::new(r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos());
                (sph(r1 + 1e-6, t1, p1), sph(r2, t2, p2))
            })
    }

    proptest! {
        #[test]
        fn intersection_lies_on_sphere_and_segment((prev, new) in crossing()) {
            let hit = line_sphere_intersection(prev, new, Vec3::ZERO, 10.0).unwrap();
            prop_assert!((hit.norm() - 10.0).abs() <= SURFACE_REL_TOL * 10.0);
            let along = (hit - prev).dot(new - prev) / (new - prev).norm();
            prop_assert!(along >= 0.0 && along <= (new - prev).norm() * (1.0 + 1e-12));
        }

        #[test]
        fn intersection_commutes_with_rotation(
            (prev, new) in crossing(),
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
            angle in 0.0f64..std::f64::consts::TAU,
        ) {
            let axis = Vec3::new(ax, ay, az);
            let hit = line_sphere_intersection(prev, new, Vec3::ZERO, 10.0).unwrap();
            let rotated = line_sphere_intersection(
                rotate(prev, axis, angle),
                rotate(new, axis, angle),
                Vec3::ZERO,
                10.0,
            )
            .unwrap();
            prop_assert!((rotate(hit, axis, angle) - rotated).norm() < 1e-9);
        }
    }
}

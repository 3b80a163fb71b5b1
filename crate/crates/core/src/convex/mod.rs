//! Convex geometry: primitive shapes, hulls, discrete-orientation
//! polytopes, support-map distance queries, and Minkowski sums.

pub mod boxes;
pub mod gjk;
pub mod hull;
pub mod kdop;
pub mod minkowski;
pub mod polytope;

pub use boxes::{Aabb, OrientedBox, Parallelotope, Sphere};
pub use gjk::{gjk_distance, GjkResult, GJK_MAX_ITERATIONS};
pub use hull::{convex_hull, convex_hull_inflated};
pub use kdop::{kdop_axes, Kdop26, KDOP_AXES};
pub use minkowski::{minkowski_sum_boxes, minkowski_sum_general, minkowski_sum_kdop};
pub use polytope::ConvexPolytope;

use crate::scalar::Real;
use crate::vec3::Vec3;
use crate::Result;

/// Support map of a convex set: the point of the set extreme along `dir`.
/// `dir` need not be normalized; ties may resolve to any extreme point.
pub trait Support<T: Real> {
    fn support_point(&self, dir: Vec3<T>) -> Vec3<T>;
}

/// A single point is a convex set.
impl<T: Real> Support<T> for Vec3<T> {
    fn support_point(&self, _dir: Vec3<T>) -> Vec3<T> {
        *self
    }
}

impl<T: Real, S: Support<T>> Support<T> for &S {
    fn support_point(&self, dir: Vec3<T>) -> Vec3<T> {
        (**self).support_point(dir)
    }
}

/// A convex bounding shape of any of the supported families.
#[derive(Debug, Clone)]
pub enum ConvexShape<T> {
    Sphere(Sphere<T>),
    Aabb(Aabb<T>),
    Obb(OrientedBox<T>),
    Kdop(Kdop26<T>),
    Hull(ConvexPolytope<T>),
}

impl<T: Real> ConvexShape<T> {
    /// Enclosed volume (k-DOPs convert to explicit polytopes to measure).
    pub fn volume(&self) -> Result<T> {
        match self {
            Self::Sphere(s) => Ok(s.volume()),
            Self::Aabb(b) => Ok(b.volume()),
            Self::Obb(b) => Ok(b.volume()),
            Self::Kdop(d) => d.volume(),
            Self::Hull(h) => Ok(h.volume()),
        }
    }

    pub fn contains_point(&self, p: Vec3<T>, tol: T) -> bool {
        match self {
            Self::Sphere(s) => s.contains_point(p, tol),
            Self::Aabb(b) => b.contains_point(p, tol),
            Self::Obb(b) => b.contains_point(p, tol),
            Self::Kdop(d) => d.contains_point(p, tol),
            Self::Hull(h) => h.contains_point(p, tol),
        }
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        match self {
            Self::Sphere(s) => Self::Sphere(s.translated(d)),
            Self::Aabb(b) => Self::Aabb(b.translated(d)),
            Self::Obb(b) => Self::Obb(b.translated(d)),
            Self::Kdop(k) => Self::Kdop(k.translated(d)),
            Self::Hull(h) => Self::Hull(h.translated(d)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_volumes_agree_with_primitives() {
        let cube = ConvexShape::Hull(ConvexPolytope::cuboid(Vec3::zero(), Vec3::splat(1.0f64)));
        assert!((cube.volume().unwrap() - 8.0).abs() < 1e-12);
        let ball = ConvexShape::Sphere(Sphere::new(Vec3::zero(), 2.0f64));
        assert!((ball.volume().unwrap() - 4.0 / 3.0 * std::f64::consts::PI * 8.0).abs() < 1e-9);
    }

    #[test]
    fn point_support_is_the_point() {
        let p = Vec3::new(1.0f64, -2.0, 3.0);
        assert_eq!(p.support_point(Vec3::new(0.0, 1.0, 0.0)), p);
    }
}

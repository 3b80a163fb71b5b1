//! Discrete-orientation bounding polytopes over 26 fixed directions
//! (13 axes, each bounding from both sides).
//!
//! The axes are the 3 coordinate axes, the 6 face diagonals, and the 4 corner
//! diagonals of a cube, kept with integer components so support values along
//! them are computed exactly. Interval arithmetic on the slabs gives a
//! conservative (containing) Minkowski sum that is exact along all 26
//! canonical directions.

use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

use super::hull::convex_hull_inflated;
use super::polytope::ConvexPolytope;

/// The 13 slab axes (integer components; not unit length).
pub const KDOP_AXES: [[f64; 3]; 13] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 1.0, 0.0],
    [1.0, -1.0, 0.0],
    [1.0, 0.0, 1.0],
    [1.0, 0.0, -1.0],
    [0.0, 1.0, 1.0],
    [0.0, 1.0, -1.0],
    [1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0],
];

/// The slab axes as vectors of the working scalar type.
pub fn kdop_axes<T: Real>() -> [Vec3<T>; 13] {
    let mut out = [Vec3::zero(); 13];
    for (slot, a) in out.iter_mut().zip(&KDOP_AXES) {
        *slot = Vec3::new(real(a[0]), real(a[1]), real(a[2]));
    }
    out
}

/// Bounding polytope stored as 13 support intervals: the region
/// `{ x : min[i] <= axis_i . x <= max[i] for all i }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kdop26<T> {
    pub min: [T; 13],
    pub max: [T; 13],
}

impl<T: Real> Kdop26<T> {
    pub fn from_points(points: &[Vec3<T>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateShape("k-DOP of no points"));
        }
        let axes = kdop_axes::<T>();
        let mut min = [T::infinity(); 13];
        let mut max = [T::neg_infinity(); 13];
        for &p in points {
            for (i, a) in axes.iter().enumerate() {
                let d = a.dot(p);
                min[i] = min[i].min(d);
                max[i] = max[i].max(d);
            }
        }
        Ok(Self { min, max })
    }

    /// Interval along slab axis `i` (support values along `+axis` and
    /// `-axis` are `max[i]` and `-min[i]`).
    pub fn interval(&self, i: usize) -> (T, T) {
        (self.min[i], self.max[i])
    }

    /// The k-DOP of the point-reflected region `-X`.
    pub fn negated(&self) -> Self {
        let mut min = [T::zero(); 13];
        let mut max = [T::zero(); 13];
        for i in 0..13 {
            min[i] = -self.max[i];
            max[i] = -self.min[i];
        }
        Self { min, max }
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        let axes = kdop_axes::<T>();
        let mut out = *self;
        for i in 0..13 {
            let shift = axes[i].dot(d);
            out.min[i] += shift;
            out.max[i] += shift;
        }
        out
    }

    /// Interval sum: a k-DOP containing the Minkowski sum of the two
    /// regions, with exact support along all 26 canonical directions.
    pub fn sum(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..13 {
            out.min[i] += other.min[i];
            out.max[i] += other.max[i];
        }
        out
    }

    /// Widens every slab by a Euclidean margin `eps`.
    pub fn inflated(&self, eps: T) -> Self {
        let axes = kdop_axes::<T>();
        let mut out = *self;
        for i in 0..13 {
            let m = eps * axes[i].norm();
            out.min[i] -= m;
            out.max[i] += m;
        }
        out
    }

    pub fn contains_point(&self, p: Vec3<T>, tol: T) -> bool {
        let axes = kdop_axes::<T>();
        for i in 0..13 {
            let d = axes[i].dot(p);
            let m = tol * axes[i].norm();
            if d < self.min[i] - m || d > self.max[i] + m {
                return false;
            }
        }
        true
    }

    /// Euclidean diagonal of the coordinate-axis intervals.
    pub fn diagonal(&self) -> T {
        Vec3::new(
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        )
        .norm()
    }

    /// Explicit vertex representation: intersects all plane triples of the
    /// 26 bounding half-spaces, keeps the feasible intersections, and hulls
    /// them. Flat slabs are handled by the inflated hull fallback.
    pub fn to_polytope(&self) -> Result<ConvexPolytope<T>> {
        for i in 0..13 {
            if !(self.min[i] <= self.max[i]) {
                return Err(Error::DegenerateShape("k-DOP has an empty slab"));
            }
        }
        let scale = self.diagonal();
        if !(scale.is_finite()) {
            return Err(Error::DegenerateShape("k-DOP is unbounded"));
        }
        let axes = kdop_axes::<T>();
        // 26 half-spaces n . x <= d.
        let mut planes: Vec<(Vec3<T>, T)> = Vec::with_capacity(26);
        for i in 0..13 {
            planes.push((axes[i], self.max[i]));
            planes.push((-axes[i], -self.min[i]));
        }
        let tol = real::<T>(1e-9) * scale.max(T::min_positive_value());
        let mut candidates: Vec<Vec3<T>> = Vec::new();
        for i in 0..planes.len() {
            for j in (i + 1)..planes.len() {
                for k in (j + 1)..planes.len() {
                    let m = crate::mat3::Mat3::new([
                        planes[i].0.to_array(),
                        planes[j].0.to_array(),
                        planes[k].0.to_array(),
                    ]);
                    let inv = match m.inverse() {
                        Ok(inv) => inv,
                        Err(_) => continue,
                    };
                    let x = inv.mul_vec(Vec3::new(planes[i].1, planes[j].1, planes[k].1));
                    let feasible = planes
                        .iter()
                        .all(|&(n, d)| n.dot(x) <= d + tol * n.norm());
                    if feasible {
                        candidates.push(x);
                    }
                }
            }
        }
        if candidates.is_empty() {
            return Err(Error::DegenerateShape("k-DOP has no feasible vertices"));
        }
        convex_hull_inflated(&candidates)
    }

    /// Enclosed volume of the slab intersection.
    pub fn volume(&self) -> Result<T> {
        Ok(self.to_polytope()?.volume())
    }
}

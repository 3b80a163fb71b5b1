//! Primitive convex bounding shapes: spheres, axis-aligned and oriented
//! boxes, and parallelotopes (linearly sheared boxes).

use crate::mat3::Mat3;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

use super::polytope::ConvexPolytope;
use super::Support;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere<T> {
    pub center: Vec3<T>,
    pub radius: T,
}

impl<T: Real> Sphere<T> {
    pub fn new(center: Vec3<T>, radius: T) -> Self {
        Self { center, radius }
    }

    pub fn volume(&self) -> T {
        real::<T>(4.0 / 3.0) * T::PI() * self.radius.powi(3)
    }

    pub fn contains_point(&self, p: Vec3<T>, tol: T) -> bool {
        (p - self.center).norm() <= self.radius + tol
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        Self::new(self.center + d, self.radius)
    }

    /// Convex polytope that fully encloses the sphere: a subdivided
    /// icosahedral tessellation scaled so every face plane lies at or beyond
    /// the sphere surface.
    pub fn circumscribed_polytope(&self, subdivisions: u32) -> Result<ConvexPolytope<T>> {
        let mesh = crate::gen::icosphere::<T>(subdivisions);
        // Unit-sphere vertices: every face plane sits strictly inside the
        // sphere; dividing by the smallest plane distance pushes all planes
        // to or beyond radius one.
        let mut min_plane = T::infinity();
        for f in &mesh.triangles {
            let (a, b, c) = (
                mesh.vertices[f[0]],
                mesh.vertices[f[1]],
                mesh.vertices[f[2]],
            );
            let n = (b - a)
                .cross(c - a)
                .unit()
                .ok_or(Error::DegenerateShape("degenerate sphere tessellation face"))?;
            min_plane = min_plane.min(n.dot(a).abs());
        }
        if !(min_plane > T::zero()) {
            return Err(Error::DegenerateShape("sphere tessellation collapsed"));
        }
        let grow = self.radius / min_plane;
        let vertices = mesh
            .vertices
            .iter()
            .map(|&v| self.center + v * grow)
            .collect();
        ConvexPolytope::from_parts(vertices, mesh.triangles.clone())
    }
}

impl<T: Real> Support<T> for Sphere<T> {
    fn support_point(&self, dir: Vec3<T>) -> Vec3<T> {
        match dir.unit() {
            Some(u) => self.center + u * self.radius,
            None => self.center + Vec3::new(self.radius, T::zero(), T::zero()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    pub fn from_points(points: &[Vec3<T>]) -> Result<Self> {
        let first = *points
            .first()
            .ok_or(Error::DegenerateShape("axis-aligned box of no points"))?;
        let mut lo = first;
        let mut hi = first;
        for &p in &points[1..] {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        Ok(Self::new(lo, hi))
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * real::<T>(0.5)
    }

    pub fn half_extents(&self) -> Vec3<T> {
        (self.max - self.min) * real::<T>(0.5)
    }

    pub fn diagonal(&self) -> T {
        (self.max - self.min).norm()
    }

    pub fn volume(&self) -> T {
        let d = self.max - self.min;
        d.x.max(T::zero()) * d.y.max(T::zero()) * d.z.max(T::zero())
    }

    pub fn contains_point(&self, p: Vec3<T>, tol: T) -> bool {
        p.x >= self.min.x - tol
            && p.y >= self.min.y - tol
            && p.z >= self.min.z - tol
            && p.x <= self.max.x + tol
            && p.y <= self.max.y + tol
            && p.z <= self.max.z + tol
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.min.min(other.min), self.max.max(other.max))
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
            && self.min.z <= other.max.z
            && other.min.z <= self.max.z
    }

    pub fn inflated(&self, eps: T) -> Self {
        Self::new(self.min - Vec3::splat(eps), self.max + Vec3::splat(eps))
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        Self::new(self.min + d, self.max + d)
    }

    pub fn corners(&self) -> [Vec3<T>; 8] {
        let (l, h) = (self.min, self.max);
        [
            Vec3::new(l.x, l.y, l.z),
            Vec3::new(h.x, l.y, l.z),
            Vec3::new(l.x, h.y, l.z),
            Vec3::new(h.x, h.y, l.z),
            Vec3::new(l.x, l.y, h.z),
            Vec3::new(h.x, l.y, h.z),
            Vec3::new(l.x, h.y, h.z),
            Vec3::new(h.x, h.y, h.z),
        ]
    }

    pub fn to_polytope(&self) -> ConvexPolytope<T> {
        ConvexPolytope::cuboid(self.center(), self.half_extents())
    }

    pub fn to_parallelotope(&self) -> Parallelotope<T> {
        let h = self.half_extents();
        Parallelotope {
            center: self.center(),
            generators: [
                Vec3::new(h.x, T::zero(), T::zero()),
                Vec3::new(T::zero(), h.y, T::zero()),
                Vec3::new(T::zero(), T::zero(), h.z),
            ],
        }
    }
}

impl<T: Real> Support<T> for Aabb<T> {
    fn support_point(&self, dir: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            if dir.x >= T::zero() { self.max.x } else { self.min.x },
            if dir.y >= T::zero() { self.max.y } else { self.min.y },
            if dir.z >= T::zero() { self.max.z } else { self.min.z },
        )
    }
}

/// Box with an arbitrary orthonormal orientation; `axes` columns are the
/// box axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox<T> {
    pub center: Vec3<T>,
    pub axes: Mat3<T>,
    pub half_extents: Vec3<T>,
}

impl<T: Real> OrientedBox<T> {
    pub fn new(center: Vec3<T>, axes: Mat3<T>, half_extents: Vec3<T>) -> Result<Self> {
        if !axes.is_rotation(real::<T>(1e-7)) {
            return Err(Error::DegenerateInput("oriented-box axes must be a rotation"));
        }
        Ok(Self {
            center,
            axes,
            half_extents,
        })
    }

    pub fn volume(&self) -> T {
        let h = self.half_extents;
        real::<T>(8.0) * h.x * h.y * h.z
    }

    pub fn contains_point(&self, p: Vec3<T>, tol: T) -> bool {
        let local = self.axes.transpose().mul_vec(p - self.center);
        local.x.abs() <= self.half_extents.x + tol
            && local.y.abs() <= self.half_extents.y + tol
            && local.z.abs() <= self.half_extents.z + tol
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        Self {
            center: self.center + d,
            axes: self.axes,
            half_extents: self.half_extents,
        }
    }

    pub fn to_parallelotope(&self) -> Parallelotope<T> {
        Parallelotope {
            center: self.center,
            generators: [
                self.axes.column(0) * self.half_extents.x,
                self.axes.column(1) * self.half_extents.y,
                self.axes.column(2) * self.half_extents.z,
            ],
        }
    }

    pub fn corners(&self) -> [Vec3<T>; 8] {
        self.to_parallelotope().corners()
    }

    pub fn to_polytope(&self) -> Result<ConvexPolytope<T>> {
        let local = ConvexPolytope::cuboid(Vec3::zero(), self.half_extents);
        Ok(local.apply_linear(&self.axes)?.translated(self.center))
    }
}

impl<T: Real> Support<T> for OrientedBox<T> {
    fn support_point(&self, dir: Vec3<T>) -> Vec3<T> {
        self.to_parallelotope().support_point(dir)
    }
}

/// Image of a box under a linear map: center plus three independent
/// generator vectors with signs chosen freely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parallelotope<T> {
    pub center: Vec3<T>,
    pub generators: [Vec3<T>; 3],
}

impl<T: Real> Parallelotope<T> {
    pub fn volume(&self) -> T {
        let [g0, g1, g2] = self.generators;
        real::<T>(8.0) * g0.dot(g1.cross(g2)).abs()
    }

    pub fn corners(&self) -> [Vec3<T>; 8] {
        let [g0, g1, g2] = self.generators;
        let mut out = [Vec3::zero(); 8];
        for (i, slot) in out.iter_mut().enumerate() {
            let s = |bit: usize| {
                if i >> bit & 1 == 1 {
                    T::one()
                } else {
                    -T::one()
                }
            };
            *slot = self.center + g0 * s(0) + g1 * s(1) + g2 * s(2);
        }
        out
    }

    pub fn negated(&self) -> Self {
        Self {
            center: -self.center,
            generators: self.generators,
        }
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        Self {
            center: self.center + d,
            generators: self.generators,
        }
    }

    pub fn apply_linear(&self, m: &Mat3<T>) -> Self {
        Self {
            center: m.mul_vec(self.center),
            generators: [
                m.mul_vec(self.generators[0]),
                m.mul_vec(self.generators[1]),
                m.mul_vec(self.generators[2]),
            ],
        }
    }
}

impl<T: Real> Support<T> for Parallelotope<T> {
    fn support_point(&self, dir: Vec3<T>) -> Vec3<T> {
        let mut p = self.center;
        for g in self.generators {
            p += if dir.dot(g) >= T::zero() { g } else { -g };
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = Vec3<f64>;

    #[test]
    fn aabb_support_and_volume() {
        let b = Aabb::new(V::new(-1.0, 0.0, 2.0), V::new(1.0, 3.0, 5.0));
        assert_eq!(b.volume(), 2.0 * 3.0 * 3.0);
        assert_eq!(b.support_point(V::new(1.0, -1.0, 0.5)), V::new(1.0, 0.0, 5.0));
        assert!(b.contains_point(V::new(0.0, 1.5, 3.0), 0.0));
        assert!(!b.contains_point(V::new(0.0, 1.5, 5.1), 1e-9));
        let u = b.union(&Aabb::new(V::splat(-2.0), V::splat(-1.5)));
        assert_eq!(u.min, V::new(-2.0, -2.0, -2.0));
        assert_eq!(u.max, V::new(1.0, 3.0, 5.0));
    }

    #[test]
    fn sphere_support_is_on_the_surface() {
        let s = Sphere::new(V::new(1.0, 2.0, 3.0), 0.5);
        let p = s.support_point(V::new(0.0, -2.0, 0.0));
        assert!((p - V::new(1.0, 1.5, 3.0)).norm() < 1e-12);
        assert!((s.volume() - 4.0 / 3.0 * std::f64::consts::PI * 0.125).abs() < 1e-12);
    }

    #[test]
    fn circumscribed_polytope_encloses_the_sphere() {
        let s = Sphere::new(V::new(0.2, -0.1, 0.4), 1.25);
        let poly = s.circumscribed_polytope(2).unwrap();
        poly.validate().unwrap();
        // Every face plane must lie at or beyond the sphere surface.
        for (f, n) in poly.faces.iter().zip(&poly.face_normals) {
            let d = n.dot(poly.vertices[f[0]] - s.center);
            assert!(d >= s.radius - 1e-12, "plane distance {d}");
        }
        // And the scaling should be modest for subdivision level two.
        assert!(poly.volume() < 1.25 * s.volume());
    }

    #[test]
    fn oriented_box_rejects_non_rotation_axes() {
        let skew = Mat3::new([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(OrientedBox::new(V::zero(), skew, V::splat(1.0)).is_err());
    }

    #[test]
    fn oriented_box_support_matches_polytope_support() {
        let rot = crate::gaussian::random_rotation::<f64>(9);
        let obb = OrientedBox::new(V::new(0.5, -0.25, 1.0), rot, V::new(1.0, 2.0, 0.5)).unwrap();
        let poly = obb.to_polytope().unwrap();
        poly.validate().unwrap();
        let dirs = [
            V::new(1.0, 0.0, 0.0),
            V::new(-0.3, 0.8, 0.5),
            V::new(0.1, -0.9, -0.4),
        ];
        for d in dirs {
            let a = obb.support_point(d).dot(d);
            let b = poly.support_value(d);
            assert!((a - b).abs() < 1e-12);
        }
        assert!((obb.volume() - poly.volume()).abs() < 1e-9);
    }

    #[test]
    fn parallelotope_volume_matches_corner_hull() {
        let p = Parallelotope {
            center: V::new(1.0, 0.0, -1.0),
            generators: [
                V::new(1.0, 0.2, 0.0),
                V::new(0.0, 1.0, 0.3),
                V::new(0.1, 0.0, 1.0),
            ],
        };
        let hull = super::super::hull::convex_hull(&p.corners()).unwrap();
        assert!((hull.volume() - p.volume()).abs() < 1e-9);
        for d in [V::new(1.0, 2.0, 3.0), V::new(-1.0, 0.5, -0.2)] {
            assert!((p.support_point(d).dot(d) - hull.support_value(d)).abs() < 1e-9);
        }
    }
}

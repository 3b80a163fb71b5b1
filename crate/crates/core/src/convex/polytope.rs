//! Convex polytopes as closed triangulated surfaces.

use std::collections::BTreeMap;

use crate::mat3::Mat3;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

use super::Support;

/// Convex polytope stored as vertices plus outward-wound triangular faces.
///
/// Faces are counter-clockwise when viewed from outside, so the winding
/// normal points outward; `face_normals` caches the unit normals (zero for
/// zero-area faces, which can legally appear as padding on collinear hull
/// edges and contribute nothing to supports, volumes, or surface integrals).
#[derive(Debug, Clone)]
pub struct ConvexPolytope<T> {
    pub vertices: Vec<Vec3<T>>,
    pub faces: Vec<[usize; 3]>,
    pub face_normals: Vec<Vec3<T>>,
}

impl<T: Real> ConvexPolytope<T> {
    /// Builds a polytope from vertices and outward-wound faces, computing
    /// unit normals from the winding.
    pub fn from_parts(vertices: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() || faces.is_empty() {
            return Err(Error::DegenerateShape("polytope needs vertices and faces"));
        }
        for f in &faces {
            for &i in f {
                if i >= vertices.len() {
                    return Err(Error::DegenerateShape("face index out of range"));
                }
            }
        }
        let face_normals = faces
            .iter()
            .map(|f| winding_normal(&vertices, *f))
            .collect();
        Ok(Self {
            vertices,
            faces,
            face_normals,
        })
    }

    /// Axis-aligned box with the given center and half extents.
    pub fn cuboid(center: Vec3<T>, half: Vec3<T>) -> Self {
        let (cx, cy, cz) = (center.x, center.y, center.z);
        let (hx, hy, hz) = (half.x, half.y, half.z);
        let v = |sx: T, sy: T, sz: T| Vec3::new(cx + sx * hx, cy + sy * hy, cz + sz * hz);
        let o = T::one();
        let vertices = vec![
            v(-o, -o, -o), // 0
            v(o, -o, -o),  // 1
            v(o, o, -o),   // 2
            v(-o, o, -o),  // 3
            v(-o, -o, o),  // 4
            v(o, -o, o),   // 5
            v(o, o, o),    // 6
            v(-o, o, o),   // 7
        ];
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        Self::from_parts(vertices, faces).expect("cuboid construction is valid")
    }

    /// Largest `dir . v` over the vertices (the support value).
    pub fn support_value(&self, dir: Vec3<T>) -> T {
        self.vertices
            .iter()
            .map(|v| v.dot(dir))
            .fold(T::neg_infinity(), T::max)
    }

    /// Signed volume enclosed by the face surface.
    pub fn volume(&self) -> T {
        let sixth = T::one() / real::<T>(6.0);
        let mut acc = T::zero();
        for f in &self.faces {
            let (a, b, c) = (
                self.vertices[f[0]],
                self.vertices[f[1]],
                self.vertices[f[2]],
            );
            acc += a.dot(b.cross(c)) * sixth;
        }
        acc
    }

    pub fn bounds(&self) -> (Vec3<T>, Vec3<T>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for &v in &self.vertices[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Axis-aligned bounding-box diagonal (scale reference for tolerances).
    pub fn diameter(&self) -> T {
        let (lo, hi) = self.bounds();
        (hi - lo).norm()
    }

    pub fn vertex_centroid(&self) -> Vec3<T> {
        let mut c = Vec3::zero();
        for &v in &self.vertices {
            c += v;
        }
        c / real(self.vertices.len() as f64)
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| v + d).collect(),
            faces: self.faces.clone(),
            face_normals: self.face_normals.clone(),
        }
    }

    /// Point reflection through the origin; winding is reversed so faces stay
    /// outward.
    pub fn negated(&self) -> Self {
        let vertices: Vec<_> = self.vertices.iter().map(|&v| -v).collect();
        let faces: Vec<[usize; 3]> = self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect();
        let face_normals = faces
            .iter()
            .map(|f| winding_normal(&vertices, *f))
            .collect();
        Self {
            vertices,
            faces,
            face_normals,
        }
    }

    /// Applies an invertible linear map; orientation-reversing maps flip the
    /// winding so normals remain outward. Fails on near-singular maps.
    pub fn apply_linear(&self, m: &Mat3<T>) -> Result<Self> {
        let det = m.determinant();
        let scale = m.max_abs();
        if det.abs() <= real::<T>(1e-12) * scale * scale * scale {
            return Err(Error::SingularTransform);
        }
        let vertices: Vec<_> = self.vertices.iter().map(|&v| m.mul_vec(v)).collect();
        let faces: Vec<[usize; 3]> = if det > T::zero() {
            self.faces.clone()
        } else {
            self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect()
        };
        let face_normals = faces
            .iter()
            .map(|f| winding_normal(&vertices, *f))
            .collect();
        Ok(Self {
            vertices,
            faces,
            face_normals,
        })
    }

    /// `true` when `p` is on or inside every face plane within `tol`.
    pub fn contains_point(&self, p: Vec3<T>, tol: T) -> bool {
        for (f, n) in self.faces.iter().zip(&self.face_normals) {
            if n.norm_squared() == T::zero() {
                continue;
            }
            let d = n.dot(self.vertices[f[0]]);
            if n.dot(p) - d > tol {
                return false;
            }
        }
        true
    }

    /// Structural check: closed 2-manifold (every undirected edge shared by
    /// exactly two faces with opposite direction), Euler characteristic 2,
    /// and convexity (all vertices within `1e-9 * diameter` behind every
    /// face plane). Zero-area faces are skipped for the plane tests.
    pub fn validate(&self) -> Result<()> {
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                if e.0 == e.1 {
                    return Err(Error::DegenerateShape("face repeats a vertex"));
                }
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        let mut undirected = 0usize;
        for (&(a, b), &count) in &directed {
            if count != 1 {
                return Err(Error::DegenerateShape("duplicated directed edge"));
            }
            if directed.get(&(b, a)).copied() != Some(1) {
                return Err(Error::DegenerateShape("edge lacks an opposite twin"));
            }
            if a < b {
                undirected += 1;
            }
        }
        let euler = self.vertices.len() as i64 - undirected as i64 + self.faces.len() as i64;
        if euler != 2 {
            return Err(Error::DegenerateShape("Euler characteristic is not 2"));
        }
        let tol = real::<T>(1e-9) * self.diameter().max(T::min_positive_value());
        for (f, n) in self.faces.iter().zip(&self.face_normals) {
            if n.norm_squared() == T::zero() {
                continue;
            }
            let d = n.dot(self.vertices[f[0]]);
            for &v in &self.vertices {
                if n.dot(v) - d > tol {
                    return Err(Error::DegenerateShape("vertex outside a face plane"));
                }
            }
        }
        Ok(())
    }
}

impl<T: Real> Support<T> for ConvexPolytope<T> {
    fn support_point(&self, dir: Vec3<T>) -> Vec3<T> {
        debug_assert!(!self.vertices.is_empty());
        let mut best = self.vertices[0];
        let mut best_dot = best.dot(dir);
        for &v in &self.vertices[1..] {
            let d = v.dot(dir);
            if d > best_dot {
                best_dot = d;
                best = v;
            }
        }
        best
    }
}

/// Unit normal from the winding of a face, or zero for zero-area faces.
pub(crate) fn winding_normal<T: Real>(vertices: &[Vec3<T>], f: [usize; 3]) -> Vec3<T> {
    let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
    (b - a).cross(c - a).unit().unwrap_or_else(Vec3::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = ConvexPolytope<f64>;
    type V = Vec3<f64>;

    #[test]
    fn cuboid_is_valid_with_expected_volume() {
        let c = P::cuboid(V::new(1.0, 2.0, 3.0), V::new(0.5, 1.0, 1.5));
        c.validate().unwrap();
        assert!((c.volume() - 1.0 * 2.0 * 3.0).abs() < 1e-12);
        assert!(c.contains_point(V::new(1.0, 2.0, 3.0), 1e-12));
        assert!(!c.contains_point(V::new(1.6, 2.0, 3.0), 1e-12));
    }

    #[test]
    fn support_picks_extreme_cube_corner() {
        let c = P::cuboid(V::zero(), V::splat(1.0));
        let s = c.support_point(V::new(1.0, 1.0, 1.0));
        assert_eq!(s, V::new(1.0, 1.0, 1.0));
        let s = c.support_point(V::new(-2.0, 0.5, -0.1));
        assert_eq!(s, V::new(-1.0, 1.0, -1.0));
    }

    #[test]
    fn negation_preserves_validity_and_volume() {
        let c = P::cuboid(V::new(0.3, -0.2, 0.9), V::new(0.5, 0.25, 0.75));
        let n = c.negated();
        n.validate().unwrap();
        assert!((n.volume() - c.volume()).abs() < 1e-12);
        assert!(n.contains_point(V::new(-0.3, 0.2, -0.9), 1e-12));
    }

    #[test]
    fn linear_map_scales_volume_by_determinant() {
        let c = P::cuboid(V::zero(), V::splat(1.0));
        let m = Mat3::new([[2.0, 0.5, 0.0], [0.0, 1.0, 0.3], [0.1, 0.0, 1.5]]);
        let mapped = c.apply_linear(&m).unwrap();
        mapped.validate().unwrap();
        assert!((mapped.volume() - c.volume() * m.determinant()).abs() < 1e-9);
        // Orientation-reversing map still yields outward winding.
        let refl = Mat3::diagonal(V::new(-1.0, 1.0, 1.0));
        let flipped = c.apply_linear(&refl).unwrap();
        flipped.validate().unwrap();
        assert!(flipped.volume() > 0.0);
        assert!(matches!(
            c.apply_linear(&Mat3::zero()),
            Err(Error::SingularTransform)
        ));
    }
}

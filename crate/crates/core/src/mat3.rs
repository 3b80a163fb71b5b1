//! 3x3 matrices: products, inverses, Cholesky, and a cyclic-Jacobi
//! eigendecomposition for symmetric matrices.

use std::ops::{Add, Mul, Sub};

use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn new(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::new([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn zero() -> Self {
        Self::new([[T::zero(); 3]; 3])
    }

    pub fn diagonal(d: Vec3<T>) -> Self {
        let z = T::zero();
        Self::new([[d.x, z, z], [z, d.y, z], [z, z, d.z]])
    }

    pub fn from_columns(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self::new([
            [c0.x, c1.x, c2.x],
            [c0.y, c1.y, c2.y],
            [c0.z, c1.z, c2.z],
        ])
    }

    pub fn column(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3::new(self.m[i][0], self.m[i][1], self.m[i][2])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::new([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn determinant(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse via the adjugate; fails when `|det|` is below `1e-12` times the
    /// cube of the largest entry magnitude (scale-relative singularity test).
    pub fn inverse(&self) -> Result<Self> {
        let m = &self.m;
        let det = self.determinant();
        let scale = self.max_abs();
        let floor = real::<T>(1e-12) * scale * scale * scale;
        if det.abs() <= floor || !det.is_finite() {
            return Err(Error::SingularTransform);
        }
        let inv_det = T::one() / det;
        let c = |a: T, b: T, cc: T, d: T| (a * d - b * cc) * inv_det;
        Ok(Self::new([
            [
                c(m[1][1], m[1][2], m[2][1], m[2][2]),
                c(m[0][2], m[0][1], m[2][2], m[2][1]),
                c(m[0][1], m[0][2], m[1][1], m[1][2]),
            ],
            [
                c(m[1][2], m[1][0], m[2][2], m[2][0]),
                c(m[0][0], m[0][2], m[2][0], m[2][2]),
                c(m[0][2], m[0][0], m[1][2], m[1][0]),
            ],
            [
                c(m[1][0], m[1][1], m[2][0], m[2][1]),
                c(m[0][1], m[0][0], m[2][1], m[2][0]),
                c(m[0][0], m[0][1], m[1][0], m[1][1]),
            ],
        ]))
    }

    pub fn frobenius_norm(&self) -> T {
        let mut s = T::zero();
        for r in &self.m {
            for &v in r {
                s += v * v;
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> T {
        let mut s = T::zero();
        for r in &self.m {
            for &v in r {
                s = s.max(v.abs());
            }
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|r| r.iter().all(|v| v.is_finite()))
    }

    /// `true` when rows are unit length and mutually orthogonal within `tol`
    /// and the determinant is `+1` within `tol`.
    pub fn is_rotation(&self, tol: T) -> bool {
        let rt = self.mat_mul(&self.transpose());
        let mut dev = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                dev = dev.max((rt.m[i][j] - target).abs());
            }
        }
        dev <= tol && (self.determinant() - T::one()).abs() <= tol
    }

    pub fn mat_mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for (k, rr) in rhs.m.iter().enumerate() {
                    s += self.m[i][k] * rr[j];
                }
                out.m[i][j] = s;
            }
        }
        out
    }

    /// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order with matching unit eigenvectors
    /// as the columns of the returned matrix. Iterates until the off-diagonal
    /// norm falls below `1e-12` times the Frobenius norm (at most 50 sweeps).
    pub fn symmetric_eigen(&self) -> (Vec3<T>, Mat3<T>) {
        let mut a = *self;
        // Work on the symmetrized matrix so tiny asymmetries cannot bias the
        // rotations; callers validate symmetry separately where required.
        for i in 0..3 {
            for j in (i + 1)..3 {
                let avg = (a.m[i][j] + a.m[j][i]) * real::<T>(0.5);
                a.m[i][j] = avg;
                a.m[j][i] = avg;
            }
        }
        let mut v = Self::identity();
        let stop = real::<T>(1e-12) * self.frobenius_norm().max(T::min_positive_value());
        for _ in 0..50 {
            let off = (a.m[0][1] * a.m[0][1] + a.m[0][2] * a.m[0][2] + a.m[1][2] * a.m[1][2])
                .sqrt()
                * real::<T>(std::f64::consts::SQRT_2);
            if off < stop {
                break;
            }
            for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
                let apq = a.m[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a.m[q][q] - a.m[p][p]) / (real::<T>(2.0) * apq);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // A <- J^T A J applied to rows/columns p and q.
                for k in 0..3 {
                    let akp = a.m[k][p];
                    let akq = a.m[k][q];
                    a.m[k][p] = c * akp - s * akq;
                    a.m[k][q] = s * akp + c * akq;
                }
                for k in 0..3 {
                    let apk = a.m[p][k];
                    let aqk = a.m[q][k];
                    a.m[p][k] = c * apk - s * aqk;
                    a.m[q][k] = s * apk + c * aqk;
                }
                for k in 0..3 {
                    let vkp = v.m[k][p];
                    let vkq = v.m[k][q];
                    v.m[k][p] = c * vkp - s * vkq;
                    v.m[k][q] = s * vkp + c * vkq;
                }
            }
        }
        // Sort eigenpairs ascending for a deterministic interface.
        let mut pairs = [(a.m[0][0], 0usize), (a.m[1][1], 1), (a.m[2][2], 2)];
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
        let values = Vec3::new(pairs[0].0, pairs[1].0, pairs[2].0);
        let vectors = Mat3::from_columns(
            v.column(pairs[0].1),
            v.column(pairs[1].1),
            v.column(pairs[2].1),
        );
        (values, vectors)
    }

    /// Lower-triangular Cholesky factor `L` with `L L^T = self`.
    ///
    /// Requires a symmetric positive-definite input; fails with
    /// [`Error::NotPositiveDefinite`] otherwise.
    pub fn cholesky(&self) -> Result<Self> {
        let m = &self.m;
        let mut l = Self::zero();
        for i in 0..3 {
            for j in 0..=i {
                let mut s = m[i][j];
                for k in 0..j {
                    s -= l.m[i][k] * l.m[j][k];
                }
                if i == j {
                    if s <= T::zero() || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l.m[i][j] = s.sqrt();
                } else {
                    l.m[i][j] = s / l.m[j][j];
                }
            }
        }
        Ok(l)
    }

    pub fn cast<U: Real>(&self) -> Mat3<U> {
        let mut out = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = real(self.m[i][j].to_f64().unwrap());
            }
        }
        out
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][j] + rhs.m[i][j];
            }
        }
        out
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][j] - rhs.m[i][j];
            }
        }
        out
    }
}

impl<T: Real> Mul<T> for Mat3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][j] * s;
            }
        }
        out
    }
}

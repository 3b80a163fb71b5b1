//! Gaussian positional error: covariance validation, whitening transforms,
//! density evaluation, and uniformly distributed random rotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mat3::Mat3;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

/// Relative symmetry tolerance for covariance matrices.
const SYMMETRY_REL_TOL: f64 = 1e-9;
/// An eigenvalue below this fraction of the largest one makes the covariance
/// numerically singular; such inputs are rejected, never regularized.
const EIGENVALUE_REL_FLOOR: f64 = 1e-12;

/// Zero-mean-or-not Gaussian positional error on an object.
///
/// The covariance is validated (symmetric, positive definite) at construction,
/// so downstream code can factor it without re-checking.
#[derive(Debug, Clone, Copy)]
pub struct GaussianError<T> {
    mean: Vec3<T>,
    covariance: Mat3<T>,
}

impl<T: Real> GaussianError<T> {
    pub fn new(mean: Vec3<T>, covariance: Mat3<T>) -> Result<Self> {
        validate_covariance(&covariance)?;
        if !mean.is_finite() {
            return Err(Error::DegenerateInput("error mean must be finite"));
        }
        Ok(Self { mean, covariance })
    }

    pub fn zero_mean(covariance: Mat3<T>) -> Result<Self> {
        Self::new(Vec3::zero(), covariance)
    }

    /// Isotropic error with standard deviation `sigma` on each axis.
    pub fn isotropic(sigma: T) -> Result<Self> {
        Self::zero_mean(Mat3::diagonal(Vec3::splat(sigma * sigma)))
    }

    pub fn mean(&self) -> Vec3<T> {
        self.mean
    }

    pub fn covariance(&self) -> Mat3<T> {
        self.covariance
    }

    /// Whitening transform `W = covariance^(-1/2)`; whitened space has
    /// identity covariance.
    pub fn whitening(&self) -> Mat3<T> {
        // Construction already validated the covariance.
        sqrt_inv_covariance(&self.covariance).expect("validated covariance")
    }

    /// Lower Cholesky factor of the covariance (for sampling).
    pub fn cholesky(&self) -> Mat3<T> {
        self.covariance.cholesky().expect("validated covariance")
    }
}

fn validate_covariance<T: Real>(sigma: &Mat3<T>) -> Result<()> {
    if !sigma.is_finite() {
        return Err(Error::DegenerateInput("covariance must be finite"));
    }
    let scale = sigma.frobenius_norm();
    if !(scale > T::zero()) {
        return Err(Error::NotPositiveDefinite);
    }
    let tol = real::<T>(SYMMETRY_REL_TOL) * scale;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (sigma.m[i][j] - sigma.m[j][i]).abs() > tol {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let (vals, _) = sigma.symmetric_eigen();
    let max = vals.z;
    if !(max > T::zero()) || vals.x <= real::<T>(EIGENVALUE_REL_FLOOR) * max {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

/// Inverse symmetric square root `W = sigma^(-1/2)` via Jacobi
/// eigendecomposition: `W = Q diag(1/sqrt(lambda)) Q^T`.
///
/// `W sigma W = I` holds to roughly 1e-14 relative; the returned matrix is
/// exactly symmetric.
pub fn sqrt_inv_covariance<T: Real>(sigma: &Mat3<T>) -> Result<Mat3<T>> {
    validate_covariance(sigma)?;
    let (vals, q) = sigma.symmetric_eigen();
    let d = Mat3::diagonal(Vec3::new(
        T::one() / vals.x.sqrt(),
        T::one() / vals.y.sqrt(),
        T::one() / vals.z.sqrt(),
    ));
    let w = q.mat_mul(&d).mat_mul(&q.transpose());
    // Symmetrize to remove last-ulp asymmetry from the triple product.
    let mut out = w;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let avg = (w.m[i][j] + w.m[j][i]) * real::<T>(0.5);
            out.m[i][j] = avg;
            out.m[j][i] = avg;
        }
    }
    Ok(out)
}

/// Gaussian density at `x` for mean `mean` and covariance `sigma`:
/// `exp(-0.5 (x-mean)^T sigma^(-1) (x-mean)) / sqrt((2 pi)^3 det sigma)`.
pub fn gaussian_pdf<T: Real>(x: Vec3<T>, mean: Vec3<T>, sigma: &Mat3<T>) -> Result<T> {
    validate_covariance(sigma)?;
    let inv = sigma.inverse()?;
    let d = x - mean;
    let q = d.dot(inv.mul_vec(d));
    let det = sigma.determinant();
    let two_pi = real::<T>(2.0) * T::PI();
    let norm = (two_pi * two_pi * two_pi * det).sqrt();
    Ok((-q * real::<T>(0.5)).exp() / norm)
}

/// One standard-normal pair by the Box-Muller transform (always in `f64`;
/// callers cast into their scalar type).
pub(crate) fn standard_normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Uniformly distributed rotation matrix from the given seed.
///
/// Draws four standard normals, normalizes them into a unit quaternion
/// (uniform on the 3-sphere), and converts to a matrix. Deterministic per
/// seed on every platform.
pub fn random_rotation<T: Real>(seed: u64) -> Mat3<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let (a, b) = standard_normal_pair(&mut rng);
        let (c, d) = standard_normal_pair(&mut rng);
        let n2 = a * a + b * b + c * c + d * d;
        if n2 < 1e-12 {
            continue; // astronomically unlikely; redraw for safety
        }
        let n = n2.sqrt();
        let (w, x, y, z) = (a / n, b / n, c / n, d / n);
        let r = [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ];
        let mut out = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = real(r[i][j]);
            }
        }
        return out;
    }
}

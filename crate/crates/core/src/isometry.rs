//! Rigid transforms (rotation + translation).

use crate::mat3::Mat3;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

/// Rigid placement: `x -> R x + t`.
#[derive(Debug, Clone, Copy)]
pub struct Isometry<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> Isometry<T> {
    /// Builds a rigid transform, rejecting rotation matrices that are not
    /// orthonormal with determinant `+1` within `1e-9`.
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self> {
        if !rotation.is_rotation(real(1e-9)) {
            return Err(Error::DegenerateInput(
                "isometry rotation must be orthonormal with det +1",
            ));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
        }
    }

    pub fn translation(t: Vec3<T>) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    #[inline]
    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    /// `true` when the rotation part is exactly absent (pure translation).
    pub fn is_translation(&self) -> bool {
        self.rotation == Mat3::identity()
    }

    pub fn compose(&self, inner: &Self) -> Self {
        Self {
            rotation: self.rotation.mat_mul(&inner.rotation),
            translation: self.rotation.mul_vec(inner.translation) + self.translation,
        }
    }
}

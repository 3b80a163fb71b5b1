use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by geometry, probability, and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A covariance (or other matrix expected to be symmetric) was not
    /// symmetric within the relative tolerance.
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    /// A covariance had an eigenvalue at or below the positive-definiteness
    /// floor; such inputs are rejected rather than regularized.
    #[error("matrix is not positive definite (eigenvalue floor violated)")]
    NotPositiveDefinite,
    /// A shape was empty or had no extent where a full-dimensional one was
    /// required (e.g. support query on a vertex-free polytope).
    #[error("degenerate shape: {0}")]
    DegenerateShape(&'static str),
    /// An input point set was degenerate (coplanar, collinear, or coincident)
    /// where a full-dimensional result was required.
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    /// A linear map with near-zero determinant was applied to a polytope.
    #[error("singular linear transform (|det| below tolerance)")]
    SingularTransform,
    /// An iteration failed to converge within its step budget.
    #[error("{0} did not converge within its iteration budget")]
    NonConvergence(&'static str),
    /// A mesh had no vertices or no triangles.
    #[error("mesh is empty")]
    EmptyMesh,
    /// A mesh was not watertight where a signed volume was required.
    #[error("mesh is not closed (non-positive signed volume)")]
    OpenMesh,
    /// A mesh file failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

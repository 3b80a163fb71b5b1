//! Guaranteed upper bounds on the collision probability of two triangle-mesh
//! objects when one of them carries Gaussian positional error.
//!
//! The core pipeline: whiten the geometry by the inverse square root of the
//! error covariance, take the Minkowski sum of the (negated) first shape with
//! the second, and bound the Gaussian mass of that set by a divergence-theorem
//! surface sum that is provably never below the true collision probability.
//! Non-convex meshes are handled by a bounding-volume hierarchy whose node
//! pairs are bounded with the convex routine and refined until the bound drops
//! below the requested confidence threshold.
//!
//! All geometry is generic over the scalar type via [`Real`]; concrete `f64`
//! and `f32` aliases are exported at the crate root (`f64` is what the
//! benchmark tooling uses).

pub mod bound;
pub mod bvh;
pub mod convex;
pub mod erf;
pub mod gaussian;
pub mod gen;
pub mod isometry;
pub mod mat3;
pub mod mesh;
pub mod query;
pub mod scalar;
pub mod vec3;

mod error;

pub use error::{Error, Result};
pub use scalar::Real;

pub use bound::{
    convex_pcd, field_f, sphere_pcd_center, sphere_pcd_max, surface_integral_upper, BoundMethod,
    CollisionBound,
};
pub use bvh::{build_bvh, bv_volume, bve, fit_bv, BoundingVolume, BvType, BvhNode, BvhTree};
pub use convex::{
    convex_hull, gjk_distance, minkowski_sum_boxes, minkowski_sum_general, minkowski_sum_kdop,
    Aabb, ConvexPolytope, ConvexShape, GjkResult, Kdop26, OrientedBox, Sphere, Support,
};
pub use erf::erf;
pub use gaussian::{gaussian_pdf, random_rotation, sqrt_inv_covariance, GaussianError};
pub use isometry::Isometry;
pub use mat3::Mat3;
pub use mesh::TriMesh;
pub use query::{
    closest_point_on_triangle, exact_collide, exact_collide_offset, general_pcd, mesh_distance,
    mesh_distance_offset, monte_carlo_probability, triangle_distance, triangles_intersect,
    MonteCarloEstimate, PcdQuery, PcdResult,
};
pub use vec3::Vec3;

/// Double-precision aliases (used by the CLI and benchmarks).
pub type Vec3d = Vec3<f64>;
pub type Mat3d = Mat3<f64>;
pub type IsometryD = Isometry<f64>;
pub type TriMeshD = TriMesh<f64>;
pub type ConvexPolytopeD = ConvexPolytope<f64>;
pub type GaussianErrorD = GaussianError<f64>;
pub type BvhTreeD = BvhTree<f64>;

/// Single-precision aliases.
pub type Vec3f = Vec3<f32>;
pub type Mat3f = Mat3<f32>;
pub type TriMeshF = TriMesh<f32>;

//! Scene preparation: normalized mesh loading, covariance construction, and
//! placement of object B at an exact surface separation.

use crate::CliError;
use probcol::bvh::{build_bvh, BvType};
use probcol::{mesh_distance_offset, IsometryD, Mat3d, TriMeshD, Vec3d};
use std::path::Path;

/// Per-axis standard deviation ratios behind a scalar sigma: the covariance
/// has standard deviations `sigma * ratio` along three randomly oriented
/// orthogonal axes, making the orientation seed meaningful.
pub const SIGMA_AXIS_RATIOS: [f64; 3] = [1.0, 0.5, 0.25];

/// A normalized mesh together with its load diagnostics.
#[derive(Debug, Clone)]
pub struct LoadReport {
    pub mesh: TriMeshD,
    pub dropped_faces: usize,
    pub welded_vertices: usize,
    /// Factor applied to bring the longest bounding-box edge to one meter.
    pub scale: f64,
}

/// Loads an OBJ mesh, welds duplicate vertices, drops degenerate faces, and
/// normalizes it: centered at the origin with its longest axis-aligned
/// bounding box edge scaled to one meter.
pub fn load_normalized(path: &Path) -> Result<LoadReport, CliError> {
    let loaded = TriMeshD::from_obj_file(path)
        .map_err(|e| CliError::Config(format!("mesh {}: {e}", path.display())))?;
    let mut mesh = loaded.mesh;
    let scale = mesh.normalize_unit();
    Ok(LoadReport {
        mesh,
        dropped_faces: loaded.dropped_faces,
        welded_vertices: loaded.welded_vertices,
        scale,
    })
}

/// Covariance for a scalar sigma: standard deviations `sigma × ratios`
/// along axes oriented by the seed's random rotation.
pub fn oriented_covariance(sigma: f64, seed: u64) -> Mat3d {
    let stds = [
        sigma * SIGMA_AXIS_RATIOS[0],
        sigma * SIGMA_AXIS_RATIOS[1],
        sigma * SIGMA_AXIS_RATIOS[2],
    ];
    rotated_diagonal(stds, Some(seed))
}

/// Covariance from explicit per-axis standard deviations, optionally
/// rotated into a seeded random frame (axis-aligned when no seed is given).
pub fn covariance_from_axis_sigmas(stds: [f64; 3], axes_seed: Option<u64>) -> Mat3d {
    rotated_diagonal(stds, axes_seed)
}

fn rotated_diagonal(stds: [f64; 3], axes_seed: Option<u64>) -> Mat3d {
    let diagonal = Mat3d::diagonal(Vec3d::new(
        stds[0] * stds[0],
        stds[1] * stds[1],
        stds[2] * stds[2],
    ));
    match axes_seed {
        None => diagonal,
        Some(seed) => {
            let r = probcol::random_rotation::<f64>(seed);
            r.mat_mul(&diagonal).mat_mul(&r.transpose())
        }
    }
}

/// Translation placing object B so the minimum surface distance to A equals
/// `distance` within 1e-5 m, searching along the +x axis by bisection.
///
/// Both meshes are expected normalized (so they overlap at zero offset and
/// separate as the offset grows). Fails after 100 bisection steps.
pub fn place_at_separation(
    mesh_a: &TriMeshD,
    mesh_b: &TriMeshD,
    distance: f64,
) -> Result<IsometryD, probcol::Error> {
    const TOLERANCE: f64 = 1e-5;
    let axis = Vec3d::new(1.0, 0.0, 0.0);
    let tree_a = build_bvh(mesh_a, BvType::Aabb, 8)?;
    let tree_b = build_bvh(mesh_b, BvType::Aabb, 8)?;
    let measure = |offset: f64| mesh_distance_offset(&tree_a, &tree_b, axis * offset);

    let (a_lo, a_hi) = mesh_a.bounds();
    let (b_lo, b_hi) = mesh_b.bounds();
    let mut lo = 0.0;
    let mut hi = (a_hi - a_lo).norm() * 0.5 + (b_hi - b_lo).norm() * 0.5 + distance + 0.1;
    let mut growth = 0;
    while measure(hi)? < distance {
        hi *= 2.0;
        growth += 1;
        if growth > 60 {
            return Err(probcol::Error::NonConvergence("separation bracketing"));
        }
    }
    if measure(lo)? > distance {
        return Err(probcol::Error::NonConvergence(
            "separation search (meshes already apart at zero offset)",
        ));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let d = measure(mid)?;
        if (d - distance).abs() <= TOLERANCE {
            return Ok(IsometryD::translation(axis * mid));
        }
        if d < distance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(probcol::Error::NonConvergence("separation bisection"))
}

//! The benchmark matrix runner: one record per (bounding volume type,
//! separation distance, sigma, orientation seed), each carrying the
//! probability bound, a Monte Carlo reference, tree tightness, and timings.

use crate::config::BenchmarkConfig;
use crate::scene::{load_normalized, oriented_covariance, place_at_separation, LoadReport};
use crate::CliError;
use probcol::bvh::{build_bvh, bve, BvType};
use probcol::{
    general_pcd, monte_carlo_probability, random_rotation, GaussianErrorD, Mat3d, PcdQuery,
    TriMeshD,
};
use std::collections::HashMap;
use std::path::Path;

/// One benchmark row. Field order matches the CSV column order.
#[derive(Debug, Clone)]
pub struct BenchmarkRecord {
    /// Mesh pair identifier (the two file stems joined with `-`).
    pub pair_id: String,
    pub bv_type: BvType,
    /// Target surface separation in meters.
    pub distance: f64,
    /// Scalar sigma behind the oriented covariance, in meters.
    pub sigma: f64,
    /// Covariance orientation seed; doubles as the Monte Carlo seed.
    pub seed: u64,
    /// Bounding volume efficiency, averaged over the two trees.
    pub bve: f64,
    /// Guaranteed collision probability upper bound.
    pub cp: f64,
    pub mc_estimate: f64,
    pub mc_std_error: f64,
    pub build_seconds: f64,
    pub query_seconds: f64,
    pub mc_seconds: f64,
    /// Bounding-volume pairs evaluated (mean over frames for box rows).
    pub nodes_visited: f64,
    /// Set when anything in the row failed or the bound fell below the
    /// Monte Carlo estimate minus three standard errors.
    pub error: Option<String>,
}

struct RowMetrics {
    bve: f64,
    cp: f64,
    build_seconds: f64,
    query_seconds: f64,
    nodes_visited: f64,
}

/// Runs the full benchmark matrix, invoking `on_record` for every finished
/// row (so output can be appended incrementally) and returning all rows.
///
/// Row order is bounding volume type, then distance, then sigma, then seed.
/// Numeric failures inside a row are recorded in its `error` field and the
/// run continues; failures preparing the scene abort the run.
pub fn run_benchmark(
    config: &BenchmarkConfig,
    mut on_record: impl FnMut(&BenchmarkRecord) -> Result<(), CliError>,
) -> Result<Vec<BenchmarkRecord>, CliError> {
    config.validate()?;
    let bv_types = config.parsed_bv_types()?;
    let report_a = load_normalized(&config.mesh_a)?;
    let report_b = load_normalized(&config.mesh_b)?;
    warn_about_load(&config.mesh_a, &report_a);
    warn_about_load(&config.mesh_b, &report_b);
    let mesh_a = report_a.mesh;
    let pair_id = format!("{}-{}", stem(&config.mesh_a), stem(&config.mesh_b));

    // Position B once per distance; every row at that distance shares it.
    let mut placed_b: Vec<TriMeshD> = Vec::with_capacity(config.distances.len());
    for &distance in &config.distances {
        let iso = place_at_separation(&mesh_a, &report_b.mesh, distance).map_err(|e| {
            CliError::numeric(format!("placing meshes at separation {distance}"), e)
        })?;
        placed_b.push(report_b.mesh.transformed(&iso));
    }

    // Monte Carlo depends only on (distance, sigma, seed); cache across the
    // bounding volume sweep. The map is only ever probed by key.
    let mut mc_cache: HashMap<(usize, usize, u64), (f64, f64, f64)> = HashMap::new();
    let mut records = Vec::new();
    for &bv_type in &bv_types {
        for (di, &distance) in config.distances.iter().enumerate() {
            let mesh_b = &placed_b[di];
            for (si, &sigma) in config.sigmas.iter().enumerate() {
                for &seed in &config.orientation_seeds {
                    let covariance = oriented_covariance(sigma, seed);
                    let mut record = BenchmarkRecord {
                        pair_id: pair_id.clone(),
                        bv_type,
                        distance,
                        sigma,
                        seed,
                        bve: 0.0,
                        cp: 0.0,
                        mc_estimate: 0.0,
                        mc_std_error: 0.0,
                        build_seconds: 0.0,
                        query_seconds: 0.0,
                        mc_seconds: 0.0,
                        nodes_visited: 0.0,
                        error: None,
                    };

                    let mut query_ok = false;
                    match evaluate_row(&mesh_a, mesh_b, covariance, bv_type, seed, config) {
                        Ok(m) => {
                            record.bve = m.bve;
                            record.cp = m.cp;
                            record.build_seconds = m.build_seconds;
                            record.query_seconds = m.query_seconds;
                            record.nodes_visited = m.nodes_visited;
                            query_ok = true;
                        }
                        Err(e) => note(&mut record.error, format!("query: {e}")),
                    }

                    let key = (di, si, seed);
                    let mc = match mc_cache.get(&key).copied() {
                        Some(v) => Ok(v),
                        None => {
                            compute_mc(&mesh_a, mesh_b, covariance, config.mc_samples, seed)
                                .inspect(|&v| {
                                    mc_cache.insert(key, v);
                                })
                        }
                    };
                    let mut mc_ok = false;
                    match mc {
                        Ok((estimate, std_error, seconds)) => {
                            record.mc_estimate = estimate;
                            record.mc_std_error = std_error;
                            record.mc_seconds = seconds;
                            mc_ok = true;
                        }
                        Err(e) => note(&mut record.error, format!("monte carlo: {e}")),
                    }

                    if query_ok
                        && mc_ok
                        && record.cp < record.mc_estimate - 3.0 * record.mc_std_error
                    {
                        note(
                            &mut record.error,
                            format!(
                                "soundness: bound {:.6e} below {:.6e} - 3*{:.6e}",
                                record.cp, record.mc_estimate, record.mc_std_error
                            ),
                        );
                    }

                    if !config.record_timings {
                        record.build_seconds = 0.0;
                        record.query_seconds = 0.0;
                        record.mc_seconds = 0.0;
                    }
                    on_record(&record)?;
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}

/// Evaluates one row. Axis-aligned box rows average the bound, tree
/// tightness, node count, and timings over seeded random scene rotations
/// (the only frame-dependent family); other families run once in the
/// canonical frame.
fn evaluate_row(
    mesh_a: &TriMeshD,
    mesh_b: &TriMeshD,
    covariance: Mat3d,
    bv_type: BvType,
    seed: u64,
    config: &BenchmarkConfig,
) -> Result<RowMetrics, probcol::Error> {
    if bv_type != BvType::Aabb {
        return evaluate_frame(mesh_a, mesh_b, covariance, bv_type, config);
    }
    let frames = config.aabb_frame_count;
    let mut acc = RowMetrics {
        bve: 0.0,
        cp: 0.0,
        build_seconds: 0.0,
        query_seconds: 0.0,
        nodes_visited: 0.0,
    };
    for frame in 0..frames {
        let r = random_rotation::<f64>(frame_seed(seed, frame));
        let rotated_a = mesh_a.rotated(&r);
        let rotated_b = mesh_b.rotated(&r);
        let rotated_cov = r.mat_mul(&covariance).mat_mul(&r.transpose());
        let m = evaluate_frame(&rotated_a, &rotated_b, rotated_cov, bv_type, config)?;
        acc.bve += m.bve;
        acc.cp += m.cp;
        acc.build_seconds += m.build_seconds;
        acc.query_seconds += m.query_seconds;
        acc.nodes_visited += m.nodes_visited;
    }
    let n = frames as f64;
    acc.bve /= n;
    acc.cp /= n;
    acc.build_seconds /= n;
    acc.query_seconds /= n;
    acc.nodes_visited /= n;
    Ok(acc)
}

fn evaluate_frame(
    mesh_a: &TriMeshD,
    mesh_b: &TriMeshD,
    covariance: Mat3d,
    bv_type: BvType,
    config: &BenchmarkConfig,
) -> Result<RowMetrics, probcol::Error> {
    let start = std::time::Instant::now();
    let tree_a = build_bvh(mesh_a, bv_type, config.leaf_capacity)?;
    let tree_b = build_bvh(mesh_b, bv_type, config.leaf_capacity)?;
    let build_seconds = start.elapsed().as_secs_f64();
    let error = GaussianErrorD::zero_mean(covariance)?;
    let result = general_pcd(&PcdQuery {
        tree_a: &tree_a,
        tree_b: &tree_b,
        error: &error,
        confidence: config.delta,
    })?;
    let bve_a = bve(mesh_a, &tree_a)?;
    let bve_b = bve(mesh_b, &tree_b)?;
    Ok(RowMetrics {
        bve: 0.5 * (bve_a + bve_b),
        cp: result.probability_upper,
        build_seconds,
        query_seconds: result.elapsed.as_secs_f64(),
        nodes_visited: result.nodes_visited as f64,
    })
}

fn compute_mc(
    mesh_a: &TriMeshD,
    mesh_b: &TriMeshD,
    covariance: Mat3d,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64, f64), probcol::Error> {
    let start = std::time::Instant::now();
    let error = GaussianErrorD::zero_mean(covariance)?;
    let mc = monte_carlo_probability(mesh_a, mesh_b, &error, samples, seed)?;
    Ok((mc.estimate, mc.std_error, start.elapsed().as_secs_f64()))
}

/// Deterministic per-frame rotation seed derived from the row seed.
fn frame_seed(seed: u64, frame: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(frame as u64 + 1)
}

fn note(slot: &mut Option<String>, msg: String) {
    match slot {
        Some(existing) => {
            existing.push_str("; ");
            existing.push_str(&msg);
        }
        None => *slot = Some(msg),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".to_string())
}

fn warn_about_load(path: &Path, report: &LoadReport) {
    if report.dropped_faces > 0 {
        eprintln!(
            "warning: {}: dropped {} degenerate face(s)",
            path.display(),
            report.dropped_faces
        );
    }
    if report.welded_vertices > 0 {
        eprintln!(
            "warning: {}: welded {} duplicate vertex/vertices",
            path.display(),
            report.welded_vertices
        );
    }
}

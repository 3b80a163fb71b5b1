//! Benchmark configuration: a single JSON document in which every numeric
//! field has a protocol default, so a minimal config only names the two
//! meshes.

use crate::CliError;
use probcol::bvh::BvType;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Object A (the one carrying the positional error).
    pub mesh_a: PathBuf,
    /// Object B, translated to each benchmark separation.
    pub mesh_b: PathBuf,
    /// Surface separations in meters (after normalization).
    #[serde(default = "default_distances")]
    pub distances: Vec<f64>,
    /// Error magnitudes in meters; each becomes an anisotropic covariance
    /// oriented by every seed in `orientation_seeds`.
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    /// Seeds orienting the covariance axes; also seed the Monte Carlo
    /// reference for their rows.
    #[serde(default = "default_orientation_seeds")]
    pub orientation_seeds: Vec<u64>,
    /// Bounding volume families to benchmark.
    #[serde(default = "default_bv_types")]
    pub bv_types: Vec<String>,
    /// Traversal confidence: refinement stops once a pair's bound drops
    /// below `1 - delta`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_leaf_capacity")]
    pub leaf_capacity: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Number of random global frames averaged into each axis-aligned-box
    /// row (axis-aligned results depend on the frame).
    #[serde(default = "default_aabb_frame_count")]
    pub aabb_frame_count: usize,
    /// CSV output path.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Record wall-clock timings. Off by default so repeated runs of the
    /// same config produce byte-identical CSV.
    #[serde(default)]
    pub record_timings: bool,
}

fn default_distances() -> Vec<f64> {
    vec![0.01, 0.05]
}

fn default_sigmas() -> Vec<f64> {
    vec![0.01, 0.03, 0.05]
}

fn default_orientation_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_bv_types() -> Vec<String> {
    BvType::ALL.iter().map(|bv| bv.as_str().to_owned()).collect()
}

fn default_delta() -> f64 {
    0.99
}

fn default_leaf_capacity() -> usize {
    4
}

fn default_mc_samples() -> usize {
    10_000
}

fn default_aabb_frame_count() -> usize {
    100
}

fn default_output() -> PathBuf {
    PathBuf::from("benchmark.csv")
}

impl BenchmarkConfig {
    /// A config holding only the two mesh paths; everything else defaulted.
    pub fn with_meshes(mesh_a: impl Into<PathBuf>, mesh_b: impl Into<PathBuf>) -> Self {
        serde_json::from_value(serde_json::json!({
            "mesh_a": mesh_a.into(),
            "mesh_b": mesh_b.into(),
        }))
        .expect("mesh-only config deserializes")
    }

    /// Parsed bounding volume list, in config order.
    pub fn parsed_bv_types(&self) -> Result<Vec<BvType>, CliError> {
        self.bv_types
            .iter()
            .map(|s| {
                s.parse::<BvType>()
                    .map_err(|e| CliError::Config(e.to_string()))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: &str| Err(CliError::Config(msg.to_owned()));
        if self.distances.is_empty()
            || self.sigmas.is_empty()
            || self.orientation_seeds.is_empty()
            || self.bv_types.is_empty()
        {
            return fail("distances, sigmas, orientation_seeds, and bv_types must be nonempty");
        }
        if !self.distances.iter().all(|&d| d > 0.0 && d.is_finite()) {
            return fail("every distance must be a positive finite number of meters");
        }
        if !self.sigmas.iter().all(|&s| s > 0.0 && s.is_finite()) {
            return fail("every sigma must be a positive finite number of meters");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail("delta must lie strictly between 0 and 1");
        }
        if self.leaf_capacity == 0 {
            return fail("leaf_capacity must be positive");
        }
        if self.mc_samples < 100 {
            return fail("mc_samples must be at least 100");
        }
        if self.aabb_frame_count == 0 {
            return fail("aabb_frame_count must be positive");
        }
        self.parsed_bv_types()?;
        Ok(())
    }
}

/// Loads and validates a JSON benchmark configuration.
pub fn load_config(path: &Path) -> Result<BenchmarkConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let config: BenchmarkConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse config {}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

//! Command-line interface: one-shot probability and Monte Carlo queries,
//! the benchmark matrix, and tree tightness inspection.

use crate::config::load_config;
use crate::output::{csv_header, csv_row, pretty_table};
use crate::runner::run_benchmark;
use crate::scene::{covariance_from_axis_sigmas, load_normalized, place_at_separation};
use crate::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use probcol::bvh::{build_bvh, bve, BvType};
use probcol::{general_pcd, monte_carlo_probability, GaussianErrorD, PcdQuery, TriMeshD};
use std::io::Write as _;
use std::path::PathBuf;

/// Guaranteed collision-probability upper bounds for triangle meshes under
/// Gaussian positional error, with a Monte Carlo reference and benchmarks.
#[derive(Parser)]
#[command(name = "probcol", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Guaranteed upper bound on the collision probability of one mesh pair.
    Pcd(PcdArgs),
    /// Monte Carlo estimate of the same probability (reference, not a bound).
    Mc(McArgs),
    /// Run the benchmark matrix described by a JSON config.
    Bench(BenchArgs),
    /// Bounding volume efficiency of the tree(s) built over one mesh.
    Bve(BveArgs),
}

/// Geometry flags shared by the one-shot queries: both meshes are normalized
/// (longest bounding-box edge scaled to one meter) and B is placed at an
/// exact surface separation along +x.
#[derive(Args)]
pub struct SceneArgs {
    /// Object A (carries the positional error), OBJ format.
    #[arg(long)]
    pub mesh_a: PathBuf,
    /// Object B, OBJ format.
    #[arg(long)]
    pub mesh_b: PathBuf,
    /// Surface separation in meters after normalization.
    #[arg(long, default_value_t = 0.05)]
    pub distance: f64,
    /// Per-axis error standard deviations in meters, comma separated.
    #[arg(long, default_value = "0.01,0.01,0.01", value_parser = parse_sigma_triple)]
    pub sigma: [f64; 3],
    /// Rotate the covariance axes into a seeded random frame.
    #[arg(long)]
    pub sigma_axes_seed: Option<u64>,
}

#[derive(Args)]
pub struct PcdArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Bounding volume family: sphere, aabb, obb, kdop26, or convex.
    #[arg(long, default_value = "kdop26", value_parser = parse_bv)]
    pub bv: BvType,
    /// Traversal confidence; refinement stops below `1 - delta`.
    #[arg(long, default_value_t = 0.99)]
    pub delta: f64,
    #[arg(long, default_value_t = 4)]
    pub leaf_capacity: usize,
}

#[derive(Args)]
pub struct McArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Monte Carlo sample count (at least 100).
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct BenchArgs {
    /// JSON benchmark configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config's CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// What to print on stdout once the run finishes.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Args)]
pub struct BveArgs {
    #[arg(long)]
    pub mesh_a: PathBuf,
    /// Bounding volume family; all five are reported when omitted.
    #[arg(long, value_parser = parse_bv)]
    pub bv: Option<BvType>,
    #[arg(long, default_value_t = 4)]
    pub leaf_capacity: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Print only the summary line (the CSV goes to the output file).
    Csv,
    /// Also print a table grouped by separation distance.
    Table,
}

fn parse_bv(s: &str) -> Result<BvType, String> {
    s.parse::<BvType>().map_err(|e| e.to_string())
}

fn parse_sigma_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated values like 0.01,0.01,0.01, got {s:?}"
        ));
    }
    let mut out = [0.0f64; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|e| format!("bad sigma component {part:?}: {e}"))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("sigma components must be positive and finite, got {v}"));
        }
        *slot = v;
    }
    Ok(out)
}

/// Loads, normalizes, and positions the two meshes of a one-shot query.
fn prepare_scene(scene: &SceneArgs) -> Result<(TriMeshD, TriMeshD), CliError> {
    if !(scene.distance > 0.0 && scene.distance.is_finite()) {
        return Err(CliError::Config(
            "distance must be a positive finite number of meters".to_owned(),
        ));
    }
    let mesh_a = load_normalized(&scene.mesh_a)?.mesh;
    let mesh_b = load_normalized(&scene.mesh_b)?.mesh;
    let iso = place_at_separation(&mesh_a, &mesh_b, scene.distance).map_err(|e| {
        CliError::numeric(
            format!("placing meshes at separation {}", scene.distance),
            e,
        )
    })?;
    let placed = mesh_b.transformed(&iso);
    Ok((mesh_a, placed))
}

fn scene_error(scene: &SceneArgs) -> Result<GaussianErrorD, CliError> {
    let covariance = covariance_from_axis_sigmas(scene.sigma, scene.sigma_axes_seed);
    GaussianErrorD::zero_mean(covariance)
        .map_err(|e| CliError::numeric("building the error model", e))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Pcd(args) => run_pcd(args),
        Command::Mc(args) => run_mc(args),
        Command::Bench(args) => run_bench(args),
        Command::Bve(args) => run_bve(args),
    }
}

fn run_pcd(args: PcdArgs) -> Result<(), CliError> {
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(CliError::Config(
            "delta must lie strictly between 0 and 1".to_owned(),
        ));
    }
    if args.leaf_capacity == 0 {
        return Err(CliError::Config("leaf capacity must be positive".to_owned()));
    }
    let (mesh_a, mesh_b) = prepare_scene(&args.scene)?;
    let error = scene_error(&args.scene)?;
    let tree_a = build_bvh(&mesh_a, args.bv, args.leaf_capacity)
        .map_err(|e| CliError::numeric("building tree A", e))?;
    let tree_b = build_bvh(&mesh_b, args.bv, args.leaf_capacity)
        .map_err(|e| CliError::numeric("building tree B", e))?;
    let result = general_pcd(&PcdQuery {
        tree_a: &tree_a,
        tree_b: &tree_b,
        error: &error,
        confidence: args.delta,
    })
    .map_err(|e| CliError::numeric("probability query", e))?;
    println!("probability_upper={:.6e}", result.probability_upper);
    println!("root_bound={:.6e}", result.root_bound);
    println!("nodes_visited={}", result.nodes_visited);
    println!("leaf_pairs_evaluated={}", result.leaf_pairs_evaluated);
    println!("elapsed_ms={:.3}", result.elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn run_mc(args: McArgs) -> Result<(), CliError> {
    if args.samples < 100 {
        return Err(CliError::Config(
            "samples must be at least 100".to_owned(),
        ));
    }
    let (mesh_a, mesh_b) = prepare_scene(&args.scene)?;
    let error = scene_error(&args.scene)?;
    let mc = monte_carlo_probability(&mesh_a, &mesh_b, &error, args.samples, args.seed)
        .map_err(|e| CliError::numeric("monte carlo estimate", e))?;
    println!("estimate={:.6e}", mc.estimate);
    println!("std_error={:.6e}", mc.std_error);
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(out) = args.out {
        config.output = out;
    }
    let file = std::fs::File::create(&config.output)?;
    let mut writer = std::io::BufWriter::new(file);
    writeln!(writer, "{}", csv_header())?;
    let records = run_benchmark(&config, |record| {
        writeln!(writer, "{}", csv_row(record))?;
        writer.flush()?;
        Ok(())
    })?;
    if args.format == OutputFormat::Table {
        print!("{}", pretty_table(&records));
    }
    let flagged = records.iter().filter(|r| r.error.is_some()).count();
    println!(
        "wrote {} row(s) to {}; {} flagged",
        records.len(),
        config.output.display(),
        flagged
    );
    Ok(())
}

fn run_bve(args: BveArgs) -> Result<(), CliError> {
    if args.leaf_capacity == 0 {
        return Err(CliError::Config("leaf capacity must be positive".to_owned()));
    }
    let mesh = load_normalized(&args.mesh_a)?.mesh;
    let families: Vec<BvType> = match args.bv {
        Some(bv) => vec![bv],
        None => BvType::ALL.to_vec(),
    };
    for bv in families {
        let tree = build_bvh(&mesh, bv, args.leaf_capacity)
            .map_err(|e| CliError::numeric(format!("building {bv} tree"), e))?;
        let value = bve(&mesh, &tree)
            .map_err(|e| CliError::numeric(format!("tightness of {bv} tree"), e))?;
        println!("bv={bv} bve={value:.6e}");
    }
    Ok(())
}

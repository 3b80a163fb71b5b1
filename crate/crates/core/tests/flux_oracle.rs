//! Quadrature oracle for the surface-integral probability bound.
//!
//! Independently integrates the bounding field over a convex polytope's
//! surface (2D Gauss quadrature per triangle) and its divergence over the
//! interior (3D Gauss quadrature over a tetrahedral fan), checks the two
//! agree as the divergence theorem demands, and checks the vertex-max bound
//! dominates the true flux.

use probcol::gen::{random_convex_polytope, random_unit_vector};
use probcol::{field_f, surface_integral_upper, ConvexPolytope, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type V = Vec3<f64>;

/// Eight-point Gauss–Legendre rule on [0, 1].
const GL8: [(f64, f64); 8] = [
    (0.5 - 0.480_144_928_248_768_2, 0.050_614_268_145_188_15),
    (0.5 - 0.398_333_238_706_813_35, 0.111_190_517_226_687_24),
    (0.5 - 0.262_766_204_958_164_5, 0.156_853_322_938_943_66),
    (0.5 - 0.091_717_321_247_824_9, 0.181_341_891_689_181),
    (0.5 + 0.091_717_321_247_824_9, 0.181_341_891_689_181),
    (0.5 + 0.262_766_204_958_164_5, 0.156_853_322_938_943_66),
    (0.5 + 0.398_333_238_706_813_35, 0.111_190_517_226_687_24),
    (0.5 + 0.480_144_928_248_768_2, 0.050_614_268_145_188_15),
];

/// Divergence of the bounding field: a one-dimensional Gaussian profile
/// along the chosen direction.
fn relaxed_density(x: V, n_d: V) -> f64 {
    let t = x.dot(n_d);
    (8.0 * std::f64::consts::PI.powi(3)).sqrt().recip() * (-0.5 * t * t).exp()
}

/// Integrates `F · n` over one triangle by a collapsed-square Gauss rule.
fn triangle_flux(tri: [V; 3], n_d: V) -> f64 {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let cross = e1.cross(e2);
    let area2 = cross.norm();
    if area2 == 0.0 {
        return 0.0;
    }
    let normal = cross / area2;
    let mut sum = 0.0;
    for &(u, wu) in &GL8 {
        for &(v, wv) in &GL8 {
            // Map the unit square onto the triangle: a = u, b = v(1-u),
            // with Jacobian (1-u) relative to barycentric area.
            let a = u;
            let b = v * (1.0 - u);
            let x = tri[0] + e1 * a + e2 * b;
            sum += wu * wv * (1.0 - u) * field_f(x, n_d).dot(normal);
        }
    }
    sum * area2
}

/// Integrates the relaxed density over one tetrahedron by a collapsed-cube
/// Gauss rule.
fn tet_density(tet: [V; 4], n_d: V) -> f64 {
    let e1 = tet[1] - tet[0];
    let e2 = tet[2] - tet[0];
    let e3 = tet[3] - tet[0];
    let det = e1.dot(e2.cross(e3)).abs();
    if det == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &(u, wu) in &GL8 {
        for &(v, wv) in &GL8 {
            for &(w, ww) in &GL8 {
                let a = u;
                let b = v * (1.0 - u);
                let c = w * (1.0 - u) * (1.0 - v);
                let x = tet[0] + e1 * a + e2 * b + e3 * c;
                let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                sum += wu * wv * ww * jac * relaxed_density(x, n_d);
            }
        }
    }
    sum * det
}

fn surface_flux(poly: &ConvexPolytope<f64>, n_d: V) -> f64 {
    poly.faces
        .iter()
        .map(|f| {
            triangle_flux(
                [
                    poly.vertices[f[0]],
                    poly.vertices[f[1]],
                    poly.vertices[f[2]],
                ],
                n_d,
            )
        })
        .sum()
}

fn volume_density(poly: &ConvexPolytope<f64>, n_d: V) -> f64 {
    let centroid = poly.vertex_centroid();
    poly.faces
        .iter()
        .map(|f| {
            tet_density(
                [
                    centroid,
                    poly.vertices[f[0]],
                    poly.vertices[f[1]],
                    poly.vertices[f[2]],
                ],
                n_d,
            )
        })
        .sum()
}

#[test]
fn net_flux_matches_enclosed_density_on_random_polytopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(510);
    for seed in 0..8u64 {
        let poly = random_convex_polytope::<f64>(24, 0.4, 600 + seed)
            .unwrap()
            .translated(V::new(0.9, -0.3, 0.4) * (seed as f64 / 4.0 - 1.0));
        for _ in 0..3 {
            let n_d: V = random_unit_vector(&mut rng);
            let flux = surface_flux(&poly, n_d);
            let enclosed = volume_density(&poly, n_d);
            assert!(enclosed > 0.0);
            let rel = (flux - enclosed).abs() / enclosed;
            assert!(
                rel < 1e-4,
                "seed {seed}: flux {flux} vs enclosed {enclosed} (rel {rel})"
            );
        }
    }
}

#[test]
fn vertex_max_bound_dominates_true_flux() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..8u64 {
        let poly = random_convex_polytope::<f64>(20, 0.3, 700 + seed)
            .unwrap()
            .translated(V::new(0.5, 0.2, -0.6));
        for _ in 0..3 {
            let n_d: V = random_unit_vector(&mut rng);
            let flux = surface_flux(&poly, n_d);
            let bound = surface_integral_upper(&poly, n_d);
            assert!(
                bound >= flux - 1e-12,
                "seed {seed}: bound {bound} below flux {flux}"
            );
            // The bound also dominates the enclosed probability mass.
            let enclosed = volume_density(&poly, n_d);
            assert!(bound >= enclosed - 1e-12);
        }
    }
}

#[test]
fn flux_through_far_polytope_is_negligible_from_both_sides() {
    let poly = random_convex_polytope::<f64>(16, 0.5, 900)
        .unwrap()
        .translated(V::new(40.0, 0.0, 0.0));
    let n_d = V::new(1.0, 0.0, 0.0);
    assert!(surface_flux(&poly, n_d).abs() < 1e-10);
    assert!(volume_density(&poly, n_d) < 1e-10);
}

//! Minkowski sums of convex shapes.
//!
//! Polytope sums are exact: the hull of all pairwise vertex sums. To keep
//! very large pairs tractable, operands whose vertex-count product exceeds a
//! cap are first replaced by their 26-direction outer polytopes — a strictly
//! containing simplification, so downstream probability bounds stay valid
//! upper bounds. Box-like shapes sum via their 64 corner sums, and k-DOPs
//! via interval arithmetic.

use crate::scalar::Real;
use crate::vec3::Vec3;
use crate::Result;

use super::boxes::Parallelotope;
use super::hull::convex_hull_inflated;
use super::kdop::Kdop26;
use super::polytope::ConvexPolytope;

/// Above this vertex-count product the operands are coarsened to their
/// 26-direction outer polytopes before summing.
pub const SUM_PRODUCT_CAP: usize = 20_000;

/// Exact Minkowski sum of two polytopes (hull of pairwise vertex sums),
/// falling back to a conservative outer sum for very large inputs.
pub fn minkowski_sum_general<T: Real>(
    a: &ConvexPolytope<T>,
    b: &ConvexPolytope<T>,
) -> Result<ConvexPolytope<T>> {
    let product = a.vertices.len().saturating_mul(b.vertices.len());
    if product > SUM_PRODUCT_CAP {
        let a = outer_dop_polytope(a)?;
        let b = outer_dop_polytope(b)?;
        return sum_vertex_products(&a.vertices, &b.vertices);
    }
    sum_vertex_products(&a.vertices, &b.vertices)
}

/// Minkowski sum of two parallelotopes: hull of the 64 corner sums
/// (the sign patterns of the six combined generators).
pub fn minkowski_sum_boxes<T: Real>(
    a: &Parallelotope<T>,
    b: &Parallelotope<T>,
) -> Result<ConvexPolytope<T>> {
    let ca = a.corners();
    let cb = b.corners();
    let mut points = Vec::with_capacity(64);
    for &x in &ca {
        for &y in &cb {
            points.push(x + y);
        }
    }
    convex_hull_inflated(&points)
}

/// Interval-arithmetic sum of two 26-direction bounding polytopes:
/// contains the true Minkowski sum and is support-exact along all 26
/// canonical directions.
pub fn minkowski_sum_kdop<T: Real>(a: &Kdop26<T>, b: &Kdop26<T>) -> Kdop26<T> {
    a.sum(b)
}

/// Containing polytope over the 26 canonical directions.
fn outer_dop_polytope<T: Real>(p: &ConvexPolytope<T>) -> Result<ConvexPolytope<T>> {
    Kdop26::from_points(&p.vertices)?.to_polytope()
}

fn sum_vertex_products<T: Real>(a: &[Vec3<T>], b: &[Vec3<T>]) -> Result<ConvexPolytope<T>> {
    let mut points = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            points.push(x + y);
        }
    }
    convex_hull_inflated(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Aabb;
    use crate::gen::{random_convex_polytope, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type V = Vec3<f64>;

    #[test]
    fn box_sum_is_the_summed_box() {
        let a = Aabb::new(V::new(-1.0, -2.0, -0.5), V::new(1.0, 2.0, 0.5));
        let b = Aabb::new(V::new(-0.25, -0.25, -1.0), V::new(0.25, 0.25, 1.0));
        let sum = minkowski_sum_boxes(&a.to_parallelotope(), &b.to_parallelotope()).unwrap();
        sum.validate().unwrap();
        assert!((sum.volume() - 2.5 * 4.5 * 3.0).abs() < 1e-9);
        let (lo, hi) = sum.bounds();
        assert!((lo - V::new(-1.25, -2.25, -1.5)).norm() < 1e-12);
        assert!((hi - V::new(1.25, 2.25, 1.5)).norm() < 1e-12);
    }

    #[test]
    fn general_sum_supports_are_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for case in 0..20u64 {
            let a = random_convex_polytope::<f64>(25, 1.0, 300 + case).unwrap();
            let b = random_convex_polytope::<f64>(25, 0.7, 400 + case)
                .unwrap()
                .translated(V::new(0.5, -0.2, 0.1));
            let sum = minkowski_sum_general(&a, &b).unwrap();
            sum.validate().unwrap();
            for _ in 0..50 {
                let d = random_unit_vector::<f64>(&mut rng);
                let expect = a.support_value(d) + b.support_value(d);
                let got = sum.support_value(d);
                assert!(
                    (got - expect).abs() < 1e-9,
                    "case {case}: support mismatch {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn oversized_sum_is_conservative() {
        // Points on a sphere are all hull vertices, so the vertex product
        // exceeds the cap and triggers the outer simplification; the result
        // must still contain the true sum.
        let sphere_hull = |seed: u64, r: f64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<V> = (0..160)
                .map(|_| random_unit_vector::<f64>(&mut rng) * r)
                .collect();
            crate::convex::convex_hull(&pts).unwrap()
        };
        let a = sphere_hull(77, 1.0);
        let b = sphere_hull(78, 1.0);
        assert!(a.vertices.len() * b.vertices.len() > SUM_PRODUCT_CAP);
        let sum = minkowski_sum_general(&a, &b).unwrap();
        sum.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let d = random_unit_vector::<f64>(&mut rng);
            let exact = a.support_value(d) + b.support_value(d);
            assert!(sum.support_value(d) >= exact - 1e-9);
            // The 26-direction coarsening stays within a modest factor.
            assert!(sum.support_value(d) <= exact + 0.2 * exact.abs() + 0.2);
        }
    }

    #[test]
    fn kdop_sum_matches_interval_arithmetic() {
        let a = Kdop26::from_points(&[V::zero(), V::new(1.0, 2.0, 3.0)]).unwrap();
        let b = Kdop26::from_points(&[V::new(-1.0, 0.0, 0.5), V::new(0.0, 1.0, 0.0)]).unwrap();
        let s = minkowski_sum_kdop(&a, &b);
        for i in 0..13 {
            assert_eq!(s.min[i], a.min[i] + b.min[i]);
            assert_eq!(s.max[i], a.max[i] + b.max[i]);
        }
    }
}

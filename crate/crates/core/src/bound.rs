//! Upper bounds on the collision probability of convex shape pairs whose
//! relative position carries Gaussian error.
//!
//! The collision event "A translated by a random error hits B" is the event
//! that the error vector falls inside the Minkowski sum (−A) ⊕ B. After
//! whitening by Σ^(−1/2) the error is a standard normal, and the probability
//! mass of the whitened sum polytope V' is bounded through the divergence
//! theorem: a vector field whose divergence dominates the standard normal
//! density pointwise turns the volume integral into a surface flux, which is
//! in turn bounded triangle by triangle. Two classical sphere-pair
//! approximations are provided as baselines.

use crate::convex::{
    gjk_distance, minkowski_sum_boxes, minkowski_sum_general, minkowski_sum_kdop, Aabb,
    ConvexPolytope, ConvexShape, Parallelotope, Sphere,
};
use crate::erf::erf;
use crate::error::{Error, Result};
use crate::gaussian::{gaussian_pdf, GaussianError};
use crate::mat3::Mat3;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use std::collections::HashMap;

/// Triangles with area below this threshold contribute nothing to the
/// surface sum (their flux is zero to working precision).
const DEGENERATE_TRIANGLE_AREA: f64 = 1e-14;

/// Maximum bisection steps for the constrained density maximization used by
/// the sphere-pair bound.
const SPHERE_SEARCH_MAX_STEPS: usize = 200;

/// How a [`CollisionBound`] value was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMethod {
    /// Divergence-theorem surface bound over the whitened Minkowski sum
    /// polytope; guaranteed to be an upper bound.
    ConvexDivergence,
    /// Sphere-pair bound: ball volume times the maximum Gaussian density over
    /// the ball; guaranteed to be an upper bound.
    SphereMax,
    /// Sphere-pair approximation: ball volume times the Gaussian density at
    /// the ball center; NOT a guaranteed bound (can under- or overestimate).
    SphereCenter,
    /// The shapes already intersect at the mean displacement, so 1 is
    /// returned directly.
    Exact1,
    /// Monte Carlo reference estimate (produced by the query layer, never by
    /// the bound functions themselves).
    MonteCarloRef,
}

impl BoundMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ConvexDivergence => "convex_divergence",
            Self::SphereMax => "sphere_max",
            Self::SphereCenter => "sphere_center",
            Self::Exact1 => "exact_one",
            Self::MonteCarloRef => "monte_carlo_ref",
        }
    }
}

impl std::fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a convex-pair probability query.
#[derive(Clone, Copy, Debug)]
pub struct CollisionBound<T> {
    /// Upper bound on the collision probability, clamped to [0, 1].
    pub probability_upper: T,
    /// Minimum displacement between the whitened shapes (direction times
    /// whitened distance); zero when the shapes intersect at the mean.
    pub displacement_whitened: Vec3<T>,
    /// Which bound produced this value.
    pub method: BoundMethod,
}

impl<T: Real> CollisionBound<T> {
    /// Bound for a pair that already intersects at the mean displacement.
    fn certain() -> Self {
        Self {
            probability_upper: T::one(),
            displacement_whitened: Vec3::zero(),
            method: BoundMethod::Exact1,
        }
    }
}

/// The bounding vector field `F(x) = (1/4π)·(1 + erf((x·n_d)/√2))·n_d`.
///
/// The 1/(4π) scale makes `div F = (8π³)^(−1/2)·exp(−(x·n_d)²/2)` exactly:
/// the field varies only along `n_d`, so its divergence is the directional
/// derivative `(1/4π)·erf'((x·n_d)/√2)/√2 = (8π³)^(−1/2)·exp(−(x·n_d)²/2)`.
/// Because `(x·n_d)² ≤ ‖x‖²` for unit `n_d`, this divergence dominates the
/// standard normal density everywhere, so the outward flux of `F` through any
/// closed surface bounds the enclosed probability mass — for every choice of
/// unit `n_d`. The choice of `n_d` only affects tightness, never soundness.
///
/// Requires `‖n_d‖ = 1` within 1e-9.
pub fn field_f<T: Real>(x: Vec3<T>, n_d: Vec3<T>) -> Vec3<T> {
    debug_assert!((n_d.norm() - T::one()).abs() <= real(1e-9));
    n_d * field_scalar(x.dot(n_d))
}

/// Magnitude of `field_f` as a function of the projection `t = x·n_d`.
fn field_scalar<T: Real>(t: T) -> T {
    let quarter_inv_pi = real::<T>(0.25 * std::f64::consts::FRAC_1_PI);
    let inv_sqrt2 = real::<T>(std::f64::consts::FRAC_1_SQRT_2);
    quarter_inv_pi * (T::one() + erf(t * inv_sqrt2))
}

/// Upper bound on the flux of [`field_f`] through the boundary of `v_prime`,
/// hence on the standard normal probability mass inside it.
///
/// Each triangle's flux is bounded by its area times the largest field value
/// over its vertices (the integrand is monotone in the projection onto
/// `n_d`, so the per-face maximum is attained at a vertex). Back-facing
/// triangles contribute negative terms, which keeps the sum close to the true
/// flux. Edge-adjacent coplanar triangles are bounded as one flat facet
/// (area times the facet-wide vertex maximum): Minkowski sums routinely
/// produce four-vertex facets, and evaluating them as a unit keeps the result
/// independent of which diagonal the hull picked when it split them — without
/// that, the bound would wiggle under joint rotations of the inputs.
/// Triangles with area below 1e-14 are skipped. The result is clamped to
/// [0, 1]: the true probability lies in that range, so clamping preserves the
/// upper-bound property.
///
/// Requires `‖n_d‖ = 1` within 1e-9.
pub fn surface_integral_upper<T: Real>(v_prime: &ConvexPolytope<T>, n_d: Vec3<T>) -> T {
    debug_assert!((n_d.norm() - T::one()).abs() <= real(1e-9));
    let half = real::<T>(0.5);
    let area_floor = real::<T>(DEGENERATE_TRIANGLE_AREA);
    let face_count = v_prime.faces.len();

    // Per-face area and vertex-max field value; degenerate faces are skipped.
    let mut areas = vec![T::zero(); face_count];
    let mut values = vec![T::neg_infinity(); face_count];
    let mut live = vec![false; face_count];
    for (fi, (face, &normal)) in v_prime.faces.iter().zip(&v_prime.face_normals).enumerate() {
        let a = v_prime.vertices[face[0]];
        let b = v_prime.vertices[face[1]];
        let c = v_prime.vertices[face[2]];
        let area = half * (b - a).cross(c - a).norm();
        if area < area_floor {
            continue;
        }
        let alignment = n_d.dot(normal);
        // F(x)·n = field_scalar(x·n_d)·(n_d·n) is monotone in x·n_d, so the
        // face maximum sits at the vertex with the extreme projection.
        let mut best = T::neg_infinity();
        for &vi in face {
            let value = field_scalar(v_prime.vertices[vi].dot(n_d)) * alignment;
            if value > best {
                best = value;
            }
        }
        areas[fi] = area;
        values[fi] = best;
        live[fi] = true;
    }

    // Merge edge-adjacent coplanar triangles into facet groups.
    let mut parent: Vec<u32> = (0..face_count as u32).collect();
    let mut edge_face: HashMap<(u32, u32), u32> = HashMap::with_capacity(3 * face_count);
    for (fi, face) in v_prime.faces.iter().enumerate() {
        if !live[fi] {
            continue;
        }
        for k in 0..3 {
            edge_face.insert((face[k] as u32, face[(k + 1) % 3] as u32), fi as u32);
        }
    }
    let coplanar = T::one() - real::<T>(1e-10);
    for (fi, face) in v_prime.faces.iter().enumerate() {
        if !live[fi] {
            continue;
        }
        for k in 0..3 {
            let reversed = (face[(k + 1) % 3] as u32, face[k] as u32);
            let Some(&fj) = edge_face.get(&reversed) else {
                continue;
            };
            let (fi, fj) = (fi as u32, fj);
            if fj <= fi || !live[fj as usize] {
                continue;
            }
            if v_prime.face_normals[fi as usize].dot(v_prime.face_normals[fj as usize]) >= coplanar
            {
                let (ra, rb) = (find_root(&mut parent, fi), find_root(&mut parent, fj));
                if ra != rb {
                    parent[rb as usize] = ra;
                }
            }
        }
    }

    // Spread each group's maximum to its members, then sum area × group max
    // in face order (deterministic regardless of hash iteration order).
    let mut group_best = vec![T::neg_infinity(); face_count];
    for fi in 0..face_count {
        if !live[fi] {
            continue;
        }
        let root = find_root(&mut parent, fi as u32) as usize;
        if values[fi] > group_best[root] {
            group_best[root] = values[fi];
        }
    }
    let mut total = T::zero();
    for fi in 0..face_count {
        if !live[fi] {
            continue;
        }
        let root = find_root(&mut parent, fi as u32) as usize;
        total += areas[fi] * group_best[root];
    }
    total.max(T::zero()).min(T::one())
}

/// Union-find root lookup with path halving.
fn find_root(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        parent[i as usize] = parent[parent[i as usize] as usize];
        i = parent[i as usize];
    }
    i
}

/// Guaranteed upper bound on the collision probability of two convex shapes
/// when shape `a` is displaced by the Gaussian error.
///
/// Sphere-vs-sphere pairs route to [`sphere_pcd_max`] (spheres are not
/// polytopes; the ball-specific bound is both exact-volume and cheaper). All
/// other pairs build the Minkowski sum `(−(a + mean)) ⊕ b` through the best
/// specialized path for the pair, whiten it by `Σ^(−1/2)`, pick the field
/// direction from the minimum displacement between the whitened shapes
/// (equivalently the closest point of the whitened sum polytope to the
/// origin), and evaluate [`surface_integral_upper`]. Pairs that intersect at
/// the mean displacement return probability 1 with method [`BoundMethod::Exact1`].
pub fn convex_pcd<T: Real>(
    a: &ConvexShape<T>,
    b: &ConvexShape<T>,
    error: &GaussianError<T>,
) -> Result<CollisionBound<T>> {
    if let (ConvexShape::Sphere(sa), ConvexShape::Sphere(sb)) = (a, b) {
        return sphere_pcd_max(sa, sb, error);
    }
    let v_prime = whitened_sum_polytope(a, b, error)?;
    // Distance from the origin to V' equals the minimum displacement between
    // the whitened shapes; GJK against a single point finds it.
    let gjk = match gjk_distance(&Vec3::<T>::zero(), &v_prime) {
        Ok(result) => result,
        // Degenerate numerics: fall back to the trivially sound answer.
        Err(Error::NonConvergence(_)) => return Ok(CollisionBound::certain()),
        Err(e) => return Err(e),
    };
    if gjk.intersecting {
        return Ok(CollisionBound::certain());
    }
    let Some(n_d) = gjk.displacement.unit() else {
        // Touching contact: no usable direction, fall back as above.
        return Ok(CollisionBound::certain());
    };
    Ok(CollisionBound {
        probability_upper: surface_integral_upper(&v_prime, n_d),
        displacement_whitened: gjk.displacement,
        method: BoundMethod::ConvexDivergence,
    })
}

/// Whitened Minkowski sum polytope `Σ^(−1/2)·((−(a + mean)) ⊕ b)`.
///
/// The sum is built in the original frame (where the box and 26-direction
/// specializations are exact or conservatively closed) and whitened once at
/// the end; linear maps distribute over Minkowski sums, so the order does not
/// change the result.
fn whitened_sum_polytope<T: Real>(
    a: &ConvexShape<T>,
    b: &ConvexShape<T>,
    error: &GaussianError<T>,
) -> Result<ConvexPolytope<T>> {
    let mean = error.mean();
    let sum = match (a, b) {
        (ConvexShape::Kdop(ka), ConvexShape::Kdop(kb)) => {
            let negated = ka.translated(mean).negated();
            minkowski_sum_kdop(&negated, kb).to_polytope()?
        }
        (ConvexShape::Aabb(ba), ConvexShape::Aabb(bb)) => {
            // The sum of axis-aligned boxes is axis-aligned: reflect and
            // shift A's intervals, then add them to B's per axis.
            let shifted = ba.translated(mean);
            Aabb::new(-shifted.max + bb.min, -shifted.min + bb.max).to_polytope()
        }
        (
            ConvexShape::Aabb(_) | ConvexShape::Obb(_),
            ConvexShape::Aabb(_) | ConvexShape::Obb(_),
        ) => {
            let pa = parallelotope_form(a).translated(mean).negated();
            minkowski_sum_boxes(&pa, &parallelotope_form(b))?
        }
        _ => {
            let pa = polytope_form(a)?.translated(mean).negated();
            minkowski_sum_general(&pa, &polytope_form(b)?)?
        }
    };
    sum.apply_linear(&error.whitening())
}

fn parallelotope_form<T: Real>(shape: &ConvexShape<T>) -> Parallelotope<T> {
    match shape {
        ConvexShape::Aabb(b) => b.to_parallelotope(),
        ConvexShape::Obb(b) => b.to_parallelotope(),
        _ => unreachable!("caller dispatches only box variants here"),
    }
}

/// Polytope form of a shape for the general Minkowski path. Spheres become a
/// circumscribed tessellation, so the polytope contains the true shape and
/// downstream bounds stay conservative.
fn polytope_form<T: Real>(shape: &ConvexShape<T>) -> Result<ConvexPolytope<T>> {
    match shape {
        ConvexShape::Sphere(s) => s.circumscribed_polytope(2),
        ConvexShape::Aabb(b) => Ok(b.to_polytope()),
        ConvexShape::Obb(b) => b.to_polytope(),
        ConvexShape::Kdop(k) => k.to_polytope(),
        ConvexShape::Hull(h) => Ok(h.clone()),
    }
}

/// Guaranteed upper bound for a sphere pair: ball volume times the maximum
/// Gaussian density over the ball.
///
/// The collision event is "error ∈ ball of radius r₁+r₂ centered at the
/// relative center offset". In coordinates centered on that ball, the error
/// density has mean `m = mean + center_a − center_b`. If the mode `m` lies in
/// the ball the peak density applies; otherwise the maximizer solves the
/// first-order conditions `x(λ) = (Σ⁻¹ + λI)⁻¹·Σ⁻¹·m` with `‖x(λ)‖ = r`,
/// found by bisection on the multiplier λ (the radius is strictly decreasing
/// in λ). The product volume × density is clamped to 1.
pub fn sphere_pcd_max<T: Real>(
    a: &Sphere<T>,
    b: &Sphere<T>,
    error: &GaussianError<T>,
) -> Result<CollisionBound<T>> {
    let r = a.radius + b.radius;
    let m = error.mean() + a.center - b.center;
    let sigma = error.covariance();
    let x_max = if m.norm() <= r {
        m
    } else {
        constrained_density_argmax(m, &sigma, r)?
    };
    let density = gaussian_pdf(x_max, m, &sigma)?;
    let volume = real::<T>(4.0 / 3.0) * T::PI() * r.powi(3);
    Ok(CollisionBound {
        probability_upper: (volume * density).min(T::one()).max(T::zero()),
        displacement_whitened: error.whitening().mul_vec(x_max - m),
        method: BoundMethod::SphereMax,
    })
}

/// Classical sphere-pair approximation: ball volume times the Gaussian
/// density at the ball center. Cheap, but NOT a guaranteed bound — it can
/// fall on either side of the true probability. Clamped to [0, 1].
pub fn sphere_pcd_center<T: Real>(
    a: &Sphere<T>,
    b: &Sphere<T>,
    error: &GaussianError<T>,
) -> Result<CollisionBound<T>> {
    let r = a.radius + b.radius;
    let m = error.mean() + a.center - b.center;
    let sigma = error.covariance();
    let density = gaussian_pdf(Vec3::zero(), m, &sigma)?;
    let volume = real::<T>(4.0 / 3.0) * T::PI() * r.powi(3);
    Ok(CollisionBound {
        probability_upper: (volume * density).min(T::one()).max(T::zero()),
        displacement_whitened: error.whitening().mul_vec(-m),
        method: BoundMethod::SphereCenter,
    })
}

/// Maximizer of the Gaussian density `N(x; m, Σ)` over the ball `‖x‖ ≤ r`
/// when the mode lies strictly outside (`‖m‖ > r`).
///
/// In the eigenbasis of Σ the candidate `x(λ)` has components
/// `mᵢ/(1 + λ·sᵢ)`, so `‖x(λ)‖` decreases strictly and continuously from
/// `‖m‖` to zero as λ grows — bisection on λ is exact.
fn constrained_density_argmax<T: Real>(m: Vec3<T>, sigma: &Mat3<T>, r: T) -> Result<Vec3<T>> {
    let inv = sigma.inverse()?;
    let rhs = inv.mul_vec(m);
    let point_at = |lambda: T| -> Result<Vec3<T>> {
        let shifted = inv + Mat3::diagonal(Vec3::splat(lambda));
        Ok(shifted.inverse()?.mul_vec(rhs))
    };
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut steps = 0usize;
    while point_at(hi)?.norm() > r {
        hi = hi + hi;
        steps += 1;
        if steps > SPHERE_SEARCH_MAX_STEPS {
            return Err(Error::NonConvergence("sphere bound multiplier bracket"));
        }
    }
    let tol = real::<T>(1e-12) * r;
    for _ in 0..SPHERE_SEARCH_MAX_STEPS {
        let mid = (lo + hi) * real::<T>(0.5);
        let x = point_at(mid)?;
        let excess = x.norm() - r;
        if excess.abs() <= tol {
            return Ok(x);
        }
        if excess > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The bracket has collapsed to machine precision; the feasible endpoint
    // is the constrained maximizer to working accuracy.
    let x = point_at(hi)?;
    if (x.norm() - r).abs() <= real::<T>(1e-9) * r {
        Ok(x)
    } else {
        Err(Error::NonConvergence("sphere bound multiplier search"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{convex_hull, Aabb, Kdop26, OrientedBox};
    use crate::gaussian::random_rotation;
    use crate::gen::{random_convex_polytope, random_spd};

    type V = Vec3<f64>;

    fn phi(x: f64) -> f64 {
        0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
    }

    fn cuboid_shape(center: V, half: V) -> ConvexShape<f64> {
        ConvexShape::Hull(ConvexPolytope::cuboid(center, half))
    }

    #[test]
    fn field_at_zero_projection_is_quarter_inv_pi() {
        let n = V::new(0.0, 1.0, 0.0);
        let f = field_f(V::new(3.0, 0.0, -2.0), n);
        let expected = 0.25 * std::f64::consts::FRAC_1_PI;
        assert!((f.y - expected).abs() < 1e-15, "{} vs {expected}", f.y);
        assert_eq!(f.x, 0.0);
        assert_eq!(f.z, 0.0);
    }

    #[test]
    fn field_saturates_to_half_inv_pi() {
        let n = V::new(1.0, 0.0, 0.0);
        let f = field_f(V::new(9.0, 1.0, 1.0), n);
        let expected = 0.5 * std::f64::consts::FRAC_1_PI;
        assert!((f.x - expected).abs() < 1e-15);
    }

    #[test]
    fn field_divergence_matches_projected_density() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let h = 1e-5;
        for _ in 0..200 {
            let x = V::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let n = crate::gen::random_unit_vector::<f64>(&mut rng);
            let mut div = 0.0;
            for axis in 0..3 {
                let mut step = V::zero();
                let e = match axis {
                    0 => V::new(h, 0.0, 0.0),
                    1 => V::new(0.0, h, 0.0),
                    _ => V::new(0.0, 0.0, h),
                };
                step += e;
                let plus = field_f(x + step, n)[axis];
                let minus = field_f(x - step, n)[axis];
                div += (plus - minus) / (2.0 * h);
            }
            let t = x.dot(n);
            let expected = (8.0 * std::f64::consts::PI.powi(3)).powf(-0.5) * (-0.5 * t * t).exp();
            assert!(
                (div - expected).abs() < 1e-6,
                "divergence {div} vs {expected} at {x:?}"
            );
        }
    }

    #[test]
    fn slab_flux_matches_interval_probability() {
        // For a box with two faces perpendicular to n_d and the rest parallel
        // to it, the per-triangle maximum equals the exact flux, which equals
        // the 1D interval probability scaled by area/(2π).
        let (a, b, c) = (0.3, 1.1, 0.4);
        let slab = ConvexPolytope::cuboid(
            V::new(0.5 * (a + b), 0.0, 0.0),
            V::new(0.5 * (b - a), c, c),
        );
        let n_d = V::new(1.0, 0.0, 0.0);
        let expected = (2.0 * c).powi(2) * (phi(b) - phi(a)) / (2.0 * std::f64::consts::PI);
        let got = surface_integral_upper(&slab, n_d);
        assert!(
            (got - expected).abs() < 1e-12,
            "flux {got} vs analytic {expected}"
        );
    }

    #[test]
    fn far_slab_flux_vanishes() {
        let slab = ConvexPolytope::cuboid(V::new(8.5, 0.0, 0.0), V::new(0.5, 0.4, 0.4));
        let got = surface_integral_upper(&slab, V::new(1.0, 0.0, 0.0));
        assert!(got < 1e-10, "far-field flux should cancel, got {got}");
    }

    #[test]
    fn small_cube_flux_matches_density_times_volume() {
        let cube = ConvexPolytope::cuboid(V::zero(), V::splat(0.005));
        let expected = (8.0 * std::f64::consts::PI.powi(3)).powf(-0.5) * 0.01f64.powi(3);
        // Faces aligned with n_d: the vertex maximum is exact on every face,
        // so the sum matches density × volume to first order.
        let aligned = surface_integral_upper(&cube, V::new(1.0, 0.0, 0.0));
        assert!(
            (aligned - expected).abs() < 0.05 * expected,
            "flux {aligned} vs density*volume {expected}"
        );
        // Tilted n_d: every face picks its most favorable vertex, which adds
        // slack proportional to the flux itself. Still an upper bound, and
        // within a small constant factor for a cube.
        let tilted = surface_integral_upper(&cube, V::new(0.6, -0.48, 0.64).unit().unwrap());
        assert!(tilted >= expected * (1.0 - 1e-3), "not an upper bound: {tilted}");
        assert!(tilted <= 4.0 * expected, "unexpectedly loose: {tilted}");
    }

    #[test]
    fn degenerate_faces_are_skipped() {
        let clean = ConvexPolytope::cuboid(V::zero(), V::splat(0.3));
        let mut faces = clean.faces.clone();
        let mut vertices = clean.vertices.clone();
        // Append a zero-area sliver reusing one vertex three times.
        vertices.push(vertices[0]);
        let n = vertices.len() - 1;
        faces.push([n, n, n]);
        let dirty = ConvexPolytope::from_parts(vertices, faces).unwrap();
        let n_d = V::new(0.0, 0.0, 1.0);
        let a = surface_integral_upper(&clean, n_d);
        let b = surface_integral_upper(&dirty, n_d);
        assert!(a.is_finite() && (a - b).abs() < 1e-15);
    }

    #[test]
    fn far_cubes_have_negligible_bound() {
        // Gap of 0.5 between surfaces is 50 standard deviations.
        let a = cuboid_shape(V::zero(), V::splat(0.5));
        let b = cuboid_shape(V::new(1.5, 0.0, 0.0), V::splat(0.5));
        let error = GaussianError::isotropic(0.01).unwrap();
        let bound = convex_pcd(&a, &b, &error).unwrap();
        assert!(bound.probability_upper < 1e-12);
        assert_eq!(bound.method, BoundMethod::ConvexDivergence);
        // Whitened gap direction and magnitude: 0.5 / 0.01 = 50.
        assert!((bound.displacement_whitened.x - 50.0).abs() < 1e-3);
        assert!(bound.displacement_whitened.y.abs() < 1e-6);
    }

    #[test]
    fn mean_overlapping_cubes_are_certain() {
        let a = cuboid_shape(V::zero(), V::splat(0.5));
        let b = cuboid_shape(V::new(0.2, 0.1, 0.0), V::splat(0.5));
        let error = GaussianError::isotropic(0.01).unwrap();
        let bound = convex_pcd(&a, &b, &error).unwrap();
        assert_eq!(bound.probability_upper, 1.0);
        assert_eq!(bound.method, BoundMethod::Exact1);
    }

    #[test]
    fn small_cube_bound_dominates_analytic_probability() {
        // Axis-aligned cubes with diagonal covariance admit a closed-form
        // probability as a product of interval probabilities.
        let side = 0.02;
        let gap = 0.05;
        let sigma = 0.03;
        let a = cuboid_shape(V::zero(), V::splat(0.5 * side));
        let b_center = V::new(side + gap, 0.0, 0.0);
        let b = cuboid_shape(b_center, V::splat(0.5 * side));
        let error = GaussianError::isotropic(sigma).unwrap();
        // Sum region: x in [gap, gap + 2*side], y,z in [-side, side].
        let px = phi((gap + 2.0 * side) / sigma) - phi(gap / sigma);
        let pt = phi(side / sigma) - phi(-side / sigma);
        let exact = px * pt * pt;

        let aabb_a = ConvexShape::Aabb(Aabb::new(V::splat(-0.5 * side), V::splat(0.5 * side)));
        let aabb_b = ConvexShape::Aabb(Aabb::new(
            b_center - V::splat(0.5 * side),
            b_center + V::splat(0.5 * side),
        ));
        let obb_a = ConvexShape::Obb(
            OrientedBox::new(V::zero(), Mat3::identity(), V::splat(0.5 * side)).unwrap(),
        );
        let obb_b = ConvexShape::Obb(
            OrientedBox::new(b_center, Mat3::identity(), V::splat(0.5 * side)).unwrap(),
        );
        let corners_a: Vec<V> = ConvexPolytope::cuboid(V::zero(), V::splat(0.5 * side)).vertices;
        let corners_b: Vec<V> = ConvexPolytope::cuboid(b_center, V::splat(0.5 * side)).vertices;
        let kdop_a = ConvexShape::Kdop(Kdop26::from_points(&corners_a).unwrap());
        let kdop_b = ConvexShape::Kdop(Kdop26::from_points(&corners_b).unwrap());

        let mut per_form = Vec::new();
        for (name, sa, sb) in [
            ("hull", a.clone(), b.clone()),
            ("aabb", aabb_a, aabb_b),
            ("obb", obb_a, obb_b),
            ("kdop", kdop_a, kdop_b),
        ] {
            let bound = convex_pcd(&sa, &sb, &error).unwrap();
            assert!(
                bound.probability_upper >= exact - 1e-12,
                "{name} bound {} below exact {exact}",
                bound.probability_upper
            );
            assert!(
                bound.probability_upper <= 0.1,
                "{name} bound {} unexpectedly loose (exact {exact})",
                bound.probability_upper
            );
            per_form.push((name, bound.probability_upper));
        }
        // The same cubes reach the surface integral through four different
        // Minkowski-sum paths; all must land on the same region and bound.
        let reference = per_form[0].1;
        for &(name, value) in &per_form {
            assert!(
                (value - reference).abs() <= 1e-12 * reference,
                "{name} path {value} disagrees with hull path {reference}"
            );
        }
    }

    #[test]
    fn bound_is_monotone_in_separation() {
        let a = random_convex_polytope::<f64>(18, 0.02, 7).unwrap();
        let b0 = random_convex_polytope::<f64>(14, 0.02, 8).unwrap();
        let error = GaussianError::isotropic(0.03).unwrap();
        let mut prev = f64::INFINITY;
        for step in 0..10 {
            let offset = V::new(0.05 + 0.01 * step as f64, 0.0, 0.0);
            let b = ConvexShape::Hull(b0.translated(offset));
            let bound = convex_pcd(&ConvexShape::Hull(a.clone()), &b, &error).unwrap();
            assert!(
                bound.probability_upper <= prev * (1.0 + 1e-9) + 1e-12,
                "bound increased from {prev} to {} at step {step}",
                bound.probability_upper
            );
            prev = bound.probability_upper;
        }
    }

    #[test]
    fn bound_is_invariant_under_joint_rotation() {
        let a = random_convex_polytope::<f64>(16, 0.03, 21).unwrap();
        let b = random_convex_polytope::<f64>(12, 0.025, 22).unwrap().translated(V::new(
            0.09, 0.01, -0.02,
        ));
        let sigma = random_spd::<f64>(5, 0.0004, 0.0025);
        let mean = V::new(0.004, -0.011, 0.006);
        let error = GaussianError::new(mean, sigma).unwrap();
        let base = convex_pcd(
            &ConvexShape::Hull(a.clone()),
            &ConvexShape::Hull(b.clone()),
            &error,
        )
        .unwrap();

        let rot = random_rotation::<f64>(99);
        let rotate_poly = |p: &ConvexPolytope<f64>| {
            let pts: Vec<V> = p.vertices.iter().map(|&v| rot.mul_vec(v)).collect();
            convex_hull(&pts).unwrap()
        };
        let sigma_rot = rot.mat_mul(&sigma).mat_mul(&rot.transpose());
        let error_rot = GaussianError::new(rot.mul_vec(mean), sigma_rot).unwrap();
        let turned = convex_pcd(
            &ConvexShape::Hull(rotate_poly(&a)),
            &ConvexShape::Hull(rotate_poly(&b)),
            &error_rot,
        )
        .unwrap();

        let rel = (base.probability_upper - turned.probability_upper).abs()
            / base.probability_upper.max(1e-300);
        assert!(
            rel < 1e-9,
            "rotation changed bound: {} vs {} (rel {rel})",
            base.probability_upper,
            turned.probability_upper
        );
    }

    #[test]
    fn sphere_max_mode_inside_uses_peak_density() {
        let a = Sphere::new(V::zero(), 0.12);
        let b = Sphere::new(V::new(0.1, 0.0, 0.0), 0.08);
        let error = GaussianError::isotropic(1.0).unwrap();
        let bound = sphere_pcd_max(&a, &b, &error).unwrap();
        let r: f64 = 0.2;
        let m = V::new(-0.1, 0.0, 0.0);
        let peak = gaussian_pdf(m, m, &error.covariance()).unwrap();
        let expected = (4.0 / 3.0) * std::f64::consts::PI * r.powi(3) * peak;
        assert!((bound.probability_upper - expected).abs() < 1e-12);
        assert_eq!(bound.method, BoundMethod::SphereMax);
        assert!(bound.displacement_whitened.norm() < 1e-12);
    }

    #[test]
    fn sphere_max_isotropic_matches_radial_projection() {
        let a = Sphere::new(V::zero(), 0.1);
        let b = Sphere::new(V::new(0.3, 0.4, 0.0), 0.1);
        let error = GaussianError::isotropic(0.05).unwrap();
        let bound = sphere_pcd_max(&a, &b, &error).unwrap();
        // Isotropic covariance: the constrained maximizer is the radial
        // projection of the mean onto the sphere of radius r1 + r2.
        let m = V::new(-0.3, -0.4, 0.0);
        let x = m.unit().unwrap() * 0.2;
        let expected = (4.0 / 3.0) * std::f64::consts::PI * 0.2f64.powi(3)
            * gaussian_pdf(x, m, &error.covariance()).unwrap();
        let rel = (bound.probability_upper - expected).abs() / expected;
        assert!(rel < 1e-9, "bound {} vs {expected}", bound.probability_upper);
    }

    #[test]
    fn sphere_max_anisotropic_satisfies_first_order_conditions() {
        for seed in 0..20u64 {
            let sigma = random_spd::<f64>(seed, 0.0009, 0.01);
            let error = GaussianError::new(V::new(0.002, -0.003, 0.001), sigma).unwrap();
            let a = Sphere::new(V::zero(), 0.07);
            let b = Sphere::new(V::new(0.2, -0.1, 0.15), 0.06);
            let bound = sphere_pcd_max(&a, &b, &error).unwrap();
            let m = error.mean() + a.center - b.center;
            let r: f64 = 0.13;
            assert!(m.norm() > r, "test setup expects mode outside the ball");
            // Recover the maximizer from the whitened displacement.
            let sqrt_sigma = error.whitening().inverse().unwrap();
            let x = m + sqrt_sigma.mul_vec(bound.displacement_whitened);
            assert!((x.norm() - r).abs() < 1e-6 * r, "‖x‖ = {} vs r = {r}", x.norm());
            // Gradient of the exponent must be anti-parallel to x.
            let grad = sigma.inverse().unwrap().mul_vec(x - m);
            let cross = grad.cross(x).norm();
            assert!(
                cross < 1e-6 * grad.norm() * r,
                "first-order residual {cross} at seed {seed}"
            );
            assert!(grad.dot(x) < 0.0, "multiplier must be positive");
        }
    }

    #[test]
    fn sphere_center_concentric_matches_formula() {
        let a = Sphere::new(V::zero(), 0.6);
        let b = Sphere::new(V::zero(), 0.4);
        let error = GaussianError::isotropic(1.0).unwrap();
        let bound = sphere_pcd_center(&a, &b, &error).unwrap();
        let expected =
            (4.0 / 3.0) * std::f64::consts::PI * (2.0 * std::f64::consts::PI).powf(-1.5);
        assert!((bound.probability_upper - expected).abs() < 1e-12);
        assert_eq!(bound.method, BoundMethod::SphereCenter);
    }

    #[test]
    fn sphere_center_never_exceeds_sphere_max() {
        for seed in 0..20u64 {
            let sigma = random_spd::<f64>(seed + 100, 0.001, 0.02);
            let error = GaussianError::new(V::new(-0.01, 0.02, 0.005), sigma).unwrap();
            let a = Sphere::new(V::new(0.05, 0.0, 0.0), 0.06);
            let b = Sphere::new(V::new(-0.1, 0.12, -0.03), 0.05);
            let max = sphere_pcd_max(&a, &b, &error).unwrap().probability_upper;
            let center = sphere_pcd_center(&a, &b, &error).unwrap().probability_upper;
            // The ball center is a feasible point of the maximization.
            assert!(center <= max + 1e-12, "center {center} above max {max}");
        }
    }

    #[test]
    fn far_spheres_center_negligible() {
        let a = Sphere::new(V::zero(), 0.05);
        let b = Sphere::new(V::new(5.0, 0.0, 0.0), 0.05);
        let error = GaussianError::isotropic(0.05).unwrap();
        let bound = sphere_pcd_center(&a, &b, &error).unwrap();
        assert!(bound.probability_upper < 1e-300);
    }
}

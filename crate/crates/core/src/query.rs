//! Collision queries between positioned triangle meshes.
//!
//! Three layers share the same tree machinery: an exact boolean collision
//! test (triangle–triangle intersection under simultaneous axis-aligned tree
//! descent), a Monte Carlo estimator of collision probability under Gaussian
//! positional error on object A, and a guaranteed upper bound computed by
//! refining bounding-volume pairs until each pair's convex bound is
//! conclusive at the requested confidence.

use crate::bound::convex_pcd;
use crate::bvh::{build_bvh, BvType, BvhNode, BvhTree};
use crate::convex::{Aabb, ConvexShape};
use crate::error::{Error, Result};
use crate::gaussian::GaussianError;
use crate::mesh::TriMesh;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Leaf size for the internal axis-aligned trees behind exact collision and
/// distance queries.
const COLLISION_LEAF_CAPACITY: usize = 8;

/// Relative tolerance for triangle predicate degeneracy decisions.
const TRI_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Triangle primitives
// ---------------------------------------------------------------------------

/// Tests two triangles for intersection, counting touching contact.
///
/// Separating-plane intervals on the line of plane intersection, with a
/// two-dimensional overlap test for the coplanar case.
pub fn triangles_intersect<T: Real>(t1: [Vec3<T>; 3], t2: [Vec3<T>; 3]) -> bool {
    let n1 = (t1[1] - t1[0]).cross(t1[2] - t1[0]);
    let n2 = (t2[1] - t2[0]).cross(t2[2] - t2[0]);
    let scale = longest_edge(&t1).max(longest_edge(&t2));
    let eps1 = n1.norm() * scale * real(TRI_EPS);
    let eps2 = n2.norm() * scale * real(TRI_EPS);

    // Signed "distances" (scaled by the plane normal length) of each
    // triangle's vertices against the other triangle's plane.
    let d2 = [
        (t1[0] - t2[0]).dot(n2),
        (t1[1] - t2[0]).dot(n2),
        (t1[2] - t2[0]).dot(n2),
    ];
    if d2.iter().all(|&d| d > eps2) || d2.iter().all(|&d| d < -eps2) {
        return false;
    }
    let d1 = [
        (t2[0] - t1[0]).dot(n1),
        (t2[1] - t1[0]).dot(n1),
        (t2[2] - t1[0]).dot(n1),
    ];
    if d1.iter().all(|&d| d > eps1) || d1.iter().all(|&d| d < -eps1) {
        return false;
    }

    if d2.iter().all(|&d| d.abs() <= eps2) {
        return coplanar_overlap(&t1, &t2, n2, scale);
    }

    let dir = n1.cross(n2);
    if dir.norm_squared() <= (n1.norm() * n2.norm() * real(TRI_EPS)).powi(2) {
        // Nearly parallel but not rejected above: fall back to the planar
        // test, which is conservative for this borderline configuration.
        return coplanar_overlap(&t1, &t2, n2, scale);
    }

    let (pts1, n_pts1) = plane_crossings(&t1, &d2, eps2);
    let (pts2, n_pts2) = plane_crossings(&t2, &d1, eps1);
    if n_pts1 == 0 || n_pts2 == 0 {
        return false;
    }
    let span = |pts: &[Vec3<T>; 4], n: usize| {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for p in pts.iter().take(n) {
            let s = p.dot(dir);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (lo, hi)
    };
    let (lo1, hi1) = span(&pts1, n_pts1);
    let (lo2, hi2) = span(&pts2, n_pts2);
    let tol = dir.norm() * scale * real(TRI_EPS);
    lo1.max(lo2) <= hi1.min(hi2) + tol
}

fn longest_edge<T: Real>(t: &[Vec3<T>; 3]) -> T {
    (t[1] - t[0])
        .norm()
        .max((t[2] - t[1]).norm())
        .max((t[0] - t[2]).norm())
}

/// Points where a triangle meets a plane, given the vertices' signed
/// distances: on-plane vertices plus strict edge crossings (at most three).
fn plane_crossings<T: Real>(tri: &[Vec3<T>; 3], d: &[T; 3], eps: T) -> ([Vec3<T>; 4], usize) {
    let mut pts = [Vec3::zero(); 4];
    let mut n = 0;
    for i in 0..3 {
        if d[i].abs() <= eps {
            pts[n] = tri[i];
            n += 1;
        }
    }
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        if (d[i] > eps && d[j] < -eps) || (d[i] < -eps && d[j] > eps) {
            let t = d[i] / (d[i] - d[j]);
            pts[n] = tri[i] + (tri[j] - tri[i]) * t;
            n += 1;
        }
    }
    (pts, n)
}

/// Two-dimensional overlap test for coplanar triangles: vertex containment
/// either way, proper edge crossings, and collinear touching contact.
fn coplanar_overlap<T: Real>(t1: &[Vec3<T>; 3], t2: &[Vec3<T>; 3], n: Vec3<T>, scale: T) -> bool {
    let drop_axis = n.abs().argmax();
    let (u, v) = match drop_axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let project = |p: Vec3<T>| (p[u], p[v]);
    let a: [(T, T); 3] = [project(t1[0]), project(t1[1]), project(t1[2])];
    let b: [(T, T); 3] = [project(t2[0]), project(t2[1]), project(t2[2])];
    let eps_area = scale * scale * real(TRI_EPS);
    let eps_len = scale * real(TRI_EPS);

    for &p in &a {
        if point_in_triangle_2d(p, &b, eps_area) {
            return true;
        }
    }
    for &p in &b {
        if point_in_triangle_2d(p, &a, eps_area) {
            return true;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect_2d(
                a[i],
                a[(i + 1) % 3],
                b[j],
                b[(j + 1) % 3],
                eps_area,
                eps_len,
            ) {
                return true;
            }
        }
    }
    false
}

/// Twice the signed area of the 2D triangle a→b→c.
fn orient_2d<T: Real>(a: (T, T), b: (T, T), c: (T, T)) -> T {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn point_in_triangle_2d<T: Real>(p: (T, T), t: &[(T, T); 3], eps: T) -> bool {
    let s0 = orient_2d(t[0], t[1], p);
    let s1 = orient_2d(t[1], t[2], p);
    let s2 = orient_2d(t[2], t[0], p);
    (s0 >= -eps && s1 >= -eps && s2 >= -eps) || (s0 <= eps && s1 <= eps && s2 <= eps)
}

fn segments_intersect_2d<T: Real>(
    p1: (T, T),
    q1: (T, T),
    p2: (T, T),
    q2: (T, T),
    eps_area: T,
    eps_len: T,
) -> bool {
    let o1 = orient_2d(p1, q1, p2);
    let o2 = orient_2d(p1, q1, q2);
    let o3 = orient_2d(p2, q2, p1);
    let o4 = orient_2d(p2, q2, q1);
    let opposite = |x: T, y: T| (x > eps_area && y < -eps_area) || (x < -eps_area && y > eps_area);
    if opposite(o1, o2) && opposite(o3, o4) {
        return true;
    }
    let within = |a: (T, T), b: (T, T), p: (T, T)| {
        p.0 >= a.0.min(b.0) - eps_len
            && p.0 <= a.0.max(b.0) + eps_len
            && p.1 >= a.1.min(b.1) - eps_len
            && p.1 <= a.1.max(b.1) + eps_len
    };
    (o1.abs() <= eps_area && within(p1, q1, p2))
        || (o2.abs() <= eps_area && within(p1, q1, q2))
        || (o3.abs() <= eps_area && within(p2, q2, p1))
        || (o4.abs() <= eps_area && within(p2, q2, q1))
}

/// Closest point on a triangle to a query point (barycentric region walk).
pub fn closest_point_on_triangle<T: Real>(p: Vec3<T>, tri: [Vec3<T>; 3]) -> Vec3<T> {
    let [a, b, c] = tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= T::zero() && d2 <= T::zero() {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= T::zero() && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= T::zero() && d1 >= T::zero() && d3 <= T::zero() {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= T::zero() && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= T::zero() && d2 >= T::zero() && d6 <= T::zero() {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= T::zero() && d4 - d3 >= T::zero() && d5 - d6 >= T::zero() {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = T::one() / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Distance between two segments (closest-point parameters clamped to both).
fn segment_distance<T: Real>(p1: Vec3<T>, q1: Vec3<T>, p2: Vec3<T>, q2: Vec3<T>) -> T {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(r);
    let tiny = real::<T>(1e-300);
    let clamp01 = |x: T| x.max(T::zero()).min(T::one());
    let (s, t);
    if a <= tiny && e <= tiny {
        return r.norm();
    }
    if a <= tiny {
        s = T::zero();
        t = clamp01(f / e);
    } else {
        let c = d1.dot(r);
        if e <= tiny {
            t = T::zero();
            s = clamp01(-c / a);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let s0 = if denom > tiny {
                clamp01((b * f - c * e) / denom)
            } else {
                T::zero()
            };
            let t_nom = b * s0 + f;
            if t_nom < T::zero() {
                t = T::zero();
                s = clamp01(-c / a);
            } else if t_nom > e {
                t = T::one();
                s = clamp01((b - c) / a);
            } else {
                t = t_nom / e;
                s = s0;
            }
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Distance between two triangles; zero when they intersect.
pub fn triangle_distance<T: Real>(t1: [Vec3<T>; 3], t2: [Vec3<T>; 3]) -> T {
    if triangles_intersect(t1, t2) {
        return T::zero();
    }
    let mut best = T::infinity();
    for i in 0..3 {
        for j in 0..3 {
            best = best.min(segment_distance(
                t1[i],
                t1[(i + 1) % 3],
                t2[j],
                t2[(j + 1) % 3],
            ));
        }
    }
    for &p in &t1 {
        best = best.min((p - closest_point_on_triangle(p, t2)).norm());
    }
    for &q in &t2 {
        best = best.min((q - closest_point_on_triangle(q, t1)).norm());
    }
    best
}

// ---------------------------------------------------------------------------
// Exact collision and distance over axis-aligned trees
// ---------------------------------------------------------------------------

fn node_box<T: Real>(node: &BvhNode<T>) -> Result<&Aabb<T>> {
    match &node.bv {
        ConvexShape::Aabb(b) => Ok(b),
        _ => Err(Error::DegenerateInput(
            "collision descent requires trees built with axis-aligned bounding volumes",
        )),
    }
}

fn boxes_overlap<T: Real>(a: &Aabb<T>, offset_a: Vec3<T>, b: &Aabb<T>) -> bool {
    a.min.x + offset_a.x <= b.max.x
        && b.min.x <= a.max.x + offset_a.x
        && a.min.y + offset_a.y <= b.max.y
        && b.min.y <= a.max.y + offset_a.y
        && a.min.z + offset_a.z <= b.max.z
        && b.min.z <= a.max.z + offset_a.z
}

fn boxes_gap<T: Real>(a: &Aabb<T>, offset_a: Vec3<T>, b: &Aabb<T>) -> T {
    let axis_gap = |alo: T, ahi: T, blo: T, bhi: T| (blo - ahi).max(alo - bhi).max(T::zero());
    let gx = axis_gap(
        a.min.x + offset_a.x,
        a.max.x + offset_a.x,
        b.min.x,
        b.max.x,
    );
    let gy = axis_gap(
        a.min.y + offset_a.y,
        a.max.y + offset_a.y,
        b.min.y,
        b.max.y,
    );
    let gz = axis_gap(
        a.min.z + offset_a.z,
        a.max.z + offset_a.z,
        b.min.z,
        b.max.z,
    );
    (gx * gx + gy * gy + gz * gz).sqrt()
}

fn collide_nodes<T: Real>(
    tree_a: &BvhTree<T>,
    tree_b: &BvhTree<T>,
    offset_a: Vec3<T>,
    ia: usize,
    ib: usize,
) -> Result<bool> {
    let a = &tree_a.nodes[ia];
    let b = &tree_b.nodes[ib];
    if !boxes_overlap(node_box(a)?, offset_a, node_box(b)?) {
        return Ok(false);
    }
    match (a.children, b.children) {
        (None, None) => {
            for &i in &tree_a.triangle_order[a.start..a.end] {
                let [p0, p1, p2] = tree_a.mesh.triangle(i);
                let ta = [p0 + offset_a, p1 + offset_a, p2 + offset_a];
                for &j in &tree_b.triangle_order[b.start..b.end] {
                    if triangles_intersect(ta, tree_b.mesh.triangle(j)) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        (Some((l, r)), None) => Ok(collide_nodes(tree_a, tree_b, offset_a, l, ib)?
            || collide_nodes(tree_a, tree_b, offset_a, r, ib)?),
        (None, Some((l, r))) => Ok(collide_nodes(tree_a, tree_b, offset_a, ia, l)?
            || collide_nodes(tree_a, tree_b, offset_a, ia, r)?),
        (Some((al, ar)), Some((bl, br))) => {
            if a.volume >= b.volume {
                Ok(collide_nodes(tree_a, tree_b, offset_a, al, ib)?
                    || collide_nodes(tree_a, tree_b, offset_a, ar, ib)?)
            } else {
                Ok(collide_nodes(tree_a, tree_b, offset_a, ia, bl)?
                    || collide_nodes(tree_a, tree_b, offset_a, ia, br)?)
            }
        }
    }
}

/// Exact boolean collision between two positioned meshes (touching counts).
pub fn exact_collide<T: Real>(mesh_a: &TriMesh<T>, mesh_b: &TriMesh<T>) -> Result<bool> {
    let tree_a = build_bvh(mesh_a, BvType::Aabb, COLLISION_LEAF_CAPACITY)?;
    let tree_b = build_bvh(mesh_b, BvType::Aabb, COLLISION_LEAF_CAPACITY)?;
    collide_nodes(&tree_a, &tree_b, Vec3::zero(), 0, 0)
}

/// Exact collision with object A translated by `offset_a`; both trees must be
/// axis-aligned. Lets callers reuse trees across many displacements.
pub fn exact_collide_offset<T: Real>(
    tree_a: &BvhTree<T>,
    tree_b: &BvhTree<T>,
    offset_a: Vec3<T>,
) -> Result<bool> {
    collide_nodes(tree_a, tree_b, offset_a, 0, 0)
}

fn distance_nodes<T: Real>(
    tree_a: &BvhTree<T>,
    tree_b: &BvhTree<T>,
    offset_a: Vec3<T>,
    ia: usize,
    ib: usize,
    best: &mut T,
) -> Result<()> {
    let a = &tree_a.nodes[ia];
    let b = &tree_b.nodes[ib];
    if boxes_gap(node_box(a)?, offset_a, node_box(b)?) >= *best {
        return Ok(());
    }
    match (a.children, b.children) {
        (None, None) => {
            for &i in &tree_a.triangle_order[a.start..a.end] {
                let [p0, p1, p2] = tree_a.mesh.triangle(i);
                let ta = [p0 + offset_a, p1 + offset_a, p2 + offset_a];
                for &j in &tree_b.triangle_order[b.start..b.end] {
                    let d = triangle_distance(ta, tree_b.mesh.triangle(j));
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Ok(())
        }
        (Some((l, r)), None) => {
            visit_ordered(tree_a, tree_b, offset_a, [(l, ib), (r, ib)], best)
        }
        (None, Some((l, r))) => {
            visit_ordered(tree_a, tree_b, offset_a, [(ia, l), (ia, r)], best)
        }
        (Some((al, ar)), Some((bl, br))) => {
            if a.volume >= b.volume {
                visit_ordered(tree_a, tree_b, offset_a, [(al, ib), (ar, ib)], best)
            } else {
                visit_ordered(tree_a, tree_b, offset_a, [(ia, bl), (ia, br)], best)
            }
        }
    }
}

/// Visits the nearer child pair first so the running minimum prunes harder.
fn visit_ordered<T: Real>(
    tree_a: &BvhTree<T>,
    tree_b: &BvhTree<T>,
    offset_a: Vec3<T>,
    pairs: [(usize, usize); 2],
    best: &mut T,
) -> Result<()> {
    let gap = |&(ia, ib): &(usize, usize)| -> Result<T> {
        Ok(boxes_gap(
            node_box(&tree_a.nodes[ia])?,
            offset_a,
            node_box(&tree_b.nodes[ib])?,
        ))
    };
    let g0 = gap(&pairs[0])?;
    let g1 = gap(&pairs[1])?;
    let ordered = if g0 <= g1 {
        [pairs[0], pairs[1]]
    } else {
        [pairs[1], pairs[0]]
    };
    for (ia, ib) in ordered {
        distance_nodes(tree_a, tree_b, offset_a, ia, ib, best)?;
        if *best <= T::zero() {
            return Ok(());
        }
    }
    Ok(())
}

/// Minimum distance between the surfaces of two positioned meshes (zero when
/// they touch or cross).
pub fn mesh_distance<T: Real>(mesh_a: &TriMesh<T>, mesh_b: &TriMesh<T>) -> Result<T> {
    let tree_a = build_bvh(mesh_a, BvType::Aabb, COLLISION_LEAF_CAPACITY)?;
    let tree_b = build_bvh(mesh_b, BvType::Aabb, COLLISION_LEAF_CAPACITY)?;
    mesh_distance_offset(&tree_a, &tree_b, Vec3::zero())
}

/// Surface distance with object B translated by `offset_b`; both trees must
/// be axis-aligned. Lets separation searches reuse trees across candidates.
pub fn mesh_distance_offset<T: Real>(
    tree_a: &BvhTree<T>,
    tree_b: &BvhTree<T>,
    offset_b: Vec3<T>,
) -> Result<T> {
    let mut best = T::infinity();
    // Translating A by the negated offset yields the same relative placement.
    distance_nodes(tree_a, tree_b, -offset_b, 0, 0, &mut best)?;
    Ok(best.max(T::zero()))
}

// ---------------------------------------------------------------------------
// Monte Carlo estimation
// ---------------------------------------------------------------------------

/// A sampled collision probability with its binomial standard error.
#[derive(Clone, Copy, Debug)]
pub struct MonteCarloEstimate<T> {
    pub estimate: T,
    pub std_error: T,
}

/// Estimates the collision probability by sampling the positional error of
/// object A and running the exact collision test per sample.
///
/// Each sample draws from its own counter-indexed generator stream, so the
/// estimate depends only on `seed` and `n_samples`, not on evaluation order.
pub fn monte_carlo_probability<T: Real>(
    mesh_a: &TriMesh<T>,
    mesh_b: &TriMesh<T>,
    error: &GaussianError<T>,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<T>> {
    if n_samples < 100 {
        return Err(Error::DegenerateInput(
            "Monte Carlo estimation needs at least 100 samples",
        ));
    }
    let tree_a = build_bvh(mesh_a, BvType::Aabb, COLLISION_LEAF_CAPACITY)?;
    let tree_b = build_bvh(mesh_b, BvType::Aabb, COLLISION_LEAF_CAPACITY)?;
    let mean = error.mean();
    let chol = error.cholesky();
    let mut hits = 0usize;
    for i in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let z = standard_normal3(&mut rng);
        let offset = mean + chol.mul_vec(z);
        if collide_nodes(&tree_a, &tree_b, offset, 0, 0)? {
            hits += 1;
        }
    }
    let estimate = real::<T>(hits as f64 / n_samples as f64);
    let std_error = (estimate * (T::one() - estimate) / real(n_samples as f64)).sqrt();
    Ok(MonteCarloEstimate {
        estimate,
        std_error,
    })
}

/// Three standard normal deviates from two Box–Muller pairs.
fn standard_normal3<T: Real>(rng: &mut ChaCha8Rng) -> Vec3<T> {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let u3: f64 = 1.0 - rng.gen::<f64>();
    let u4: f64 = rng.gen();
    let r1 = (-2.0 * u1.ln()).sqrt();
    let r2 = (-2.0 * u3.ln()).sqrt();
    let tau = 2.0 * std::f64::consts::PI;
    Vec3::new(
        real(r1 * (tau * u2).cos()),
        real(r1 * (tau * u2).sin()),
        real(r2 * (tau * u4).cos()),
    )
}

// ---------------------------------------------------------------------------
// Probabilistic collision detection over tree pairs
// ---------------------------------------------------------------------------

/// A probabilistic collision query between two positioned trees.
///
/// The Gaussian error applies to object A's position; `confidence` sets how
/// certain a pairwise bound must be before traversal stops refining it: a
/// pair is conclusive once its bound falls below `1 - confidence`.
#[derive(Clone, Copy)]
pub struct PcdQuery<'a, T> {
    pub tree_a: &'a BvhTree<T>,
    pub tree_b: &'a BvhTree<T>,
    pub error: &'a GaussianError<T>,
    pub confidence: T,
}

/// Result of a probabilistic collision query.
#[derive(Clone, Copy, Debug)]
pub struct PcdResult<T> {
    /// Guaranteed upper bound on the collision probability.
    pub probability_upper: T,
    /// Bound computed at the root pair before any refinement.
    pub root_bound: T,
    /// Bounding-volume pairs evaluated (1 when the root is conclusive).
    pub nodes_visited: usize,
    /// Pairs evaluated with both sides at leaves.
    pub leaf_pairs_evaluated: usize,
    pub elapsed: Duration,
}

struct Traversal<'a, T: Real> {
    tree_a: &'a BvhTree<T>,
    tree_b: &'a BvhTree<T>,
    error: &'a GaussianError<T>,
    threshold: T,
    nodes_visited: usize,
    leaf_pairs_evaluated: usize,
    root_bound: Option<T>,
}

impl<T: Real> Traversal<'_, T> {
    fn visit(&mut self, ia: usize, ib: usize) -> Result<T> {
        let a = &self.tree_a.nodes[ia];
        let b = &self.tree_b.nodes[ib];
        self.nodes_visited += 1;
        let both_leaves = a.is_leaf() && b.is_leaf();
        if both_leaves {
            self.leaf_pairs_evaluated += 1;
        }
        let bound = convex_pcd(&a.bv, &b.bv, self.error)?;
        let p = bound.probability_upper;
        if self.root_bound.is_none() {
            self.root_bound = Some(p);
        }
        if p < self.threshold || both_leaves {
            return Ok(p);
        }
        // Refine the node with the larger volume (ties favor A); when only
        // one side can be refined, refine it.
        let descend_a = match (a.children, b.children) {
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(_), Some(_)) => a.volume >= b.volume,
            (None, None) => unreachable!("both-leaf pairs return above"),
        };
        let sum = if descend_a {
            let (l, r) = a.children.expect("descend target has children");
            self.visit(l, ib)? + self.visit(r, ib)?
        } else {
            let (l, r) = b.children.expect("descend target has children");
            self.visit(ia, l)? + self.visit(ia, r)?
        };
        Ok(sum.min(T::one()))
    }
}

/// Computes a guaranteed upper bound on the collision probability of two
/// positioned meshes by refining bounding-volume pairs.
///
/// Each pair gets the convex bound; pairs that are conclusive at the query's
/// confidence (or that cannot be refined further) contribute directly, and
/// inconclusive pairs are split on the larger node, summing the children's
/// bounds (clamped to one — a sum of upper bounds over a cover stays an
/// upper bound).
pub fn general_pcd<T: Real>(query: &PcdQuery<'_, T>) -> Result<PcdResult<T>> {
    if !(query.confidence > T::zero() && query.confidence < T::one()) {
        return Err(Error::DegenerateInput(
            "confidence must lie strictly between 0 and 1",
        ));
    }
    let start = Instant::now();
    let mut traversal = Traversal {
        tree_a: query.tree_a,
        tree_b: query.tree_b,
        error: query.error,
        threshold: T::one() - query.confidence,
        nodes_visited: 0,
        leaf_pairs_evaluated: 0,
        root_bound: None,
    };
    let probability_upper = traversal.visit(0, 0)?;
    Ok(PcdResult {
        probability_upper,
        root_bound: traversal.root_bound.unwrap_or(probability_upper),
        nodes_visited: traversal.nodes_visited,
        leaf_pairs_evaluated: traversal.leaf_pairs_evaluated,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erf::erf;
    use crate::gen::{box_mesh, icosphere, random_convex_polytope};
    use crate::mesh::TriMesh;

    type V = Vec3<f64>;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [V; 3] {
        [V::from_array(a), V::from_array(b), V::from_array(c)]
    }

    fn phi(x: f64) -> f64 {
        0.5 * (1.0 + erf(x * std::f64::consts::FRAC_1_SQRT_2))
    }

    fn polytope_mesh(n: usize, radius: f64, seed: u64, offset: V) -> TriMesh<f64> {
        let poly = random_convex_polytope::<f64>(n, radius, seed).unwrap();
        TriMesh::new(
            poly.vertices.iter().map(|&v| v + offset).collect(),
            poly.faces.clone(),
        )
        .unwrap()
    }

    #[test]
    fn crossing_triangles_intersect() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.2, 0.2, -0.5], [0.3, 0.2, 0.5], [0.2, 0.4, 0.5]);
        assert!(triangles_intersect(t1, t2));
        assert!(triangles_intersect(t2, t1));
    }

    #[test]
    fn offset_parallel_triangles_do_not_intersect() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.0, 0.0, 0.1], [1.0, 0.0, 0.1], [0.0, 1.0, 0.1]);
        assert!(!triangles_intersect(t1, t2));
    }

    #[test]
    fn plane_crossing_but_region_miss_does_not_intersect() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([5.0, 5.0, -0.5], [5.2, 5.0, 0.5], [5.0, 5.2, 0.5]);
        assert!(!triangles_intersect(t1, t2));
    }

    #[test]
    fn coplanar_overlapping_triangles_intersect() {
        let t1 = tri([0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [0.0, 2.0, 1.0]);
        let t2 = tri([0.5, 0.5, 1.0], [2.5, 0.5, 1.0], [0.5, 2.5, 1.0]);
        assert!(triangles_intersect(t1, t2));
        let contained = tri([0.2, 0.2, 1.0], [0.4, 0.2, 1.0], [0.2, 0.4, 1.0]);
        assert!(triangles_intersect(t1, contained));
    }

    #[test]
    fn coplanar_disjoint_triangles_do_not_intersect() {
        let t1 = tri([0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]);
        let t2 = tri([3.0, 3.0, 1.0], [4.0, 3.0, 1.0], [3.0, 4.0, 1.0]);
        assert!(!triangles_intersect(t1, t2));
    }

    #[test]
    fn touching_at_shared_vertex_counts_as_intersecting() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.0, 0.0, 0.0], [-1.0, 0.0, 0.5], [0.0, -1.0, 0.5]);
        assert!(triangles_intersect(t1, t2));
    }

    #[test]
    fn triangle_distance_of_parallel_triangles_is_plane_gap() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.1, 0.1, 0.25], [0.6, 0.1, 0.25], [0.1, 0.6, 0.25]);
        assert!((triangle_distance(t1, t2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn triangle_distance_vertex_to_face_case() {
        let t1 = tri([-1.0, -1.0, 0.0], [2.0, -1.0, 0.0], [0.0, 2.0, 0.0]);
        // Apex hovers over the interior of t1.
        let t2 = tri([0.1, 0.1, 0.5], [0.2, 3.0, 2.0], [3.0, 0.2, 2.0]);
        assert!((triangle_distance(t1, t2) - 0.5).abs() < 1e-12);
        assert!((triangle_distance(t2, t1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triangle_distance_skew_edge_edge_case() {
        // Closest approach between edge interiors of two skew triangles.
        let t1 = tri([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -2.0, -1.0]);
        let t2 = tri([0.0, -1.0, 0.3], [0.0, 1.0, 0.3], [2.0, 0.0, 1.3]);
        assert!((triangle_distance(t1, t2) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn intersecting_triangles_have_zero_distance() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.2, 0.2, -0.5], [0.3, 0.2, 0.5], [0.2, 0.4, 0.5]);
        assert_eq!(triangle_distance(t1, t2), 0.0);
    }

    #[test]
    fn exact_collide_matches_brute_force() {
        let mut hits = 0;
        let mut misses = 0;
        for seed in 0..100u64 {
            let shift = 0.5 + 1.8 * (seed as f64 / 99.0);
            let mesh_a = polytope_mesh(12, 1.0, 2 * seed + 1, V::zero());
            let mesh_b = polytope_mesh(12, 1.0, 2 * seed + 2, V::new(shift, 0.1, -0.05));
            let brute = (0..mesh_a.triangles.len()).any(|i| {
                (0..mesh_b.triangles.len())
                    .any(|j| triangles_intersect(mesh_a.triangle(i), mesh_b.triangle(j)))
            });
            let fast = exact_collide(&mesh_a, &mesh_b).unwrap();
            assert_eq!(fast, brute, "seed {seed}");
            assert_eq!(exact_collide(&mesh_b, &mesh_a).unwrap(), brute, "seed {seed} swapped");
            if brute {
                hits += 1;
            } else {
                misses += 1;
            }
        }
        assert!(hits > 10, "wanted a mix, got {hits} hits");
        assert!(misses > 10, "wanted a mix, got {misses} misses");
    }

    #[test]
    fn mesh_distance_of_separated_cubes_is_exact() {
        let a = box_mesh(V::zero(), V::splat(0.5));
        let b = box_mesh(V::new(1.01, 0.0, 0.0), V::splat(0.5));
        let d = mesh_distance(&a, &b).unwrap();
        assert!((d - 0.01).abs() < 1e-12, "distance {d}");
    }

    #[test]
    fn mesh_distance_of_crossing_cubes_is_zero() {
        let a = box_mesh(V::zero(), V::splat(0.5));
        let b = box_mesh(V::new(0.6, 0.0, 0.0), V::splat(0.5));
        assert_eq!(mesh_distance(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn mesh_distance_matches_brute_force() {
        for seed in 0..10u64 {
            let mesh_a = polytope_mesh(14, 1.0, 100 + seed, V::zero());
            let mesh_b = polytope_mesh(14, 1.0, 200 + seed, V::new(2.5, 0.3, -0.2));
            let mut brute = f64::INFINITY;
            for i in 0..mesh_a.triangles.len() {
                for j in 0..mesh_b.triangles.len() {
                    brute = brute.min(triangle_distance(mesh_a.triangle(i), mesh_b.triangle(j)));
                }
            }
            let fast = mesh_distance(&mesh_a, &mesh_b).unwrap();
            assert!((fast - brute).abs() < 1e-12, "seed {seed}: {fast} vs {brute}");
        }
    }

    #[test]
    fn mesh_distance_offset_tracks_translation() {
        let a = box_mesh(V::zero(), V::splat(0.5));
        let b = box_mesh(V::zero(), V::splat(0.5));
        let tree_a = build_bvh(&a, BvType::Aabb, 8).unwrap();
        let tree_b = build_bvh(&b, BvType::Aabb, 8).unwrap();
        for gap in [0.02, 0.4, 1.7] {
            let d = mesh_distance_offset(&tree_a, &tree_b, V::new(1.0 + gap, 0.0, 0.0)).unwrap();
            assert!((d - gap).abs() < 1e-12, "gap {gap} vs {d}");
        }
    }

    #[test]
    fn monte_carlo_needs_enough_samples() {
        let a = box_mesh(V::zero(), V::splat(0.5));
        let error = GaussianError::isotropic(0.1).unwrap();
        assert!(monte_carlo_probability(&a, &a, &error, 99, 1).is_err());
    }

    #[test]
    fn monte_carlo_matches_closed_form_for_cubes() {
        // Axis-aligned unit cubes with centers 1 + g apart along x collide
        // exactly when the error's x lies in [g, 2 + g] and |y|, |z| < 1,
        // so the probability is a product of interval probabilities.
        let g = 0.1;
        let sigma = 0.1;
        let a = box_mesh(V::splat(0.5), V::splat(0.5));
        let b = box_mesh(V::new(1.5 + g, 0.5, 0.5), V::splat(0.5));
        let error = GaussianError::isotropic(sigma).unwrap();
        let exact = (phi((2.0 + g) / sigma) - phi(g / sigma))
            * (phi(1.0 / sigma) - phi(-1.0 / sigma)).powi(2);
        let mc = monte_carlo_probability(&a, &b, &error, 4000, 7).unwrap();
        assert!(
            (mc.estimate - exact).abs() <= 3.0 * mc.std_error,
            "mc {} vs exact {exact} (se {})",
            mc.estimate,
            mc.std_error
        );
        assert!(mc.std_error > 0.0);
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let a = box_mesh(V::splat(0.5), V::splat(0.5));
        let b = box_mesh(V::new(1.6, 0.5, 0.5), V::splat(0.5));
        let error = GaussianError::isotropic(0.08).unwrap();
        let m1 = monte_carlo_probability(&a, &b, &error, 500, 42).unwrap();
        let m2 = monte_carlo_probability(&a, &b, &error, 500, 42).unwrap();
        assert_eq!(m1.estimate.to_bits(), m2.estimate.to_bits());
        let m3 = monte_carlo_probability(&a, &b, &error, 500, 43).unwrap();
        assert!(m1.estimate != m3.estimate || m1.std_error == m3.std_error);
    }

    #[test]
    fn general_pcd_bounds_monte_carlo_on_round_meshes() {
        let mesh_a = icosphere::<f64>(1);
        let mesh_b = icosphere::<f64>(1).translated(V::new(2.3, 0.0, 0.0));
        let error = GaussianError::isotropic(0.15).unwrap();
        let mc = monte_carlo_probability(&mesh_a, &mesh_b, &error, 2000, 11).unwrap();
        for bv_type in [BvType::Sphere, BvType::Aabb, BvType::Kdop26, BvType::Convex] {
            let tree_a = build_bvh(&mesh_a, bv_type, 8).unwrap();
            let tree_b = build_bvh(&mesh_b, bv_type, 8).unwrap();
            let query = PcdQuery {
                tree_a: &tree_a,
                tree_b: &tree_b,
                error: &error,
                confidence: 0.95,
            };
            let result = general_pcd(&query).unwrap();
            assert!(
                result.probability_upper >= mc.estimate - 3.0 * mc.std_error,
                "{bv_type}: bound {} vs mc {}",
                result.probability_upper,
                mc.estimate
            );
            assert!(result.probability_upper <= 1.0);
            assert!(result.nodes_visited >= 1);
            assert!(result.root_bound >= result.probability_upper - 1e-12 || result.root_bound <= 1.0);
        }
    }

    #[test]
    fn far_separation_resolves_at_the_root() {
        let mesh_a = icosphere::<f64>(1);
        // Gap of roughly 1.0 against sigma 0.01: one hundred deviations out.
        let mesh_b = icosphere::<f64>(1).translated(V::new(3.0, 0.0, 0.0));
        let error = GaussianError::isotropic(0.01).unwrap();
        let tree_a = build_bvh(&mesh_a, BvType::Kdop26, 4).unwrap();
        let tree_b = build_bvh(&mesh_b, BvType::Kdop26, 4).unwrap();
        let query = PcdQuery {
            tree_a: &tree_a,
            tree_b: &tree_b,
            error: &error,
            confidence: 0.99,
        };
        let result = general_pcd(&query).unwrap();
        assert_eq!(result.nodes_visited, 1);
        assert_eq!(result.leaf_pairs_evaluated, 0);
        assert!(result.probability_upper < 1e-9);
    }

    #[test]
    fn higher_confidence_never_visits_fewer_nodes() {
        let mesh_a = icosphere::<f64>(2);
        let mesh_b = icosphere::<f64>(2).translated(V::new(2.15, 0.0, 0.0));
        let error = GaussianError::isotropic(0.05).unwrap();
        let tree_a = build_bvh(&mesh_a, BvType::Kdop26, 8).unwrap();
        let tree_b = build_bvh(&mesh_b, BvType::Kdop26, 8).unwrap();
        let mut previous = 0usize;
        for confidence in [0.5, 0.9, 0.99, 0.999] {
            let query = PcdQuery {
                tree_a: &tree_a,
                tree_b: &tree_b,
                error: &error,
                confidence,
            };
            let result = general_pcd(&query).unwrap();
            assert!(
                result.nodes_visited >= previous,
                "confidence {confidence} visited {} after {previous}",
                result.nodes_visited
            );
            previous = result.nodes_visited;
        }
    }

    #[test]
    fn single_leaf_hull_trees_reduce_to_the_convex_bound() {
        let mesh_a = polytope_mesh(16, 1.0, 5, V::zero());
        let mesh_b = polytope_mesh(16, 1.0, 6, V::new(2.4, 0.0, 0.0));
        let error = GaussianError::isotropic(0.1).unwrap();
        let tree_a = build_bvh(&mesh_a, BvType::Convex, mesh_a.triangles.len()).unwrap();
        let tree_b = build_bvh(&mesh_b, BvType::Convex, mesh_b.triangles.len()).unwrap();
        assert_eq!(tree_a.nodes.len(), 1);
        let query = PcdQuery {
            tree_a: &tree_a,
            tree_b: &tree_b,
            error: &error,
            confidence: 0.99,
        };
        let result = general_pcd(&query).unwrap();
        let direct = convex_pcd(&tree_a.nodes[0].bv, &tree_b.nodes[0].bv, &error).unwrap();
        assert_eq!(result.probability_upper.to_bits(), direct.probability_upper.to_bits());
        assert_eq!(result.nodes_visited, 1);
        assert_eq!(result.leaf_pairs_evaluated, 1);
    }

    #[test]
    fn general_pcd_rejects_bad_confidence() {
        let mesh = box_mesh(V::zero(), V::splat(0.5));
        let tree = build_bvh(&mesh, BvType::Aabb, 4).unwrap();
        let error = GaussianError::isotropic(0.1).unwrap();
        for bad in [0.0, 1.0, -0.5, 1.5] {
            let query = PcdQuery {
                tree_a: &tree,
                tree_b: &tree,
                error: &error,
                confidence: bad,
            };
            assert!(general_pcd(&query).is_err(), "confidence {bad} accepted");
        }
    }
}

//! Convex hull of a 3-D point set (quickhull with validation and retry).
//!
//! The hull is grown apex by apex; every returned hull is checked to be a
//! closed convex 2-manifold that contains all input points within
//! `1e-9 * diameter`. If the first pass fails that check (possible on
//! adversarially collinear/coplanar subsets), the build is retried with a
//! deterministic sub-tolerance joggle of the inputs, so results stay
//! reproducible bit-for-bit across runs.

use std::collections::HashMap;

use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

use super::polytope::ConvexPolytope;

/// Relative plane-distance threshold for treating a point as outside a face.
const VISIBILITY_REL_EPS: f64 = 1e-10;
/// Relative thickness below which the input is rejected as lower-dimensional.
const FLATNESS_REL_EPS: f64 = 1e-9;
/// Relative tolerance within which every input point must end up inside.
const CONTAINMENT_REL_TOL: f64 = 1e-9;
/// Relative offset added along degenerate axes by [`convex_hull_inflated`].
const INFLATION_REL_EPS: f64 = 1e-7;
/// Joggle magnitudes (relative to diameter) tried when validation fails.
const JOGGLE_REL: [f64; 3] = [0.0, 3e-10, 7e-10];

/// Computes the convex hull of `points`.
///
/// Errors with [`Error::DegenerateInput`] when the points span fewer than
/// three dimensions (coincident, collinear, or coplanar within
/// `1e-9 * diameter`); see [`convex_hull_inflated`] for a fallback that
/// accepts such input.
pub fn convex_hull<T: Real>(points: &[Vec3<T>]) -> Result<ConvexPolytope<T>> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput("convex hull needs at least four points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput("convex hull input must be finite"));
    }
    let scale = bounds_diagonal(points);
    if !(scale > T::zero()) {
        return Err(Error::DegenerateInput("convex hull points are coincident"));
    }
    let mut last_err = Error::NonConvergence("convex hull failed on every attempt");
    for &joggle_rel in &JOGGLE_REL {
        let attempt = if joggle_rel == 0.0 {
            build_hull(points, scale)
        } else {
            let moved = joggled(points, scale * real::<T>(joggle_rel), joggle_rel.to_bits());
            build_hull(&moved, scale)
        };
        match attempt {
            Ok(hull) => match check_hull(&hull, points, scale) {
                Ok(()) => return Ok(hull),
                Err(e) => last_err = e,
            },
            // Lower-dimensional input: a sub-tolerance joggle cannot honestly
            // fix that, so report it to the caller immediately.
            Err(e @ Error::DegenerateInput(_)) => return Err(e),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Convex hull that tolerates flat, collinear, or tiny inputs by padding
/// them with `1e-7 * diameter` offsets along the degenerate principal axes
/// before hulling. The result strictly contains all input points, so it is
/// safe wherever a conservative enclosure is required.
pub fn convex_hull_inflated<T: Real>(points: &[Vec3<T>]) -> Result<ConvexPolytope<T>> {
    match convex_hull(points) {
        Err(Error::DegenerateInput(_)) => {}
        other => return other,
    }
    if points.is_empty() {
        return Err(Error::DegenerateInput("cannot inflate an empty point set"));
    }
    let scale = bounds_diagonal(points);
    if !(scale > T::zero()) {
        return Err(Error::DegenerateInput("cannot inflate coincident points"));
    }
    let n = real::<T>(points.len() as f64);
    let mut centroid = Vec3::zero();
    for &p in points {
        centroid += p;
    }
    centroid = centroid / n;
    let mut cov: crate::mat3::Mat3<T> = crate::mat3::Mat3::zero();
    for &p in points {
        let d = p - centroid;
        for i in 0..3 {
            for j in 0..3 {
                cov.m[i][j] += d[i] * d[j] / n;
            }
        }
    }
    let (eigenvalues, eigenvectors) = cov.symmetric_eigen();
    let eps = real::<T>(INFLATION_REL_EPS) * scale;
    let mut augmented = points.to_vec();
    for axis in 0..3 {
        let spread = eigenvalues[axis].max(T::zero()).sqrt();
        if spread <= eps {
            let u = eigenvectors.column(axis);
            for &p in points {
                augmented.push(p + u * eps);
                augmented.push(p - u * eps);
            }
        }
    }
    convex_hull(&augmented)
}

fn bounds_diagonal<T: Real>(points: &[Vec3<T>]) -> T {
    let mut lo = points[0];
    let mut hi = points[0];
    for &p in &points[1..] {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (hi - lo).norm()
}

/// Deterministic pseudo-random displacement of every point by at most
/// `magnitude` per axis, keyed on point index and `salt`.
fn joggled<T: Real>(points: &[Vec3<T>], magnitude: T, salt: u64) -> Vec<Vec3<T>> {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let noise = |k: u64| -> T {
                let h = splitmix64(salt ^ ((i as u64) * 3 + k));
                real::<T>(((h >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0)
            };
            p + Vec3::new(noise(0), noise(1), noise(2)) * magnitude
        })
        .collect()
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_hull<T: Real>(hull: &ConvexPolytope<T>, original: &[Vec3<T>], scale: T) -> Result<()> {
    hull.validate()?;
    let tol = real::<T>(CONTAINMENT_REL_TOL) * scale;
    for &p in original {
        if !hull.contains_point(p, tol) {
            return Err(Error::NonConvergence("convex hull missed an input point"));
        }
    }
    Ok(())
}

struct Face<T> {
    v: [u32; 3],
    normal: Vec3<T>,
    offset: T,
    outside: Vec<u32>,
    far: u32,
    far_dist: T,
    alive: bool,
    queued_round: u32,
    visible_round: u32,
}

impl<T: Real> Face<T> {
    fn distance(&self, p: Vec3<T>) -> T {
        self.normal.dot(p) - self.offset
    }

    fn recompute_far(&mut self, points: &[Vec3<T>]) {
        self.far_dist = T::neg_infinity();
        for &q in &self.outside {
            let d = self.distance(points[q as usize]);
            if d > self.far_dist {
                self.far_dist = d;
                self.far = q;
            }
        }
    }
}

/// Plane of the triangle `(a, b, c)`, or `None` when the triangle is
/// (near-)degenerate or its winding normal does not point away from
/// `interior`.
fn face_plane<T: Real>(
    points: &[Vec3<T>],
    a: u32,
    b: u32,
    c: u32,
    interior: Vec3<T>,
    scale: T,
) -> Option<(Vec3<T>, T)> {
    let (pa, pb, pc) = (points[a as usize], points[b as usize], points[c as usize]);
    let ab = pb - pa;
    let ac = pc - pa;
    let cross = ab.cross(ac);
    // Degeneracy is judged by the relative sine of the corner angle, so
    // tiny-but-well-shaped faces (for example on inflated flat inputs) are
    // kept while truly collinear triples are rejected.
    let denom = ab.norm() * ac.norm();
    if !(denom > T::zero()) || cross.norm() <= real::<T>(1e-12) * denom {
        return None;
    }
    let normal = cross.unit()?;
    let offset = normal.dot(pa);
    if normal.dot(interior) - offset >= real::<T>(-1e-12) * scale {
        return None;
    }
    Some((normal, offset))
}

fn build_hull<T: Real>(points: &[Vec3<T>], scale: T) -> Result<ConvexPolytope<T>> {
    let eps_vis = real::<T>(VISIBILITY_REL_EPS) * scale;
    let [i0, i1, i2, i3] = initial_simplex(points, scale)?;
    let interior = (points[i0 as usize]
        + points[i1 as usize]
        + points[i2 as usize]
        + points[i3 as usize])
        / real::<T>(4.0);

    let mut faces: Vec<Face<T>> = Vec::new();
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    for &[a, b, c] in &[[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        // The initial winding is arbitrary, so try both orders.
        let (v, normal, offset) = match face_plane(points, a, b, c, interior, scale) {
            Some((n, d)) => ([a, b, c], n, d),
            None => match face_plane(points, a, c, b, interior, scale) {
                Some((n, d)) => ([a, c, b], n, d),
                None => return Err(Error::DegenerateInput("initial hull simplex is flat")),
            },
        };
        let id = faces.len() as u32;
        for k in 0..3 {
            if edges.insert((v[k], v[(k + 1) % 3]), id).is_some() {
                return Err(Error::NonConvergence("hull seed topology collapsed"));
            }
        }
        faces.push(Face {
            v,
            normal,
            offset,
            outside: Vec::new(),
            far: 0,
            far_dist: T::neg_infinity(),
            alive: true,
            queued_round: 0,
            visible_round: 0,
        });
    }

    let mut pending: Vec<u32> = Vec::new();
    for idx in 0..points.len() as u32 {
        let p = points[idx as usize];
        for f in 0..faces.len() {
            let d = faces[f].distance(p);
            if d > eps_vis {
                if d > faces[f].far_dist {
                    faces[f].far_dist = d;
                    faces[f].far = idx;
                }
                faces[f].outside.push(idx);
                break;
            }
        }
    }
    for f in 0..faces.len() as u32 {
        if !faces[f as usize].outside.is_empty() {
            pending.push(f);
        }
    }

    let mut round: u32 = 0;
    let mut guard = 64 + 16 * points.len();
    let mut bfs: Vec<u32> = Vec::new();
    let mut visible: Vec<u32> = Vec::new();
    let mut horizon: Vec<(u32, u32)> = Vec::new();
    let mut cone_planes: Vec<(Vec3<T>, T)> = Vec::new();
    let mut orphans: Vec<u32> = Vec::new();

    while let Some(fid) = pending.pop() {
        if guard == 0 {
            return Err(Error::NonConvergence("convex hull iteration guard tripped"));
        }
        guard -= 1;
        if !faces[fid as usize].alive || faces[fid as usize].outside.is_empty() {
            continue;
        }
        let apex = faces[fid as usize].far;
        let apex_p = points[apex as usize];

        // Flood-fill the faces visible from the apex.
        round += 1;
        bfs.clear();
        visible.clear();
        bfs.push(fid);
        faces[fid as usize].queued_round = round;
        while let Some(g) = bfs.pop() {
            if faces[g as usize].distance(apex_p) <= eps_vis {
                continue;
            }
            faces[g as usize].visible_round = round;
            visible.push(g);
            let v = faces[g as usize].v;
            for k in 0..3 {
                let twin = (v[(k + 1) % 3], v[k]);
                let h = *edges
                    .get(&twin)
                    .ok_or(Error::NonConvergence("hull surface lost an edge twin"))?;
                if faces[h as usize].queued_round != round {
                    faces[h as usize].queued_round = round;
                    bfs.push(h);
                }
            }
        }

        horizon.clear();
        for &g in &visible {
            let v = faces[g as usize].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let h = *edges
                    .get(&(b, a))
                    .ok_or(Error::NonConvergence("hull surface lost an edge twin"))?;
                if faces[h as usize].visible_round != round {
                    horizon.push((a, b));
                }
            }
        }

        // Validate the prospective cone before mutating anything. A cone face
        // degenerates when the apex is collinear with a horizon edge; in that
        // case the apex is skipped (final validation catches any fallout).
        cone_planes.clear();
        let mut cone_ok = true;
        for &(a, b) in &horizon {
            match face_plane(points, a, b, apex, interior, scale) {
                Some(plane) => cone_planes.push(plane),
                None => {
                    cone_ok = false;
                    break;
                }
            }
        }
        if !cone_ok || horizon.is_empty() {
            let face = &mut faces[fid as usize];
            if let Some(pos) = face.outside.iter().position(|&q| q == apex) {
                face.outside.swap_remove(pos);
            }
            face.recompute_far(points);
            if !face.outside.is_empty() {
                pending.push(fid);
            }
            continue;
        }

        orphans.clear();
        for &g in &visible {
            let face = &mut faces[g as usize];
            face.alive = false;
            orphans.extend(face.outside.drain(..).filter(|&q| q != apex));
            for k in 0..3 {
                let e = (face.v[k], face.v[(k + 1) % 3]);
                if edges.remove(&e) != Some(g) {
                    return Err(Error::NonConvergence("hull surface lost an edge twin"));
                }
            }
        }

        let first_new = faces.len() as u32;
        for (&(a, b), &(normal, offset)) in horizon.iter().zip(&cone_planes) {
            let id = faces.len() as u32;
            for &e in &[(a, b), (b, apex), (apex, a)] {
                if edges.insert(e, id).is_some() {
                    return Err(Error::NonConvergence("hull cone topology collapsed"));
                }
            }
            faces.push(Face {
                v: [a, b, apex],
                normal,
                offset,
                outside: Vec::new(),
                far: 0,
                far_dist: T::neg_infinity(),
                alive: true,
                queued_round: 0,
                visible_round: 0,
            });
        }
        for &q in &orphans {
            let p = points[q as usize];
            for id in first_new..faces.len() as u32 {
                let face = &mut faces[id as usize];
                let d = face.distance(p);
                if d > eps_vis {
                    if d > face.far_dist {
                        face.far_dist = d;
                        face.far = q;
                    }
                    face.outside.push(q);
                    break;
                }
            }
        }
        for id in first_new..faces.len() as u32 {
            if !faces[id as usize].outside.is_empty() {
                pending.push(id);
            }
        }
    }

    // Compact to the surviving faces, remapping vertices in first-use order.
    let mut remap: HashMap<u32, usize> = HashMap::new();
    let mut vertices: Vec<Vec3<T>> = Vec::new();
    let mut out_faces: Vec<[usize; 3]> = Vec::new();
    for face in faces.iter().filter(|f| f.alive) {
        let mut tri = [0usize; 3];
        for (slot, &vid) in tri.iter_mut().zip(&face.v) {
            *slot = *remap.entry(vid).or_insert_with(|| {
                vertices.push(points[vid as usize]);
                vertices.len() - 1
            });
        }
        out_faces.push(tri);
    }
    ConvexPolytope::from_parts(vertices, out_faces)
}

/// Four affinely independent points spanning the input, or a
/// [`Error::DegenerateInput`] describing the dimensional deficiency.
fn initial_simplex<T: Real>(points: &[Vec3<T>], scale: T) -> Result<[u32; 4]> {
    let flat = real::<T>(FLATNESS_REL_EPS) * scale;
    let mut i0 = 0usize;
    for (i, p) in points.iter().enumerate() {
        let q = points[i0];
        if (p.x, p.y, p.z) < (q.x, q.y, q.z) {
            i0 = i;
        }
    }
    let p0 = points[i0];

    let mut i1 = i0;
    let mut best = T::zero();
    for (i, p) in points.iter().enumerate() {
        let d = (*p - p0).norm_squared();
        if d > best {
            best = d;
            i1 = i;
        }
    }
    if !(best > T::zero()) {
        return Err(Error::DegenerateInput("convex hull points are coincident"));
    }
    let axis = points[i1] - p0;

    let mut i2 = i0;
    let mut best = flat * flat * axis.norm_squared();
    for (i, p) in points.iter().enumerate() {
        let d = axis.cross(*p - p0).norm_squared();
        if d > best {
            best = d;
            i2 = i;
        }
    }
    if i2 == i0 {
        return Err(Error::DegenerateInput("convex hull points are collinear"));
    }
    let normal = axis
        .cross(points[i2] - p0)
        .unit()
        .ok_or(Error::DegenerateInput("convex hull points are collinear"))?;

    let mut i3 = i0;
    let mut best = flat;
    for (i, p) in points.iter().enumerate() {
        let d = normal.dot(*p - p0).abs();
        if d > best {
            best = d;
            i3 = i;
        }
    }
    if i3 == i0 {
        return Err(Error::DegenerateInput("convex hull points are coplanar"));
    }
    Ok([i0 as u32, i1 as u32, i2 as u32, i3 as u32])
}

//! GJK distance query between convex shapes given by support maps.
//!
//! Works on the configuration-space obstacle `{ b - a : a in A, b in B }`:
//! the returned displacement is the point of that set closest to the origin,
//! so its norm is the distance between the shapes and its direction is the
//! separating direction. Termination uses a relative duality-gap test, so
//! distances are accurate to about one part in a billion.

use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

use super::Support;

/// Hard iteration cap; queries that somehow exceed it report
/// [`Error::NonConvergence`] (treated as an intersection by callers that
/// need a conservative answer).
pub const GJK_MAX_ITERATIONS: usize = 128;

/// Relative duality-gap threshold for accepting the current witness point.
const REL_GAP: f64 = 1e-9;
/// Relative threshold under which the witness is considered to be the origin.
const ZERO_REL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GjkResult<T> {
    /// Euclidean distance between the shapes (zero when intersecting).
    pub distance: T,
    /// Closest point of `{ b - a }` to the origin (zero when intersecting).
    pub displacement: Vec3<T>,
    pub intersecting: bool,
}

impl<T: Real> GjkResult<T> {
    fn intersecting() -> Self {
        Self {
            distance: T::zero(),
            displacement: Vec3::zero(),
            intersecting: true,
        }
    }

    fn separated(v: Vec3<T>) -> Self {
        Self {
            distance: v.norm(),
            displacement: v,
            intersecting: false,
        }
    }
}

/// Distance and separating displacement between two convex shapes.
pub fn gjk_distance<T, A, B>(a: &A, b: &B) -> Result<GjkResult<T>>
where
    T: Real,
    A: Support<T> + ?Sized,
    B: Support<T> + ?Sized,
{
    let cso = |d: Vec3<T>| b.support_point(d) - a.support_point(-d);

    let mut simplex = Simplex::new();
    let mut v = cso(Vec3::new(T::one(), T::zero(), T::zero()));
    simplex.push(v);
    let mut scale = v.norm().max(T::one());
    let mut stall_count = 0u32;

    for _ in 0..GJK_MAX_ITERATIONS {
        let dist2 = v.norm_squared();
        let zero_eps = real::<T>(ZERO_REL_EPS) * scale;
        if dist2 <= zero_eps * zero_eps {
            return Ok(GjkResult::intersecting());
        }
        let w = cso(-v);
        scale = scale.max(w.norm());
        // Duality gap: |v|^2 - v . w bounds |v| - distance from above.
        if dist2 - v.dot(w) <= real::<T>(REL_GAP) * dist2 {
            return Ok(GjkResult::separated(v));
        }
        // A repeated support point cannot improve the witness.
        if simplex.contains(w) {
            return Ok(GjkResult::separated(v));
        }
        simplex.push(w);
        let (nv, inside) = simplex.reduce_to_closest();
        if inside {
            return Ok(GjkResult::intersecting());
        }
        let new_dist2 = nv.norm_squared();
        if new_dist2 >= dist2 * (T::one() - real::<T>(1e-13)) {
            stall_count += 1;
            if stall_count >= 2 {
                return Ok(GjkResult::separated(if new_dist2 < dist2 { nv } else { v }));
            }
        } else {
            stall_count = 0;
        }
        v = nv;
    }
    Err(Error::NonConvergence("distance query exceeded its iteration cap"))
}

struct Simplex<T> {
    points: [Vec3<T>; 4],
    len: usize,
}

impl<T: Real> Simplex<T> {
    fn new() -> Self {
        Self {
            points: [Vec3::zero(); 4],
            len: 0,
        }
    }

    fn push(&mut self, p: Vec3<T>) {
        debug_assert!(self.len < 4);
        // Newest point first: the closest-feature tests below examine the
        // most recent vertex in their earliest (cheapest) regions.
        for i in (1..=self.len).rev() {
            self.points[i] = self.points[i - 1];
        }
        self.points[0] = p;
        self.len += 1;
    }

    fn contains(&self, p: Vec3<T>) -> bool {
        self.points[..self.len].contains(&p)
    }

    fn set(&mut self, pts: &[Vec3<T>]) {
        self.len = pts.len();
        self.points[..self.len].copy_from_slice(pts);
    }

    /// Replaces the simplex by the feature supporting the point closest to
    /// the origin and returns that point; the flag is true when the origin
    /// is inside a (non-degenerate) tetrahedron.
    fn reduce_to_closest(&mut self) -> (Vec3<T>, bool) {
        match self.len {
            1 => (self.points[0], false),
            2 => {
                let (v, kept) = closest_on_segment(self.points[0], self.points[1]);
                self.apply(kept, v);
                (v, false)
            }
            3 => {
                let (v, kept) = closest_on_triangle(self.points[0], self.points[1], self.points[2]);
                self.apply(kept, v);
                (v, false)
            }
            4 => self.reduce_tetrahedron(),
            _ => unreachable!("simplex is always 1..=4 points"),
        }
    }

    fn apply(&mut self, kept: Kept<T>, _v: Vec3<T>) {
        match kept {
            Kept::One(a) => self.set(&[a]),
            Kept::Two(a, b) => self.set(&[a, b]),
            Kept::Three(a, b, c) => self.set(&[a, b, c]),
        }
    }

    fn reduce_tetrahedron(&mut self) -> (Vec3<T>, bool) {
        let p = self.points;
        // Faces listed with their opposite vertex.
        const FACES: [(usize, usize, usize, usize); 4] =
            [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 3, 1), (1, 2, 3, 0)];
        let mut any_outside = false;
        let mut degenerate = false;
        let mut outside = [false; 4];
        for (slot, &(i, j, k, o)) in outside.iter_mut().zip(&FACES) {
            let n = (p[j] - p[i]).cross(p[k] - p[i]);
            let side_opp = n.dot(p[o] - p[i]);
            let side_origin = -n.dot(p[i]);
            if side_opp == T::zero() || n.norm_squared() == T::zero() {
                degenerate = true;
                *slot = true; // treat as a candidate face
            } else if side_opp * side_origin < T::zero() {
                *slot = true;
                any_outside = true;
            }
        }
        if !any_outside && !degenerate {
            return (Vec3::zero(), true);
        }
        let mut best: Option<(T, Vec3<T>, Kept<T>)> = None;
        for (idx, &(i, j, k, _)) in FACES.iter().enumerate() {
            if !outside[idx] {
                continue;
            }
            let (v, kept) = closest_on_triangle(p[i], p[j], p[k]);
            let d = v.norm_squared();
            if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                best = Some((d, v, kept));
            }
        }
        let (_, v, kept) = best.expect("at least one candidate face");
        self.apply(kept, v);
        (v, false)
    }
}

enum Kept<T> {
    One(Vec3<T>),
    Two(Vec3<T>, Vec3<T>),
    Three(Vec3<T>, Vec3<T>, Vec3<T>),
}

fn closest_on_segment<T: Real>(a: Vec3<T>, b: Vec3<T>) -> (Vec3<T>, Kept<T>) {
    let ab = b - a;
    let denom = ab.norm_squared();
    if denom == T::zero() {
        return (a, Kept::One(a));
    }
    let t = -a.dot(ab) / denom;
    if t <= T::zero() {
        (a, Kept::One(a))
    } else if t >= T::one() {
        (b, Kept::One(b))
    } else {
        (a + ab * t, Kept::Two(a, b))
    }
}

/// Closest point of triangle `(a, b, c)` to the origin, with the supporting
/// vertex/edge/face feature.
fn closest_on_triangle<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> (Vec3<T>, Kept<T>) {
    let ab = b - a;
    let ac = c - a;
    let ap = -a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= T::zero() && d2 <= T::zero() {
        return (a, Kept::One(a));
    }
    let bp = -b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= T::zero() && d4 <= d3 {
        return (b, Kept::One(b));
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= T::zero() && d1 >= T::zero() && d3 <= T::zero() {
        let denom = d1 - d3;
        if denom > T::zero() {
            let t = d1 / denom;
            return (a + ab * t, Kept::Two(a, b));
        }
        return (a, Kept::One(a));
    }
    let cp = -c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= T::zero() && d5 <= d6 {
        return (c, Kept::One(c));
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= T::zero() && d2 >= T::zero() && d6 <= T::zero() {
        let denom = d2 - d6;
        if denom > T::zero() {
            let t = d2 / denom;
            return (a + ac * t, Kept::Two(a, c));
        }
        return (a, Kept::One(a));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= T::zero() && d4 - d3 >= T::zero() && d5 - d6 >= T::zero() {
        let denom = (d4 - d3) + (d5 - d6);
        if denom > T::zero() {
            let t = (d4 - d3) / denom;
            return (b + (c - b) * t, Kept::Two(b, c));
        }
        return (b, Kept::One(b));
    }
    let denom = va + vb + vc;
    if denom <= T::zero() {
        // Degenerate triangle: fall back to the best edge.
        let candidates = [
            closest_on_segment(a, b),
            closest_on_segment(a, c),
            closest_on_segment(b, c),
        ];
        return candidates
            .into_iter()
            .min_by(|(x, _), (y, _)| {
                x.norm_squared()
                    .partial_cmp(&y.norm_squared())
                    .expect("finite distances")
            })
            .expect("three candidates");
    }
    let inv = T::one() / denom;
    let v = vb * inv;
    let w = vc * inv;
    (a + ab * v + ac * w, Kept::Three(a, b, c))
}

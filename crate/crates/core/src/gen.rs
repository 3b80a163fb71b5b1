//! Procedural generators for meshes and random shapes used by the library
//! tests and the benchmark tool.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::{convex_hull, ConvexPolytope};
use crate::mat3::Mat3;
use crate::mesh::TriMesh;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::Result;

/// Unit sphere triangulation: an icosahedron subdivided `subdivisions`
/// times, with every vertex projected back onto the unit sphere. Faces are
/// wound outward. Vertex count is `10 * 4^s + 2`, face count `20 * 4^s`.
pub fn icosphere<T: Real>(subdivisions: u32) -> TriMesh<T> {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut vertices: Vec<Vec3<T>> = raw
        .iter()
        .map(|&[x, y, z]| {
            Vec3::new(real::<T>(x), real::<T>(y), real::<T>(z))
                .unit()
                .expect("icosahedron vertex is nonzero")
        })
        .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let mut mid = |i: usize, j: usize, vertices: &mut Vec<Vec3<T>>| -> usize {
                let key = (i.min(j), i.max(j));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = ((vertices[i] + vertices[j]) * real::<T>(0.5))
                        .unit()
                        .expect("sphere midpoint is nonzero");
                    vertices.push(m);
                    vertices.len() - 1
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }
    TriMesh::new(vertices, triangles).expect("icosphere construction is valid")
}

/// Non-convex closed test surface: an icosphere whose radius is modulated by
/// a deterministic sum of plane waves,
/// `r(v) = 1 + amplitude * mean_k sin(frequency * (v . d_k) + phase_k)`.
///
/// `amplitude` must stay below one so the surface remains star-shaped and
/// outward-wound. Larger `amplitude * frequency` products give deeper
/// concavities.
pub fn bumpy_sphere<T: Real>(
    subdivisions: u32,
    amplitude: f64,
    frequency: f64,
    seed: u64,
) -> TriMesh<T> {
    assert!(amplitude.abs() < 1.0, "amplitude must keep the radius positive");
    let base = icosphere::<T>(subdivisions);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(Vec3<T>, T)> = (0..4)
        .map(|_| {
            let d = random_unit_vector::<T>(&mut rng);
            let phase = real::<T>(rng.gen::<f64>() * std::f64::consts::TAU);
            (d, phase)
        })
        .collect();
    let amp = real::<T>(amplitude);
    let freq = real::<T>(frequency);
    let inv_k = T::one() / real::<T>(waves.len() as f64);
    let vertices = base
        .vertices
        .iter()
        .map(|&v| {
            let mut s = T::zero();
            for &(d, phase) in &waves {
                s += (freq * v.dot(d) + phase).sin();
            }
            v * (T::one() + amp * s * inv_k)
        })
        .collect();
    TriMesh::new(vertices, base.triangles).expect("bumpy sphere construction is valid")
}

/// Axis-aligned box surface with twelve outward-wound triangles.
pub fn box_mesh<T: Real>(center: Vec3<T>, half: Vec3<T>) -> TriMesh<T> {
    let poly = ConvexPolytope::cuboid(center, half);
    TriMesh::new(poly.vertices, poly.faces).expect("box mesh construction is valid")
}

/// Uniformly random unit vector.
pub fn random_unit_vector<T: Real>(rng: &mut ChaCha8Rng) -> Vec3<T> {
    loop {
        let (a, b) = crate::gaussian::standard_normal_pair(rng);
        let (c, _) = crate::gaussian::standard_normal_pair(rng);
        let v = Vec3::new(real::<T>(a), real::<T>(b), real::<T>(c));
        if let Some(u) = v.unit() {
            return u;
        }
    }
}

/// Convex polytope hulled from `n` random points at radii in
/// `[radius / 2, radius]` around the origin. Deterministic in `seed`.
pub fn random_convex_polytope<T: Real>(n: usize, radius: T, seed: u64) -> Result<ConvexPolytope<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec3<T>> = (0..n.max(4))
        .map(|_| {
            let u = random_unit_vector::<T>(&mut rng);
            let r = radius * real::<T>(0.5 + 0.5 * rng.gen::<f64>());
            u * r
        })
        .collect();
    convex_hull(&points)
}

/// Random symmetric positive-definite matrix with eigenvalues drawn
/// uniformly from `[min_eig, max_eig]`. Deterministic in `seed`.
pub fn random_spd<T: Real>(seed: u64, min_eig: f64, max_eig: f64) -> Mat3<T> {
    assert!(min_eig > 0.0 && max_eig >= min_eig);
    let rot = crate::gaussian::random_rotation::<T>(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
    let mut draw = || real::<T>(min_eig + (max_eig - min_eig) * rng.gen::<f64>());
    let d = Mat3::diagonal(Vec3::new(draw(), draw(), draw()));
    rot.mat_mul(&d).mat_mul(&rot.transpose())
}

//! Indexed triangle meshes and Wavefront OBJ I/O.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::isometry::Isometry;
use crate::mat3::Mat3;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use crate::{Error, Result};

/// Welding grid pitch: vertices closer than this snap to one index on load.
const WELD_EPS: f64 = 1e-9;

/// Indexed triangle mesh (positions + vertex-index triples).
#[derive(Debug, Clone)]
pub struct TriMesh<T> {
    pub vertices: Vec<Vec3<T>>,
    pub triangles: Vec<[usize; 3]>,
}

/// A parsed mesh plus load diagnostics.
#[derive(Debug)]
pub struct LoadedMesh<T> {
    pub mesh: TriMesh<T>,
    /// Degenerate (zero-area or repeated-index) faces dropped during load.
    pub dropped_faces: usize,
    /// Number of vertices merged by welding.
    pub welded_vertices: usize,
}

impl<T: Real> TriMesh<T> {
    pub fn new(vertices: Vec<Vec3<T>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for t in &triangles {
            for &i in t {
                if i >= vertices.len() {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("triangle index {i} out of range"),
                    });
                }
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn triangle(&self, i: usize) -> [Vec3<T>; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Axis-aligned bounds `(min, max)` over all vertices.
    pub fn bounds(&self) -> (Vec3<T>, Vec3<T>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for &v in &self.vertices[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Signed volume by the divergence theorem (tetrahedra against the
    /// origin); positive for a closed, outward-oriented surface.
    pub fn signed_volume(&self) -> T {
        let sixth = T::one() / real::<T>(6.0);
        let mut v = T::zero();
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle(t);
            v += a.dot(b.cross(c)) * sixth;
        }
        v
    }

    pub fn translated(&self, d: Vec3<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| v + d).collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn transformed(&self, iso: &Isometry<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| iso.apply(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Applies a pure rotation about the origin.
    pub fn rotated(&self, r: &Mat3<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| r.mul_vec(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Centers the axis-aligned bounds on the origin and scales so the
    /// longest bounds edge is exactly 1. Returns the scale factor applied.
    pub fn normalize_unit(&mut self) -> T {
        let (lo, hi) = self.bounds();
        let center = (lo + hi) * real::<T>(0.5);
        let extent = (hi - lo).max_component();
        let scale = if extent > T::zero() {
            T::one() / extent
        } else {
            T::one()
        };
        for v in &mut self.vertices {
            *v = (*v - center) * scale;
        }
        scale
    }

    /// Parses OBJ text: `v` positions and `f` faces (fan-triangulated when a
    /// face has more than three corners). Normals, texture coordinates, and
    /// grouping statements are ignored. Vertices are welded on a `1e-9` grid
    /// and degenerate faces dropped (counted in the result).
    pub fn from_obj_str(text: &str) -> Result<LoadedMesh<T>> {
        let mut raw_vertices: Vec<Vec3<T>> = Vec::new();
        let mut vertices: Vec<Vec3<T>> = Vec::new();
        let mut weld: BTreeMap<(i64, i64, i64), usize> = BTreeMap::new();
        let mut remap: Vec<usize> = Vec::new();
        let mut triangles: Vec<[usize; 3]> = Vec::new();
        let mut dropped = 0usize;
        let mut welded = 0usize;

        let parse_coord = |tok: &str, line: usize| -> Result<T> {
            tok.parse::<f64>()
                .map(real)
                .map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad coordinate {tok:?}"),
                })
        };

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut c = [T::zero(); 3];
                    for slot in &mut c {
                        let tok = it.next().ok_or(Error::Parse {
                            line: line_no,
                            msg: "vertex needs three coordinates".into(),
                        })?;
                        *slot = parse_coord(tok, line_no)?;
                    }
                    let v = Vec3::new(c[0], c[1], c[2]);
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "non-finite vertex coordinate".into(),
                        });
                    }
                    raw_vertices.push(v);
                    let key = weld_key(v);
                    let mapped = match weld.get(&key) {
                        Some(&j) => {
                            welded += 1;
                            j
                        }
                        None => {
                            let j = vertices.len();
                            weld.insert(key, j);
                            vertices.push(v);
                            j
                        }
                    };
                    remap.push(mapped);
                }
                Some("f") => {
                    let mut corners: Vec<usize> = Vec::new();
                    for tok in it {
                        // "i", "i/t", "i//n", "i/t/n"; negative means relative.
                        let first = tok.split('/').next().unwrap_or("");
                        let raw: i64 = first.parse().map_err(|_| Error::Parse {
                            line: line_no,
                            msg: format!("bad face index {tok:?}"),
                        })?;
                        let resolved = if raw > 0 {
                            (raw - 1) as usize
                        } else if raw < 0 {
                            let n = raw_vertices.len() as i64;
                            let k = n + raw;
                            if k < 0 {
                                return Err(Error::Parse {
                                    line: line_no,
                                    msg: format!("relative index {raw} out of range"),
                                });
                            }
                            k as usize
                        } else {
                            return Err(Error::Parse {
                                line: line_no,
                                msg: "face index 0 is invalid".into(),
                            });
                        };
                        if resolved >= raw_vertices.len() {
                            return Err(Error::Parse {
                                line: line_no,
                                msg: format!("face index {raw} out of range"),
                            });
                        }
                        corners.push(remap[resolved]);
                    }
                    if corners.len() < 3 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "face needs at least three corners".into(),
                        });
                    }
                    for k in 1..corners.len() - 1 {
                        let tri = [corners[0], corners[k], corners[k + 1]];
                        if is_degenerate(&vertices, tri) {
                            dropped += 1;
                        } else {
                            triangles.push(tri);
                        }
                    }
                }
                // Ignored statements commonly present in OBJ files.
                Some("vn") | Some("vt") | Some("vp") | Some("o") | Some("g") | Some("s")
                | Some("usemtl") | Some("mtllib") | Some("l") | Some("p") => {}
                Some(other) => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unsupported statement {other:?}"),
                    });
                }
                None => unreachable!("blank lines are skipped"),
            }
        }

        let mesh = TriMesh::new(vertices, triangles)?;
        Ok(LoadedMesh {
            mesh,
            dropped_faces: dropped,
            welded_vertices: welded,
        })
    }

    pub fn from_obj_file(path: &Path) -> Result<LoadedMesh<T>> {
        let text = fs::read_to_string(path)?;
        Self::from_obj_str(&text)
    }

    pub fn to_obj_string(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!(
                "v {} {} {}\n",
                v.x.to_f64().unwrap(),
                v.y.to_f64().unwrap(),
                v.z.to_f64().unwrap()
            ));
        }
        for t in &self.triangles {
            out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        out
    }

    pub fn write_obj_file(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_obj_string())?;
        Ok(())
    }
}

fn weld_key<T: Real>(v: Vec3<T>) -> (i64, i64, i64) {
    let q = |x: T| (x.to_f64().unwrap() / WELD_EPS).round() as i64;
    (q(v.x), q(v.y), q(v.z))
}

fn is_degenerate<T: Real>(vertices: &[Vec3<T>], tri: [usize; 3]) -> bool {
    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
        return true;
    }
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    let cross = (b - a).cross(c - a);
    let edge = (b - a)
        .norm_squared()
        .max((c - a).norm_squared())
        .max((c - b).norm_squared());
    // Area threshold relative to the squared longest edge.
    cross.norm() <= real::<T>(1e-12) * edge
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE_OBJ: &str = "\
# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
";

    #[test]
    fn parses_cube_and_volume_is_one() {
        let loaded = TriMesh::<f64>::from_obj_str(CUBE_OBJ).unwrap();
        assert_eq!(loaded.mesh.vertices.len(), 8);
        assert_eq!(loaded.mesh.triangles.len(), 12);
        assert_eq!(loaded.dropped_faces, 0);
        assert!((loaded.mesh.signed_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welds_duplicate_vertices() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\nf 1 3 4\n";
        let loaded = TriMesh::<f64>::from_obj_str(text).unwrap();
        assert_eq!(loaded.mesh.vertices.len(), 3);
        assert_eq!(loaded.welded_vertices, 1);
    }

    #[test]
    fn drops_zero_area_faces_with_count() {
        let text = "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\nf 1 1 4\n";
        let loaded = TriMesh::<f64>::from_obj_str(text).unwrap();
        assert_eq!(loaded.mesh.triangles.len(), 1);
        assert_eq!(loaded.dropped_faces, 2);
    }

    #[test]
    fn reports_parse_errors_with_line_numbers() {
        let text = "v 0 0 0\nv 1 0 0\nf 1 2 9\n";
        match TriMesh::<f64>::from_obj_str(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text2 = "v 0 0 zebra\n";
        assert!(matches!(
            TriMesh::<f64>::from_obj_str(text2),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn fan_triangulates_quads() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let loaded = TriMesh::<f64>::from_obj_str(text).unwrap();
        assert_eq!(loaded.mesh.triangles.len(), 2);
    }

    #[test]
    fn normalize_unit_centers_and_scales() {
        let mut mesh = TriMesh::<f64>::from_obj_str(CUBE_OBJ).unwrap().mesh;
        for v in &mut mesh.vertices {
            *v = *v * 3.0 + Vec3::new(10.0, -4.0, 2.0);
        }
        mesh.normalize_unit();
        let (lo, hi) = mesh.bounds();
        assert!((hi - lo).max_component() - 1.0 < 1e-12);
        assert!((lo + hi).norm() < 1e-12);
    }

    #[test]
    fn obj_round_trip_preserves_geometry() {
        let mesh = TriMesh::<f64>::from_obj_str(CUBE_OBJ).unwrap().mesh;
        let text = mesh.to_obj_string();
        let again = TriMesh::<f64>::from_obj_str(&text).unwrap().mesh;
        assert_eq!(mesh.vertices.len(), again.vertices.len());
        assert_eq!(mesh.triangles, again.triangles);
        assert!((mesh.signed_volume() - again.signed_volume()).abs() < 1e-15);
    }
}

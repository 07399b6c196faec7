//! Reference shape generators: icosphere, ellipsoid, torus (in `R³` or as a
//! codimension-2 flat torus in `R⁴`) and a dumbbell test fixture.

use std::collections::HashMap;

use crate::error::MeshError;
use crate::mesh::ImmersedMesh;

/// Largest accepted subdivision level (level 9 is ~2.6M vertices).
pub const MAX_SUBDIVISION_LEVEL: u32 = 9;

/// Ambient embedding of the torus generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusEmbedding {
    /// Standard ring torus in `R³`.
    R3,
    /// Flat torus `R/√2 · (cos u, sin u, cos v, sin v)` in `R⁴`.
    CliffordR4,
}

/// Icosahedron subdivided `level` times and projected to the sphere of the
/// given radius. Vertex count is `10·4^level + 2`.
pub fn icosphere(radius: f64, level: u32) -> Result<ImmersedMesh, MeshError> {
    if radius <= 0.0 {
        return Err(MeshError::InvalidParameter(format!(
            "icosphere radius must be positive, got {radius}"
        )));
    }
    if level > MAX_SUBDIVISION_LEVEL {
        return Err(MeshError::LevelTooLarge(level, MAX_SUBDIVISION_LEVEL));
    }
    let (mut vertices, mut faces) = icosahedron();
    for _ in 0..level {
        subdivide_projected(&mut vertices, &mut faces);
    }
    let mut positions = Vec::with_capacity(vertices.len() * 3);
    for v in &vertices {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        positions.extend_from_slice(&[
            radius * v[0] / n,
            radius * v[1] / n,
            radius * v[2] / n,
        ]);
    }
    ImmersedMesh::new(3, positions, faces)
}

/// Axis-aligned ellipsoid with semi-axes `(a, b, c)`, built by scaling an
/// icosphere. `ellipsoid(r, r, r, level)` coincides with `icosphere(r, level)`
/// up to vertex placement.
pub fn ellipsoid(a: f64, b: f64, c: f64, level: u32) -> Result<ImmersedMesh, MeshError> {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return Err(MeshError::InvalidParameter(format!(
            "ellipsoid semi-axes must be positive, got ({a}, {b}, {c})"
        )));
    }
    let sphere = icosphere(1.0, level)?;
    let scale = [a, b, c];
    let positions = sphere
        .positions()
        .iter()
        .enumerate()
        .map(|(i, &x)| x * scale[i % 3])
        .collect();
    sphere.with_positions(positions)
}

/// Structured torus grid, `nu × nv` quads split into triangles.
///
/// With [`TorusEmbedding::R3`] this is the ring torus of big radius
/// `big_radius` and tube radius `small_radius` (analytic area
/// `4π²·R·r`). With [`TorusEmbedding::CliffordR4`] the image is the flat
/// torus `(cos u, sin u, cos v, sin v)·R/√2` in `R⁴`; `small_radius` is
/// ignored there.
pub fn torus(
    big_radius: f64,
    small_radius: f64,
    nu: usize,
    nv: usize,
    embed: TorusEmbedding,
) -> Result<ImmersedMesh, MeshError> {
    if big_radius <= 0.0 || small_radius <= 0.0 {
        return Err(MeshError::InvalidParameter(format!(
            "torus radii must be positive, got ({big_radius}, {small_radius})"
        )));
    }
    if nu < 3 || nv < 3 {
        return Err(MeshError::InvalidParameter(format!(
            "torus grid must be at least 3×3, got {nu}×{nv}"
        )));
    }
    let dim = match embed {
        TorusEmbedding::R3 => 3,
        TorusEmbedding::CliffordR4 => 4,
    };
    let mut positions = Vec::with_capacity(nu * nv * dim);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            match embed {
                TorusEmbedding::R3 => {
                    let w = big_radius + small_radius * v.cos();
                    positions.extend_from_slice(&[
                        w * u.cos(),
                        w * u.sin(),
                        small_radius * v.sin(),
                    ]);
                }
                TorusEmbedding::CliffordR4 => {
                    let s = big_radius / 2.0_f64.sqrt();
                    positions.extend_from_slice(&[s * u.cos(), s * u.sin(), s * v.cos(), s * v.sin()]);
                }
            }
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let p00 = idx(i, j);
            let p10 = idx(i + 1, j);
            let p01 = idx(i, j + 1);
            let p11 = idx(i + 1, j + 1);
            faces.push([p00, p10, p11]);
            faces.push([p00, p11, p01]);
        }
    }
    ImmersedMesh::new(dim, positions, faces)
}

/// Two unit-sphere lobes joined by a neck of relative radius `neck_ratio`:
/// the icosphere image under `(x, y, z) ↦ (x, s(x)·y, s(x)·z)` with
/// `s(x) = neck_ratio + (1 − neck_ratio)·x²`. Sphere topology, so the cross
/// section at `x = 0` is a circle of radius `neck_ratio` and the profile near
/// the waist is catenoid-like.
pub fn dumbbell(neck_ratio: f64, level: u32) -> Result<ImmersedMesh, MeshError> {
    if !(0.0..1.0).contains(&neck_ratio) || neck_ratio == 0.0 {
        return Err(MeshError::InvalidParameter(format!(
            "neck_ratio must lie in (0, 1), got {neck_ratio}"
        )));
    }
    let sphere = icosphere(1.0, level)?;
    let mut positions = Vec::with_capacity(sphere.positions().len());
    for p in sphere.positions().chunks_exact(3) {
        let s = neck_ratio + (1.0 - neck_ratio) * p[0] * p[0];
        positions.extend_from_slice(&[p[0], s * p[1], s * p[2]]);
    }
    sphere.with_positions(positions)
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let vertices = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let faces = vec![
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
    (vertices, faces)
}

/// One 4-to-1 subdivision pass with midpoints pushed to the unit sphere.
fn subdivide_projected(vertices: &mut Vec<[f64; 3]>, faces: &mut Vec<[usize; 3]>) {
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut next = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces.iter() {
        let mut mid = |i: usize, j: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (i.min(j), i.max(j));
            if let Some(&m) = midpoint.get(&key) {
                return m;
            }
            let p = verts[i];
            let q = verts[j];
            let mut m = [
                0.5 * (p[0] + q[0]),
                0.5 * (p[1] + q[1]),
                0.5 * (p[2] + q[2]),
            ];
            let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
            m = [m[0] / n, m[1] / n, m[2] / n];
            verts.push(m);
            let id = verts.len() - 1;
            midpoint.insert(key, id);
            id
        };
        let ab = mid(a, b, vertices);
        let bc = mid(b, c, vertices);
        let ca = mid(c, a, vertices);
        next.push([a, ab, ca]);
        next.push([b, bc, ab]);
        next.push([c, ca, bc]);
        next.push([ab, bc, ca]);
    }
    // Re-normalize the original corners too so every vertex is on the sphere.
    for v in vertices.iter_mut() {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        *v = [v[0] / n, v[1] / n, v[2] / n];
    }
    *faces = next;
}

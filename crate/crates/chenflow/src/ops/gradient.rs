//! Per-face piecewise-linear gradients of the curvature tensors.
//!
//! Vertex tensors live in per-vertex frames, so before differencing across a
//! face the components of the two non-reference vertices are re-expressed in
//! the reference vertex frame via the orthogonal factor of the frame-overlap
//! matrix (the rotation minimizing frame mismatch). This avoids explicit
//! Christoffel symbols and absorbs normal-frame sign flips; it is consistent
//! at `O(h)`.
//!
//! The aligned mean curvature is taken as the coordinate trace of the aligned
//! `A`, and the aligned tracefree part as `A − ½(trace A)·I`, so the
//! decomposition `|∇A|² = |∇A°|² + ½|∇H|²` holds exactly face by face.

use nalgebra::DMatrix;

use crate::exec;
use crate::linalg::dot;
use crate::mesh::ImmersedMesh;
use crate::ops::curvature::CurvatureField;

/// Face-wise gradient magnitudes and their integrals.
#[derive(Debug, Clone)]
pub struct GradientField {
    /// Per-face `|∇H|²` (summed over normal components).
    pub grad_h_sq: Vec<f64>,
    /// Per-face `|∇A|²`.
    pub grad_a_sq: Vec<f64>,
    /// Per-face `|∇A°|²`.
    pub grad_ao_sq: Vec<f64>,
    /// `∫|∇H|² dμ`.
    pub int_grad_h_sq: f64,
    /// `∫|∇A|² dμ`.
    pub int_grad_a_sq: f64,
    /// `∫|∇A°|² dμ`.
    pub int_grad_ao_sq: f64,
}

/// Compute the gradient field of `H`, `A` and `A°`.
pub fn covariant_gradients(mesh: &ImmersedMesh, field: &CurvatureField) -> GradientField {
    covariant_gradients_impl(mesh, field, exec::is_parallel())
}

/// Sequential twin of [`covariant_gradients`], for benchmarks.
pub fn covariant_gradients_sequential(
    mesh: &ImmersedMesh,
    field: &CurvatureField,
) -> GradientField {
    covariant_gradients_impl(mesh, field, false)
}

fn covariant_gradients_impl(
    mesh: &ImmersedMesh,
    field: &CurvatureField,
    parallel: bool,
) -> GradientField {
    let nf = mesh.num_faces();
    let one = |f: usize| face_gradients(mesh, field, f);
    let per_face: Vec<[f64; 3]> = if parallel {
        exec::map_indexed(nf, one)
    } else {
        exec::map_indexed_sequential(nf, one)
    };

    let mut grad_h_sq = Vec::with_capacity(nf);
    let mut grad_a_sq = Vec::with_capacity(nf);
    let mut grad_ao_sq = Vec::with_capacity(nf);
    let mut int_h = 0.0;
    let mut int_a = 0.0;
    let mut int_ao = 0.0;
    for (f, vals) in per_face.iter().enumerate() {
        let area = mesh.face_area(f);
        grad_h_sq.push(vals[0]);
        grad_a_sq.push(vals[1]);
        grad_ao_sq.push(vals[2]);
        int_h += vals[0] * area;
        int_a += vals[1] * area;
        int_ao += vals[2] * area;
    }
    GradientField {
        grad_h_sq,
        grad_a_sq,
        grad_ao_sq,
        int_grad_h_sq: int_h,
        int_grad_a_sq: int_a,
        int_grad_ao_sq: int_ao,
    }
}

/// `(|∇H|², |∇A|², |∇A°|²)` on one face.
fn face_gradients(mesh: &ImmersedMesh, field: &CurvatureField, f: usize) -> [f64; 3] {
    let verts = mesh.faces()[f];
    let nn = field.normal_count();

    // Aligned A components for each face vertex: nn blocks of (A11, A12, A22).
    let aligned: [Vec<f64>; 3] = [
        aligned_components(field, verts[0], verts[0]),
        aligned_components(field, verts[1], verts[0]),
        aligned_components(field, verts[2], verts[0]),
    ];
    // Coordinate trace per block; the tracefree part is derived from it in
    // the gradient accumulation below.
    let mut traces = [vec![0.0; nn], vec![0.0; nn], vec![0.0; nn]];
    for corner in 0..3 {
        for alpha in 0..nn {
            let base = alpha * 3;
            traces[corner][alpha] = aligned[corner][base] + aligned[corner][base + 2];
        }
    }

    // P1 gradient Gram data.
    let p0 = mesh.position(verts[0]);
    let p1 = mesh.position(verts[1]);
    let p2 = mesh.position(verts[2]);
    let e1: Vec<f64> = p1.iter().zip(p0).map(|(a, b)| a - b).collect();
    let e2: Vec<f64> = p2.iter().zip(p0).map(|(a, b)| a - b).collect();
    let g11 = dot(&e1, &e1);
    let g12 = dot(&e1, &e2);
    let g22 = dot(&e2, &e2);
    let det = g11 * g22 - g12 * g12;
    if det <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    // |∇φ|² = δᵀ G⁻¹ δ for vertex differences δ = (φ1−φ0, φ2−φ0).
    let grad_sq = |v0: f64, v1: f64, v2: f64| -> f64 {
        let d1 = v1 - v0;
        let d2 = v2 - v0;
        (g22 * d1 * d1 - 2.0 * g12 * d1 * d2 + g11 * d2 * d2) / det
    };

    let mut h_sq = 0.0;
    let mut a_sq = 0.0;
    let mut ao_sq = 0.0;
    for alpha in 0..nn {
        let base = alpha * 3;
        let tr = [traces[0][alpha], traces[1][alpha], traces[2][alpha]];
        h_sq += grad_sq(tr[0], tr[1], tr[2]);
        for (comp, mult) in [(0usize, 1.0), (1, 2.0), (2, 1.0)] {
            let full = grad_sq(
                aligned[0][base + comp],
                aligned[1][base + comp],
                aligned[2][base + comp],
            );
            a_sq += mult * full;
            let half = if comp == 1 { 0.0 } else { 0.5 };
            let off = grad_sq(
                aligned[0][base + comp] - half * tr[0],
                aligned[1][base + comp] - half * tr[1],
                aligned[2][base + comp] - half * tr[2],
            );
            ao_sq += mult * off;
        }
    }
    [h_sq, a_sq, ao_sq]
}

/// Components of `A` at vertex `from`, expressed in the frame of `to`.
fn aligned_components(field: &CurvatureField, from: usize, to: usize) -> Vec<f64> {
    let nn = field.normal_count();
    if from == to {
        let mut out = Vec::with_capacity(nn * 3);
        for alpha in 0..nn {
            out.extend_from_slice(&field.a_block(from, alpha));
        }
        return out;
    }
    let ff = field.frames().frame(from);
    let ft = field.frames().frame(to);

    // Tangent overlap, orthonormalized: components c expressed in `to` are
    // R c with R = polar(Mᵀ), M[i][j] = ⟨t_from_i, t_to_j⟩.
    let m = [
        [dot(ff.tangent(0), ft.tangent(0)), dot(ff.tangent(0), ft.tangent(1))],
        [dot(ff.tangent(1), ft.tangent(0)), dot(ff.tangent(1), ft.tangent(1))],
    ];
    let r = polar2(&[[m[0][0], m[1][0]], [m[0][1], m[1][1]]]);

    // Normal overlap, orthonormalized likewise.
    let q = match nn {
        1 => vec![if dot(ff.normal(0), ft.normal(0)) >= 0.0 { 1.0 } else { -1.0 }],
        2 => {
            let n = [
                [dot(ff.normal(0), ft.normal(0)), dot(ff.normal(0), ft.normal(1))],
                [dot(ff.normal(1), ft.normal(0)), dot(ff.normal(1), ft.normal(1))],
            ];
            let p = polar2(&[[n[0][0], n[1][0]], [n[0][1], n[1][1]]]);
            vec![p[0][0], p[0][1], p[1][0], p[1][1]]
        }
        _ => polar_general(field, from, to),
    };

    let mut out = vec![0.0; nn * 3];
    for alpha in 0..nn {
        let [a11, a12, a22] = field.a_block(from, alpha);
        // R A Rᵀ.
        let b11 = r[0][0] * (r[0][0] * a11 + r[0][1] * a12)
            + r[0][1] * (r[0][0] * a12 + r[0][1] * a22);
        let b12 = r[1][0] * (r[0][0] * a11 + r[0][1] * a12)
            + r[1][1] * (r[0][0] * a12 + r[0][1] * a22);
        let b22 = r[1][0] * (r[1][0] * a11 + r[1][1] * a12)
            + r[1][1] * (r[1][0] * a12 + r[1][1] * a22);
        // Normal index mixing.
        for beta in 0..nn {
            let weight = match nn {
                1 => q[0],
                _ => q[beta * nn + alpha],
            };
            out[beta * 3] += weight * b11;
            out[beta * 3 + 1] += weight * b12;
            out[beta * 3 + 2] += weight * b22;
        }
    }
    out
}

/// Orthogonal polar factor of a 2×2 matrix (closest orthogonal matrix,
/// reflections allowed).
fn polar2(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mat = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
    let svd = mat.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let r = u * vt;
    [[r[(0, 0)], r[(0, 1)]], [r[(1, 0)], r[(1, 1)]]]
}

/// Polar factor of the normal-frame overlap for codimension above 2, row
/// major `nn × nn`.
fn polar_general(field: &CurvatureField, from: usize, to: usize) -> Vec<f64> {
    let nn = field.normal_count();
    let ff = field.frames().frame(from);
    let ft = field.frames().frame(to);
    let mut m = DMatrix::<f64>::zeros(nn, nn);
    for b in 0..nn {
        for a in 0..nn {
            m[(b, a)] = dot(ff.normal(a), ft.normal(b));
        }
    }
    let svd = m.svd(true, true);
    let r = svd.u.unwrap() * svd.v_t.unwrap();
    let mut out = vec![0.0; nn * nn];
    for b in 0..nn {
        for a in 0..nn {
            out[b * nn + a] = r[(b, a)];
        }
    }
    out
}

/// Per-face `|∇u|` magnitudes of a vertex scalar field.
pub fn face_scalar_gradient_norms(mesh: &ImmersedMesh, u: &[f64]) -> Vec<f64> {
    debug_assert_eq!(u.len(), mesh.num_vertices());
    let nf = mesh.num_faces();
    exec::map_indexed(nf, |f| {
        let [a, b, c] = mesh.faces()[f];
        let p0 = mesh.position(a);
        let p1 = mesh.position(b);
        let p2 = mesh.position(c);
        let e1: Vec<f64> = p1.iter().zip(p0).map(|(x, y)| x - y).collect();
        let e2: Vec<f64> = p2.iter().zip(p0).map(|(x, y)| x - y).collect();
        let g11 = dot(&e1, &e1);
        let g12 = dot(&e1, &e2);
        let g22 = dot(&e2, &e2);
        let det = g11 * g22 - g12 * g12;
        if det <= 0.0 {
            return 0.0;
        }
        let d1 = u[b] - u[a];
        let d2 = u[c] - u[a];
        ((g22 * d1 * d1 - 2.0 * g12 * d1 * d2 + g11 * d2 * d2) / det).max(0.0).sqrt()
    })
}

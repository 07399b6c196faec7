//! Per-vertex curvature state: metric, second fundamental form, mean
//! curvature vector, tracefree part, Gauss curvature and pointwise norms.
//!
//! The second fundamental form is recovered by a weighted least-squares
//! quadratic fit of the height functions over the tangent plane (2-ring
//! stencil, weights `1/distance²`), which works in any codimension. `H` is
//! defined as the metric trace of `A`, so the algebraic identities
//! `trace_g A° = 0`, `|A|² = |A°|² + ½|H|²` and `⟨Q(A)H, H⟩ ≥ ½|H|⁴` hold
//! exactly up to floating-point roundoff.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;

use crate::error::OpsError;
use crate::exec;
use crate::linalg::dot;
use crate::mesh::{corner_angle, ImmersedMesh};
use crate::ops::frames::FrameField;

/// Curvature quantities for every vertex of one position snapshot.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    dim: usize,
    nn: usize,
    frames: FrameField,
    /// Metric in tangent coordinates: `(g11, g12, g22)` per vertex.
    metric: Vec<[f64; 3]>,
    /// `A` coefficients per vertex: `nn` blocks of `(A11, A12, A22)`.
    a: Vec<f64>,
    /// `A° = A − ½Hg`, same layout.
    a_tracefree: Vec<f64>,
    /// `H` coefficients in the normal frame, `nn` per vertex.
    h_frame: Vec<f64>,
    /// `H` as an ambient vector, `dim` per vertex.
    h_ambient: Vec<f64>,
    gauss: Vec<f64>,
    norm_a_sq: Vec<f64>,
    norm_ao_sq: Vec<f64>,
    norm_h_sq: Vec<f64>,
}

impl CurvatureField {
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn normal_count(&self) -> usize {
        self.nn
    }

    pub fn num_vertices(&self) -> usize {
        self.gauss.len()
    }

    pub fn frames(&self) -> &FrameField {
        &self.frames
    }

    pub fn metric(&self, v: usize) -> [f64; 3] {
        self.metric[v]
    }

    /// `(A11, A12, A22)` for normal direction `alpha` at vertex `v`.
    pub fn a_block(&self, v: usize, alpha: usize) -> [f64; 3] {
        let base = (v * self.nn + alpha) * 3;
        [self.a[base], self.a[base + 1], self.a[base + 2]]
    }

    pub fn a_tracefree_block(&self, v: usize, alpha: usize) -> [f64; 3] {
        let base = (v * self.nn + alpha) * 3;
        [
            self.a_tracefree[base],
            self.a_tracefree[base + 1],
            self.a_tracefree[base + 2],
        ]
    }

    /// `H` coefficients in the vertex normal frame.
    pub fn h_frame(&self, v: usize) -> &[f64] {
        &self.h_frame[v * self.nn..(v + 1) * self.nn]
    }

    /// Ambient mean curvature vectors, interleaved.
    pub fn h_ambient(&self) -> &[f64] {
        &self.h_ambient
    }

    pub fn gauss(&self) -> &[f64] {
        &self.gauss
    }

    pub fn norm_a_sq(&self) -> &[f64] {
        &self.norm_a_sq
    }

    pub fn norm_ao_sq(&self) -> &[f64] {
        &self.norm_ao_sq
    }

    pub fn norm_h_sq(&self) -> &[f64] {
        &self.norm_h_sq
    }

    pub fn max_abs_a(&self) -> f64 {
        self.norm_a_sq
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v))
            .sqrt()
    }
}

/// Fit the second fundamental form and derive the curvature field.
pub fn second_fundamental_form(
    mesh: &ImmersedMesh,
    frames: &FrameField,
) -> Result<CurvatureField, OpsError> {
    second_fundamental_form_impl(mesh, frames, exec::is_parallel())
}

/// Sequential twin of [`second_fundamental_form`], for benchmarks.
pub fn second_fundamental_form_sequential(
    mesh: &ImmersedMesh,
    frames: &FrameField,
) -> Result<CurvatureField, OpsError> {
    second_fundamental_form_impl(mesh, frames, false)
}

struct VertexFit {
    metric: [f64; 3],
    a: Vec<f64>,
    ao: Vec<f64>,
    h_frame: Vec<f64>,
    h_ambient: Vec<f64>,
    gauss: f64,
    norm_a_sq: f64,
    norm_ao_sq: f64,
    norm_h_sq: f64,
}

fn second_fundamental_form_impl(
    mesh: &ImmersedMesh,
    frames: &FrameField,
    parallel: bool,
) -> Result<CurvatureField, OpsError> {
    let dim = mesh.ambient_dim();
    let nn = dim - 2;
    let nv = mesh.num_vertices();
    let one = |v: usize| fit_vertex(mesh, frames, v);
    let fits: Result<Vec<VertexFit>, OpsError> = if parallel {
        exec::try_map_indexed(nv, one)
    } else {
        (0..nv).map(one).collect()
    };
    let fits = fits?;

    let mut field = CurvatureField {
        dim,
        nn,
        frames: frames.clone(),
        metric: Vec::with_capacity(nv),
        a: Vec::with_capacity(nv * nn * 3),
        a_tracefree: Vec::with_capacity(nv * nn * 3),
        h_frame: Vec::with_capacity(nv * nn),
        h_ambient: Vec::with_capacity(nv * dim),
        gauss: Vec::with_capacity(nv),
        norm_a_sq: Vec::with_capacity(nv),
        norm_ao_sq: Vec::with_capacity(nv),
        norm_h_sq: Vec::with_capacity(nv),
    };
    for f in fits {
        field.metric.push(f.metric);
        field.a.extend_from_slice(&f.a);
        field.a_tracefree.extend_from_slice(&f.ao);
        field.h_frame.extend_from_slice(&f.h_frame);
        field.h_ambient.extend_from_slice(&f.h_ambient);
        field.gauss.push(f.gauss);
        field.norm_a_sq.push(f.norm_a_sq);
        field.norm_ao_sq.push(f.norm_ao_sq);
        field.norm_h_sq.push(f.norm_h_sq);
    }
    Ok(field)
}

/// Collect the k-ring of `v` (excluding `v`), deduplicated and sorted.
fn ring(mesh: &ImmersedMesh, v: usize, depth: usize) -> Vec<usize> {
    let mut seen = vec![v];
    let mut frontier = vec![v];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in mesh.vertex_neighbors(u) {
                let w = w as usize;
                if !seen.contains(&w) && !next.contains(&w) {
                    next.push(w);
                }
            }
        }
        seen.extend_from_slice(&next);
        frontier = next;
    }
    seen.retain(|&u| u != v);
    seen.sort_unstable();
    seen
}

fn fit_vertex(mesh: &ImmersedMesh, frames: &FrameField, v: usize) -> Result<VertexFit, OpsError> {
    let dim = mesh.ambient_dim();
    let nn = dim - 2;
    let mut stencil = ring(mesh, v, 2);
    if stencil.len() < 6 {
        stencil = ring(mesh, v, 3);
        if stencil.len() < 6 {
            return Err(OpsError::UnderdeterminedFit {
                vertex: v,
                count: stencil.len(),
            });
        }
    }

    let frame = frames.frame(v);
    let pv = mesh.position(v);
    let mut gram = DMatrix::<f64>::zeros(5, 5);
    let mut rhs = DMatrix::<f64>::zeros(5, nn);
    let mut d = vec![0.0; dim];
    for &q in &stencil {
        let pq = mesh.position(q);
        for k in 0..dim {
            d[k] = pq[k] - pv[k];
        }
        let u1 = dot(&d, frame.tangent(0));
        let u2 = dot(&d, frame.tangent(1));
        let w = 1.0 / dot(&d, &d);
        let basis = [u1, u2, 0.5 * u1 * u1, u1 * u2, 0.5 * u2 * u2];
        for i in 0..5 {
            for j in i..5 {
                gram[(i, j)] += w * basis[i] * basis[j];
            }
            for (alpha, col) in (0..nn).map(|a| (a, frame.normal(a))) {
                rhs[(i, alpha)] += w * basis[i] * dot(&d, col);
            }
        }
    }
    for i in 0..5 {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }

    let coeffs = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or(OpsError::UnderdeterminedFit {
                vertex: v,
                count: stencil.len(),
            })?,
    };

    // Metric from the fitted tilt, g = I + Jᵀ J.
    let mut g11 = 1.0;
    let mut g12 = 0.0;
    let mut g22 = 1.0;
    for alpha in 0..nn {
        let ga = coeffs[(0, alpha)];
        let gb = coeffs[(1, alpha)];
        g11 += ga * ga;
        g12 += ga * gb;
        g22 += gb * gb;
    }
    let det = g11 * g22 - g12 * g12;
    let (gi11, gi12, gi22) = (g22 / det, -g12 / det, g11 / det);

    let mut a = Vec::with_capacity(nn * 3);
    let mut ao = Vec::with_capacity(nn * 3);
    let mut h_frame = Vec::with_capacity(nn);
    let mut h_ambient = vec![0.0; dim];
    let mut norm_a_sq = 0.0;
    let mut norm_ao_sq = 0.0;
    let mut norm_h_sq = 0.0;
    for alpha in 0..nn {
        let a11 = coeffs[(2, alpha)];
        let a12 = coeffs[(3, alpha)];
        let a22 = coeffs[(4, alpha)];
        let h = gi11 * a11 + 2.0 * gi12 * a12 + gi22 * a22;
        let o11 = a11 - 0.5 * h * g11;
        let o12 = a12 - 0.5 * h * g12;
        let o22 = a22 - 0.5 * h * g22;
        a.extend_from_slice(&[a11, a12, a22]);
        ao.extend_from_slice(&[o11, o12, o22]);
        h_frame.push(h);
        norm_h_sq += h * h;
        norm_a_sq += sym_norm_sq(a11, a12, a22, gi11, gi12, gi22);
        norm_ao_sq += sym_norm_sq(o11, o12, o22, gi11, gi12, gi22);
        let nu = frame.normal(alpha);
        for k in 0..dim {
            h_ambient[k] += h * nu[k];
        }
    }
    let gauss = 0.5 * (norm_h_sq - norm_a_sq);

    Ok(VertexFit {
        metric: [g11, g12, g22],
        a,
        ao,
        h_frame,
        h_ambient,
        gauss,
        norm_a_sq,
        norm_ao_sq,
        norm_h_sq,
    })
}

/// `|T|² = g^{ik} g^{jl} T_ij T_kl = trace((g⁻¹T)²)` for symmetric 2×2 `T`.
fn sym_norm_sq(t11: f64, t12: f64, t22: f64, gi11: f64, gi12: f64, gi22: f64) -> f64 {
    let c11 = gi11 * t11 + gi12 * t12;
    let c12 = gi11 * t12 + gi12 * t22;
    let c21 = gi12 * t11 + gi22 * t12;
    let c22 = gi12 * t12 + gi22 * t22;
    c11 * c11 + 2.0 * c12 * c21 + c22 * c22
}

/// Angle-defect Gauss curvature `K_i = (2π − Σ incident angles) / mass_i`,
/// normalized by the same lumped mass the operators use so that discrete
/// Gauss–Bonnet `Σ K_i·mass_i = 2πχ` telescopes exactly up to roundoff on
/// closed meshes.
pub fn gauss_curvature_angle_defect(mesh: &ImmersedMesh) -> Vec<f64> {
    let nv = mesh.num_vertices();
    let mut defect = vec![2.0 * std::f64::consts::PI; nv];
    for f in 0..mesh.num_faces() {
        let [a, b, c] = mesh.faces()[f];
        let (pa, pb, pc) = (mesh.position(a), mesh.position(b), mesh.position(c));
        defect[a] -= corner_angle(pa, pb, pc);
        defect[b] -= corner_angle(pb, pc, pa);
        defect[c] -= corner_angle(pc, pa, pb);
    }
    let mass = crate::ops::operators::vertex_masses(mesh);
    defect
        .iter()
        .zip(mass.iter())
        .map(|(&d, &m)| if m > 0.0 { d / m } else { 0.0 })
        .collect()
}

static NON_NORMAL_WARNINGS: AtomicUsize = AtomicUsize::new(0);

/// The normal endomorphism `Q(A)φ = g^{ik} g^{jl} A_kl ⟨A_ij, φ⟩`, acting on
/// an ambient vector field `φ` (interleaved). `φ` is projected onto the
/// normal space first; a warning is logged if it had a tangential part.
pub fn q_endomorphism(field: &CurvatureField, phi: &[f64]) -> Vec<f64> {
    q_apply(field, phi, false)
}

/// Same as [`q_endomorphism`] with `A°` in place of `A`.
pub fn q_endomorphism_tracefree(field: &CurvatureField, phi: &[f64]) -> Vec<f64> {
    q_apply(field, phi, true)
}

fn q_apply(field: &CurvatureField, phi: &[f64], tracefree: bool) -> Vec<f64> {
    let dim = field.dim;
    let nn = field.nn;
    let nv = field.num_vertices();
    debug_assert_eq!(phi.len(), nv * dim);
    let mut non_normal = 0usize;
    let mut out = vec![0.0; nv * dim];
    for v in 0..nv {
        let frame = field.frames.frame(v);
        let p = &phi[v * dim..(v + 1) * dim];
        // Normal components of φ.
        let mut comps = [0.0_f64; 8];
        let mut normal_sq = 0.0;
        for alpha in 0..nn {
            let c = dot(p, frame.normal(alpha));
            comps[alpha] = c;
            normal_sq += c * c;
        }
        let total_sq = dot(p, p);
        if total_sq > 0.0 && (total_sq - normal_sq) > 1e-16 * total_sq.max(1.0) {
            let tangential = (total_sq - normal_sq).max(0.0).sqrt();
            if tangential > 1e-8 * total_sq.sqrt() {
                non_normal += 1;
            }
        }

        let [g11, g12, g22] = field.metric[v];
        let det = g11 * g22 - g12 * g12;
        let (gi11, gi12, gi22) = (g22 / det, -g12 / det, g11 / det);
        // B_ij = ⟨A_ij, φ⟩ summed over normal directions.
        let mut b11 = 0.0;
        let mut b12 = 0.0;
        let mut b22 = 0.0;
        for alpha in 0..nn {
            let [t11, t12, t22] = if tracefree {
                field.a_tracefree_block(v, alpha)
            } else {
                field.a_block(v, alpha)
            };
            b11 += t11 * comps[alpha];
            b12 += t12 * comps[alpha];
            b22 += t22 * comps[alpha];
        }
        // Q^α = g^{ik} g^{jl} A^α_kl B_ij = trace(g⁻¹ A^α g⁻¹ B).
        let out_v = &mut out[v * dim..(v + 1) * dim];
        for alpha in 0..nn {
            let [t11, t12, t22] = if tracefree {
                field.a_tracefree_block(v, alpha)
            } else {
                field.a_block(v, alpha)
            };
            let c11 = gi11 * t11 + gi12 * t12;
            let c12 = gi11 * t12 + gi12 * t22;
            let c21 = gi12 * t11 + gi22 * t12;
            let c22 = gi12 * t12 + gi22 * t22;
            let d11 = gi11 * b11 + gi12 * b12;
            let d12 = gi11 * b12 + gi12 * b22;
            let d21 = gi12 * b11 + gi22 * b12;
            let d22 = gi12 * b12 + gi22 * b22;
            let q = c11 * d11 + c12 * d21 + c21 * d12 + c22 * d22;
            let nu = frame.normal(alpha);
            for k in 0..dim {
                out_v[k] += q * nu[k];
            }
        }
    }
    if non_normal > 0 && NON_NORMAL_WARNINGS.fetch_add(1, Ordering::Relaxed) < 4 {
        log::warn!(
            "q_endomorphism: φ had a tangential part at {non_normal} vertices; projected onto the normal space"
        );
    }
    out
}

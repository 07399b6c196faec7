//! Curvature-concentration diagnostics: the ball functional
//! `η(ρ) = sup_x ∫_{f⁻¹(B_ρ(x))} |A|² dμ`, the largest radius keeping it
//! below a threshold, and the lifespan-form quantities built from it.
//!
//! The supremum over ambient centers is replaced by a maximum over vertex
//! positions (a covering argument bounds the loss by a constant factor), and
//! ball membership is decided by face barycenters without clipping.

use crate::exec;
use crate::linalg::dist2;
use crate::mesh::ImmersedMesh;
use crate::ops::CurvatureField;

/// Relative bisection width for [`largest_small_radius`].
const RHO_BISECTION_REL_WIDTH: f64 = 1e-3;

/// `η(ρ)` with centers defaulting to all vertex positions. Monotone
/// nondecreasing in `ρ` and equal to `∫|A|²dμ` once `ρ` covers the mesh.
pub fn concentration(
    mesh: &ImmersedMesh,
    field: &CurvatureField,
    rho: f64,
    centers: Option<&[f64]>,
) -> f64 {
    concentration_argmax(mesh, field, rho, centers).0
}

/// `η(ρ)` together with the maximizing center.
pub fn concentration_argmax(
    mesh: &ImmersedMesh,
    field: &CurvatureField,
    rho: f64,
    centers: Option<&[f64]>,
) -> (f64, Vec<f64>) {
    let dim = mesh.ambient_dim();
    let centers = centers.unwrap_or_else(|| mesh.positions());
    let ncenters = centers.len() / dim;
    let weights = face_weights(mesh, field);
    let barys = face_barycenters(mesh);
    let rho_sq = rho * rho;

    let totals: Vec<f64> = exec::map_indexed(ncenters, |c| {
        let center = &centers[c * dim..(c + 1) * dim];
        let mut sum = 0.0;
        for (bary, w) in barys.chunks_exact(dim).zip(weights.iter()) {
            if dist2(bary, center) <= rho_sq {
                sum += w;
            }
        }
        sum
    });
    let mut best = 0usize;
    for (i, &v) in totals.iter().enumerate() {
        if v > totals[best] {
            best = i;
        }
    }
    let eta = totals.get(best).copied().unwrap_or(0.0);
    (eta, centers[best * dim..(best + 1) * dim].to_vec())
}

/// Sequential twin of [`concentration`], for benchmarks.
pub fn concentration_sequential(
    mesh: &ImmersedMesh,
    field: &CurvatureField,
    rho: f64,
    centers: Option<&[f64]>,
) -> f64 {
    let dim = mesh.ambient_dim();
    let centers = centers.unwrap_or_else(|| mesh.positions());
    let weights = face_weights(mesh, field);
    let barys = face_barycenters(mesh);
    let rho_sq = rho * rho;
    let mut best = 0.0_f64;
    for center in centers.chunks_exact(dim) {
        let mut sum = 0.0;
        for (bary, w) in barys.chunks_exact(dim).zip(weights.iter()) {
            if dist2(bary, center) <= rho_sq {
                sum += w;
            }
        }
        best = best.max(sum);
    }
    best
}

/// `|A|²` per face (vertex average) times face area.
fn face_weights(mesh: &ImmersedMesh, field: &CurvatureField) -> Vec<f64> {
    let a2 = field.norm_a_sq();
    (0..mesh.num_faces())
        .map(|f| {
            let [a, b, c] = mesh.faces()[f];
            let density = (a2[a] + a2[b] + a2[c]) / 3.0;
            density * mesh.face_area(f)
        })
        .collect()
}

fn face_barycenters(mesh: &ImmersedMesh) -> Vec<f64> {
    let dim = mesh.ambient_dim();
    let mut out = Vec::with_capacity(mesh.num_faces() * dim);
    for f in 0..mesh.num_faces() {
        out.extend_from_slice(&mesh.face_barycenter(f));
    }
    out
}

/// Largest radius `ρ*` with `η(ρ*) ≤ eps1`, found by bisection over
/// `[h_min, 2·bounding diameter]` to relative width `1e−3`. Returns the
/// upper bracket when even the diameter satisfies the bound, the lower
/// bracket when nothing does.
pub fn largest_small_radius(mesh: &ImmersedMesh, field: &CurvatureField, eps1: f64) -> f64 {
    let mut lo = mesh.min_edge_length();
    let mut hi = 2.0 * mesh.bounding_box_diagonal();
    if concentration(mesh, field, hi, None) <= eps1 {
        return hi;
    }
    if concentration(mesh, field, lo, None) > eps1 {
        return lo;
    }
    while (hi - lo) > RHO_BISECTION_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if concentration(mesh, field, mid, None) <= eps1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Lifespan lower bound `ρ⁴ / c`. Diagnostic only; the constant is not
/// explicit in the continuum statement.
pub fn predicted_lifespan(rho_star: f64, c_lifespan: f64) -> f64 {
    rho_star.powi(4) / c_lifespan
}

/// Fit the smallest constant `c` with `ρ*(t) ≤ (c·(T − t))^{1/4}` over the
/// sampled `(t, ρ*)` pairs, i.e. `sup_t ρ*(t)⁴/(T − t)`. Samples at or past
/// `t_final` are skipped.
pub fn lifespan_constant_fit(samples: &[(f64, f64)], t_final: f64) -> Option<f64> {
    let mut sup: Option<f64> = None;
    for &(t, rho) in samples {
        if t < t_final && rho.is_finite() {
            let c = rho.powi(4) / (t_final - t);
            sup = Some(sup.map_or(c, |s: f64| s.max(c)));
        }
    }
    sup
}

//! Numerical inequality bench: the Michael–Simon Sobolev inequality on
//! immersed surfaces and the gradient-domination bound
//! `∫|∇A|² ≤ 3·∫|∇A°|²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::ImmersedMesh;
use crate::ops::{face_scalar_gradient_norms, CurvatureField, GradientField, OperatorCache};

/// Sobolev constant `4^{n+1}/ωₙ^{1/n}` for `n = 2`: `64/√(4π)`.
pub const MSS_CONSTANT_N2: f64 = 64.0 / 3.5449077018110318; // 64 / sqrt(4π)

/// Outcome of one Michael–Simon Sobolev evaluation.
#[derive(Debug, Clone, Copy)]
pub struct MssReport {
    /// `(∫u² dμ)^{1/2}`.
    pub lhs: f64,
    /// `64/√(4π) · (∫|∇u| dμ + ∫|u||H| dμ)`.
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluate the `n = 2` Michael–Simon Sobolev inequality for a vertex
/// scalar `u`. The constant is generous; a failure indicates an operator
/// bug rather than a borderline case.
pub fn mss_check(
    mesh: &ImmersedMesh,
    field: &CurvatureField,
    ops: &OperatorCache,
    u: &[f64],
) -> MssReport {
    debug_assert_eq!(u.len(), mesh.num_vertices());
    let u_sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    let lhs = ops.integrate(&u_sq).max(0.0).sqrt();

    let grad_norms = face_scalar_gradient_norms(mesh, u);
    let grad_term: f64 = grad_norms
        .iter()
        .enumerate()
        .map(|(f, g)| g * ops.face_areas()[f])
        .sum();
    let uh: Vec<f64> = u
        .iter()
        .zip(field.norm_h_sq().iter())
        .map(|(ui, h2)| ui.abs() * h2.sqrt())
        .collect();
    let rhs = MSS_CONSTANT_N2 * (grad_term + ops.integrate(&uh));
    MssReport {
        lhs,
        rhs,
        pass: lhs <= rhs,
    }
}

/// Outcome of the gradient-domination check.
#[derive(Debug, Clone, Copy)]
pub struct GradientDominationReport {
    pub int_grad_a_sq: f64,
    pub int_grad_ao_sq: f64,
    /// `∫|∇A|² / ∫|∇A°|²`; the continuum value is at most 3 for surfaces.
    pub ratio: f64,
    pub pass: bool,
}

/// Check `∫|∇A|² ≤ 3·(1 + 0.05)·∫|∇A°|²`.
pub fn gradient_domination_check(gradients: &GradientField) -> GradientDominationReport {
    const SLACK: f64 = 0.05;
    let a = gradients.int_grad_a_sq;
    let ao = gradients.int_grad_ao_sq;
    let ratio = if ao > 0.0 { a / ao } else { 1.0 };
    GradientDominationReport {
        int_grad_a_sq: a,
        int_grad_ao_sq: ao,
        ratio,
        pass: a <= 3.0 * (1.0 + SLACK) * ao || a <= f64::EPSILON,
    }
}

/// A smooth Gaussian bump `exp(−|p − c|²/(2w²))` evaluated at the vertices;
/// `c` is a vertex position and `w` a fraction of the bounding diameter.
pub fn seeded_bump(mesh: &ImmersedMesh, center_vertex: usize, width_fraction: f64) -> Vec<f64> {
    let dim = mesh.ambient_dim();
    let c = mesh.position(center_vertex % mesh.num_vertices()).to_vec();
    let w = width_fraction * mesh.bounding_box_diagonal();
    let w2 = (w * w).max(f64::MIN_POSITIVE);
    mesh.positions()
        .chunks_exact(dim)
        .map(|p| (-crate::linalg::dist2(p, &c) / (2.0 * w2)).exp())
        .collect()
}

/// `count` reproducible random bumps drawn from the given seed.
pub fn random_bumps(mesh: &ImmersedMesh, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = rng.gen_range(0..mesh.num_vertices());
            let w = rng.gen_range(0.08..0.35);
            seeded_bump(mesh, v, w)
        })
        .collect()
}

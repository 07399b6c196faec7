//! Small sparse-matrix and iterative-solver kernels.
//!
//! The stiffness matrix is stored in CSR with one row per vertex. The
//! conjugate-gradient solver is matrix-free and operates on interleaved
//! multi-component vectors (`ncomp` ambient coordinates per vertex) so that a
//! single sparse pass advances every coordinate of the immersion at once.

/// Compressed sparse row matrix, symmetric by construction at call sites.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(row_ptr: Vec<usize>, col_idx: Vec<u32>, values: Vec<f64>) -> Self {
        debug_assert_eq!(col_idx.len(), values.len());
        debug_assert_eq!(*row_ptr.last().unwrap_or(&0), values.len());
        Self {
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `dst = A * src` on interleaved `ncomp`-component vectors.
    pub fn mul_interleaved(&self, src: &[f64], dst: &mut [f64], ncomp: usize) {
        debug_assert_eq!(src.len(), self.nrows() * ncomp);
        debug_assert_eq!(dst.len(), src.len());
        for i in 0..self.nrows() {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut acc = [0.0_f64; 8];
            for k in lo..hi {
                let j = self.col_idx[k] as usize * ncomp;
                let w = self.values[k];
                for c in 0..ncomp {
                    acc[c] += w * src[j + c];
                }
            }
            let out = &mut dst[i * ncomp..(i + 1) * ncomp];
            out.copy_from_slice(&acc[..ncomp]);
        }
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned CG on `ncomp` interleaved right-hand sides sharing one SPD
/// operator. Each component carries its own scalar recurrence; the operator
/// application is fused across components. Converges when every component
/// reaches `tol` relative to its right-hand side, or errors after `max_iter`.
pub fn cg_interleaved<F>(
    apply: F,
    b: &[f64],
    x: &mut [f64],
    ncomp: usize,
    inv_diag: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgStats, String>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len() / ncomp;
    debug_assert_eq!(inv_diag.len(), n);
    let mut r = vec![0.0; b.len()];
    let mut z = vec![0.0; b.len()];
    let mut p = vec![0.0; b.len()];
    let mut ap = vec![0.0; b.len()];

    // Per-component squared norms of b set the convergence scale.
    let b_norm2 = component_norms2(b, ncomp);
    let all_zero = b_norm2.iter().all(|&v| v == 0.0);
    if all_zero {
        x.fill(0.0);
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b.iter()) {
        *ri = bi - *ri;
    }
    precondition(&r, &mut z, inv_diag, ncomp);
    p.copy_from_slice(&z);
    let mut rz = component_dots(&r, &z, ncomp);

    let target: Vec<f64> = b_norm2.iter().map(|&v| v * tol * tol).collect();
    let converged = |r2: &[f64]| -> bool {
        r2.iter()
            .zip(target.iter())
            .zip(b_norm2.iter())
            .all(|((&r2c, &tc), &b2c)| b2c == 0.0 || r2c <= tc)
    };

    let mut r2 = component_norms2(&r, ncomp);
    if converged(&r2) {
        return Ok(CgStats {
            iterations: 0,
            relative_residual: residual_ratio(&r2, &b_norm2),
        });
    }

    for iter in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = component_dots(&p, &ap, ncomp);
        let mut alpha = [0.0_f64; 8];
        for c in 0..ncomp {
            alpha[c] = if pap[c] > 0.0 { rz[c] / pap[c] } else { 0.0 };
        }
        for i in 0..n {
            let base = i * ncomp;
            for c in 0..ncomp {
                x[base + c] += alpha[c] * p[base + c];
                r[base + c] -= alpha[c] * ap[base + c];
            }
        }
        r2 = component_norms2(&r, ncomp);
        if converged(&r2) {
            return Ok(CgStats {
                iterations: iter,
                relative_residual: residual_ratio(&r2, &b_norm2),
            });
        }
        precondition(&r, &mut z, inv_diag, ncomp);
        let rz_new = component_dots(&r, &z, ncomp);
        let mut beta = [0.0_f64; 8];
        for c in 0..ncomp {
            beta[c] = if rz[c] != 0.0 { rz_new[c] / rz[c] } else { 0.0 };
        }
        for i in 0..n {
            let base = i * ncomp;
            for c in 0..ncomp {
                p[base + c] = z[base + c] + beta[c] * p[base + c];
            }
        }
        rz = rz_new;
    }
    Err(format!(
        "conjugate gradient did not reach {:.1e} within {} iterations (residual {:.3e})",
        tol,
        max_iter,
        residual_ratio(&r2, &b_norm2)
    ))
}

fn precondition(r: &[f64], z: &mut [f64], inv_diag: &[f64], ncomp: usize) {
    for (i, &d) in inv_diag.iter().enumerate() {
        let base = i * ncomp;
        for c in 0..ncomp {
            z[base + c] = r[base + c] * d;
        }
    }
}

fn component_norms2(v: &[f64], ncomp: usize) -> Vec<f64> {
    let mut out = vec![0.0; ncomp];
    for chunk in v.chunks_exact(ncomp) {
        for c in 0..ncomp {
            out[c] += chunk[c] * chunk[c];
        }
    }
    out
}

fn component_dots(a: &[f64], b: &[f64], ncomp: usize) -> Vec<f64> {
    let mut out = vec![0.0; ncomp];
    for (ca, cb) in a.chunks_exact(ncomp).zip(b.chunks_exact(ncomp)) {
        for c in 0..ncomp {
            out[c] += ca[c] * cb[c];
        }
    }
    out
}

fn residual_ratio(r2: &[f64], b2: &[f64]) -> f64 {
    r2.iter()
        .zip(b2.iter())
        .map(|(&r, &b)| if b > 0.0 { (r / b).sqrt() } else { 0.0 })
        .fold(0.0_f64, f64::max)
}

/// Euclidean helpers on `&[f64]` points of any ambient dimension.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Area of the triangle spanned by `u`, `v` via the Gram determinant; valid
/// in any ambient dimension.
pub fn triangle_area_from_edges(u: &[f64], v: &[f64]) -> f64 {
    let uu = dot(u, u);
    let vv = dot(v, v);
    let uv = dot(u, v);
    let g = uu * vv - uv * uv;
    if g <= 0.0 {
        0.0
    } else {
        0.5 * g.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_spd_diagonal_system() {
        // 4x4 diagonal matrix acting on 2 interleaved components.
        let d = [2.0, 3.0, 4.0, 5.0];
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..4 {
                for c in 0..2 {
                    y[i * 2 + c] = d[i] * x[i * 2 + c];
                }
            }
        };
        let b: Vec<f64> = (0..8).map(|i| i as f64 + 1.0).collect();
        let mut x = vec![0.0; 8];
        let inv_diag: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
        let stats = cg_interleaved(apply, &b, &mut x, 2, &inv_diag, 1e-12, 50).unwrap();
        for i in 0..4 {
            for c in 0..2 {
                let expect = b[i * 2 + c] / d[i];
                assert!((x[i * 2 + c] - expect).abs() < 1e-10);
            }
        }
        assert!(stats.relative_residual <= 1e-12);
    }

    #[test]
    fn triangle_area_matches_cross_product() {
        let u = [1.0, 0.0, 0.0];
        let v = [0.0, 2.0, 0.0];
        assert!((triangle_area_from_edges(&u, &v) - 1.0).abs() < 1e-15);
    }
}

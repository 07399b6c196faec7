//! Per-vertex adapted frames: two tangent vectors spanning the best-fit
//! plane of the 1-ring, completed to an orthonormal basis of `R^N` by
//! `N − 2` normal vectors.

use nalgebra::DMatrix;

use crate::error::OpsError;
use crate::exec;
use crate::mesh::ImmersedMesh;

/// Orthonormal frames for every vertex, stored flat: `N × N` row-major
/// entries per vertex, tangent rows first.
#[derive(Debug, Clone)]
pub struct FrameField {
    dim: usize,
    data: Vec<f64>,
}

/// Borrowed view of one vertex frame.
#[derive(Debug, Clone, Copy)]
pub struct VertexFrame<'a> {
    dim: usize,
    rows: &'a [f64],
}

impl<'a> VertexFrame<'a> {
    pub fn tangent(&self, i: usize) -> &'a [f64] {
        debug_assert!(i < 2);
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn normal(&self, a: usize) -> &'a [f64] {
        let i = 2 + a;
        debug_assert!(i < self.dim);
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn normal_count(&self) -> usize {
        self.dim - 2
    }
}

impl FrameField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.dim * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, v: usize) -> VertexFrame<'_> {
        let stride = self.dim * self.dim;
        VertexFrame {
            dim: self.dim,
            rows: &self.data[v * stride..(v + 1) * stride],
        }
    }

    /// Project an ambient vector onto the normal space at `v`, in place.
    pub fn project_normal(&self, v: usize, vec: &mut [f64]) {
        let frame = self.frame(v);
        let mut out = vec![0.0; self.dim];
        for a in 0..frame.normal_count() {
            let nu = frame.normal(a);
            let coeff: f64 = nu.iter().zip(vec.iter()).map(|(n, x)| n * x).sum();
            for d in 0..self.dim {
                out[d] += coeff * nu[d];
            }
        }
        vec.copy_from_slice(&out);
    }
}

/// Build frames from the principal directions of the centered 1-ring
/// (neighbors plus the vertex itself). The two dominant directions span the
/// tangent plane; the remaining eigenvectors complete the basis.
pub fn vertex_frames(mesh: &ImmersedMesh) -> Result<FrameField, OpsError> {
    vertex_frames_impl(mesh, exec::is_parallel())
}

/// Sequential twin of [`vertex_frames`], for benchmarks.
pub fn vertex_frames_sequential(mesh: &ImmersedMesh) -> Result<FrameField, OpsError> {
    vertex_frames_impl(mesh, false)
}

fn vertex_frames_impl(mesh: &ImmersedMesh, parallel: bool) -> Result<FrameField, OpsError> {
    let dim = mesh.ambient_dim();
    let nv = mesh.num_vertices();
    let one = |v: usize| -> Result<Vec<f64>, OpsError> { frame_at(mesh, v) };
    let rows: Result<Vec<Vec<f64>>, OpsError> = if parallel {
        exec::try_map_indexed(nv, one)
    } else {
        (0..nv).map(one).collect()
    };
    let rows = rows?;
    let mut data = Vec::with_capacity(nv * dim * dim);
    for r in rows {
        data.extend_from_slice(&r);
    }
    Ok(FrameField { dim, data })
}

fn frame_at(mesh: &ImmersedMesh, v: usize) -> Result<Vec<f64>, OpsError> {
    let dim = mesh.ambient_dim();
    let nbrs = mesh.vertex_neighbors(v);
    if nbrs.len() < 3 {
        return Err(OpsError::StarTooSmall { vertex: v });
    }
    // Mean of the star (neighbors + vertex).
    let mut mean = vec![0.0; dim];
    let count = (nbrs.len() + 1) as f64;
    for &n in nbrs {
        let p = mesh.position(n as usize);
        for d in 0..dim {
            mean[d] += p[d];
        }
    }
    let pv = mesh.position(v);
    for d in 0..dim {
        mean[d] = (mean[d] + pv[d]) / count;
    }

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut accumulate = |p: &[f64]| {
        for i in 0..dim {
            let di = p[i] - mean[i];
            for j in i..dim {
                let dj = p[j] - mean[j];
                cov[(i, j)] += di * dj;
            }
        }
    };
    for &n in nbrs {
        accumulate(mesh.position(n as usize));
    }
    accumulate(pv);
    for i in 0..dim {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }

    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let lead = eig.eigenvalues[order[0]].abs();
    if eig.eigenvalues[order[1]].abs() <= 1e-12 * lead.max(1e-300) {
        return Err(OpsError::RankDeficientStar { vertex: v });
    }

    let mut rows = Vec::with_capacity(dim * dim);
    for &k in &order {
        let col = eig.eigenvectors.column(k);
        let n: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        rows.extend(col.iter().map(|x| x / n));
    }
    Ok(rows)
}

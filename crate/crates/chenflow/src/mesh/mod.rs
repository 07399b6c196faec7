//! Discrete immersions: closed oriented triangle meshes with vertex
//! positions in `R^N`, `N ≥ 3`.
//!
//! Connectivity is immutable after construction; flows move positions only.
//! This keeps derived adjacency and operator caches valid for the lifetime of
//! a run. The topology is shared behind an `Arc` so position updates are
//! cheap.

mod generate;
mod io;

pub use generate::{dumbbell, ellipsoid, icosphere, torus, TorusEmbedding};
pub use io::{load_obj, save_obj};

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::MeshError;
use crate::linalg::{dist2, dot, sub, triangle_area_from_edges};

/// Relative factor for the degenerate-face threshold: a face is degenerate
/// when its area falls below `AREA_EPS_REL × (bounding-box diagonal)²`.
pub const AREA_EPS_REL: f64 = 1e-12;

/// Connectivity tables derived once at construction.
#[derive(Debug)]
pub struct MeshTopology {
    faces: Vec<[usize; 3]>,
    /// Unique undirected edges as sorted index pairs.
    edges: Vec<[usize; 2]>,
    /// For each face, the edge id opposite each corner.
    face_edges: Vec<[usize; 3]>,
    /// Faces incident to each vertex.
    vertex_faces: Vec<Vec<u32>>,
    /// One-ring neighbors of each vertex, ascending.
    vertex_neighbors: Vec<Vec<u32>>,
    num_vertices: usize,
    /// First edge not shared by exactly two faces, if any.
    boundary_edge: Option<[usize; 2]>,
    /// First edge traversed twice in the same direction, if any.
    misoriented_edge: Option<[usize; 2]>,
}

/// A triangulated immersion `f: M² → R^N`.
#[derive(Debug, Clone)]
pub struct ImmersedMesh {
    ambient_dim: usize,
    /// Interleaved vertex coordinates, `num_vertices × ambient_dim`.
    positions: Vec<f64>,
    topology: Arc<MeshTopology>,
}

/// Summary statistics and validity flags produced by [`ImmersedMesh::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeshQualityReport {
    pub min_angle: f64,
    pub max_valence: usize,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub num_faces: usize,
    pub euler_characteristic: i64,
    pub is_closed: bool,
    pub is_oriented: bool,
}

impl ImmersedMesh {
    /// Build a mesh from interleaved positions and face triples, deriving the
    /// adjacency tables. Fails on out-of-range or repeated indices; closure
    /// and orientation are checked later by [`validate`](Self::validate) so
    /// that defective meshes can still be inspected.
    pub fn new(
        ambient_dim: usize,
        positions: Vec<f64>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        if ambient_dim < 3 {
            return Err(MeshError::AmbientDimensionTooSmall(ambient_dim));
        }
        if faces.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        if positions.len() % ambient_dim != 0 {
            return Err(MeshError::PositionLengthMismatch {
                len: positions.len(),
                dim: ambient_dim,
            });
        }
        let nv = positions.len() / ambient_dim;
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) {
                return Err(MeshError::InvalidFace {
                    face: fi,
                    reason: format!("vertex index out of range (nv = {nv})"),
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::InvalidFace {
                    face: fi,
                    reason: "duplicate vertex within face".into(),
                });
            }
        }
        let topology = Arc::new(MeshTopology::build(nv, faces));
        Ok(Self {
            ambient_dim,
            positions,
            topology,
        })
    }

    /// Same connectivity, new positions.
    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self, MeshError> {
        if positions.len() != self.positions.len() {
            return Err(MeshError::PositionLengthMismatch {
                len: positions.len(),
                dim: self.ambient_dim,
            });
        }
        Ok(Self {
            ambient_dim: self.ambient_dim,
            positions,
            topology: Arc::clone(&self.topology),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_vertices(&self) -> usize {
        self.topology.num_vertices
    }

    pub fn num_faces(&self) -> usize {
        self.topology.faces.len()
    }

    pub fn num_edges(&self) -> usize {
        self.topology.edges.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> &[f64] {
        &self.positions[v * self.ambient_dim..(v + 1) * self.ambient_dim]
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.topology.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.topology.edges
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.topology.face_edges
    }

    pub fn vertex_neighbors(&self, v: usize) -> &[u32] {
        &self.topology.vertex_neighbors[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[u32] {
        &self.topology.vertex_faces[v]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.topology.faces[f];
        let u = sub(self.position(b), self.position(a));
        let v = sub(self.position(c), self.position(a));
        triangle_area_from_edges(&u, &v)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_faces()).map(|f| self.face_area(f)).sum()
    }

    pub fn face_barycenter(&self, f: usize) -> Vec<f64> {
        let [a, b, c] = self.topology.faces[f];
        let (pa, pb, pc) = (self.position(a), self.position(b), self.position(c));
        (0..self.ambient_dim)
            .map(|d| (pa[d] + pb[d] + pc[d]) / 3.0)
            .collect()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.topology
            .edges
            .iter()
            .map(|&[a, b]| dist2(self.position(a), self.position(b)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bounding_box_diagonal(&self) -> f64 {
        let dim = self.ambient_dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in self.positions.chunks_exact(dim) {
            for d in 0..dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        lo.iter()
            .zip(hi.iter())
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    /// Unweighted vertex centroid.
    pub fn centroid(&self) -> Vec<f64> {
        let dim = self.ambient_dim;
        let nv = self.num_vertices() as f64;
        let mut c = vec![0.0; dim];
        for p in self.positions.chunks_exact(dim) {
            for d in 0..dim {
                c[d] += p[d];
            }
        }
        for v in c.iter_mut() {
            *v /= nv;
        }
        c
    }

    /// Check closure, orientation and face non-degeneracy, and gather the
    /// quality report. Never mutates the mesh; returns the first structural
    /// failure as an error.
    pub fn validate(&self) -> Result<MeshQualityReport, MeshError> {
        let report = self.quality_report();
        if !self.topology.is_closed() {
            let e = self.topology.first_boundary_edge().unwrap_or([0, 0]);
            return Err(MeshError::NotClosed(e[0], e[1]));
        }
        if !self.topology.is_oriented() {
            let e = self.topology.first_misoriented_edge().unwrap_or([0, 0]);
            return Err(MeshError::NotOriented(e[0], e[1]));
        }
        let eps = AREA_EPS_REL * self.bounding_box_diagonal().powi(2);
        for f in 0..self.num_faces() {
            let area = self.face_area(f);
            if area < eps {
                return Err(MeshError::DegenerateFace { face: f, area, eps });
            }
        }
        Ok(report)
    }

    /// The report alone, with validity encoded as flags.
    pub fn quality_report(&self) -> MeshQualityReport {
        let t = &self.topology;
        let mut min_angle = f64::INFINITY;
        for f in 0..self.num_faces() {
            let [a, b, c] = t.faces[f];
            let (pa, pb, pc) = (self.position(a), self.position(b), self.position(c));
            min_angle = min_angle
                .min(corner_angle(pa, pb, pc))
                .min(corner_angle(pb, pc, pa))
                .min(corner_angle(pc, pa, pb));
        }
        MeshQualityReport {
            min_angle,
            max_valence: t.vertex_neighbors.iter().map(Vec::len).max().unwrap_or(0),
            num_vertices: t.num_vertices,
            num_edges: t.edges.len(),
            num_faces: t.faces.len(),
            euler_characteristic: t.num_vertices as i64 - t.edges.len() as i64
                + t.faces.len() as i64,
            is_closed: t.is_closed(),
            is_oriented: t.is_oriented(),
        }
    }

    /// Smallest face area, used by the flow loop to catch collapse.
    pub fn min_face_area(&self) -> f64 {
        (0..self.num_faces())
            .map(|f| self.face_area(f))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn degenerate_face_threshold(&self) -> f64 {
        AREA_EPS_REL * self.bounding_box_diagonal().powi(2)
    }
}

/// Angle at `apex` in the triangle (`apex`, `b`, `c`).
pub(crate) fn corner_angle(apex: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u = sub(b, apex);
    let v = sub(c, apex);
    let nu = dot(&u, &u).sqrt();
    let nv = dot(&v, &v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot(&u, &v) / (nu * nv)).clamp(-1.0, 1.0).acos()
}

impl MeshTopology {
    fn build(num_vertices: usize, faces: Vec<[usize; 3]>) -> Self {
        // Undirected edge table with ids; per-face edge ids opposite corners.
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut face_edges = vec![[0usize; 3]; faces.len()];
        let mut directed: HashMap<(usize, usize), u32> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let a = f[(k + 1) % 3];
                let b = f[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                face_edges[fi][k] = id;
                *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }

        let mut vertex_faces = vec![Vec::new(); num_vertices];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi as u32);
            }
        }
        let mut vertex_neighbors = vec![Vec::new(); num_vertices];
        for &[a, b] in &edges {
            vertex_neighbors[a].push(b as u32);
            vertex_neighbors[b].push(a as u32);
        }
        for nbrs in vertex_neighbors.iter_mut() {
            nbrs.sort_unstable();
        }

        // Edge usage histogram for closure/orientation flags.
        let mut boundary = None;
        let mut misoriented = None;
        let mut usage: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
        for (&(a, b), &count) in &directed {
            let key = (a.min(b), a.max(b));
            let entry = usage.entry(key).or_insert((0, 0));
            if (a, b) == key {
                entry.0 += count;
            } else {
                entry.1 += count;
            }
            if count > 1 && misoriented.is_none() {
                misoriented = Some([a, b]);
            }
        }
        for (&(a, b), &(fwd, bwd)) in &usage {
            if fwd + bwd != 2 && boundary.is_none() {
                boundary = Some([a, b]);
            }
            if (fwd != 1 || bwd != 1) && fwd + bwd == 2 && misoriented.is_none() {
                misoriented = Some([a, b]);
            }
        }

        Self {
            faces,
            edges,
            face_edges,
            vertex_faces,
            vertex_neighbors,
            num_vertices,
            boundary_edge: boundary,
            misoriented_edge: misoriented,
        }
    }

    fn is_closed(&self) -> bool {
        self.boundary_edge.is_none()
    }

    fn is_oriented(&self) -> bool {
        self.misoriented_edge.is_none()
    }

    fn first_boundary_edge(&self) -> Option<[usize; 2]> {
        self.boundary_edge
    }

    fn first_misoriented_edge(&self) -> Option<[usize; 2]> {
        self.misoriented_edge
    }
}

//! Blowup rescaling about developing singularities and roundness reports.

use serde::Serialize;

use crate::error::AnalysisError;
use crate::linalg::dist2;
use crate::mesh::ImmersedMesh;
use crate::ops;

/// `(positions − x) / r`; connectivity unchanged.
pub fn rescale_about(mesh: &ImmersedMesh, x: &[f64], r: f64) -> Result<ImmersedMesh, AnalysisError> {
    if r <= 0.0 {
        return Err(AnalysisError::InvalidArgument(format!(
            "rescale radius must be positive, got {r}"
        )));
    }
    let dim = mesh.ambient_dim();
    if x.len() != dim {
        return Err(AnalysisError::InvalidArgument(format!(
            "rescale center has {} coordinates, mesh is {dim}-dimensional",
            x.len()
        )));
    }
    let positions = mesh
        .positions()
        .chunks_exact(dim)
        .flat_map(|p| p.iter().zip(x.iter()).map(|(a, b)| (a - b) / r))
        .collect();
    Ok(mesh.with_positions(positions)?)
}

/// Least-squares sphere through a point cloud in `R^N`.
#[derive(Debug, Clone, Serialize)]
pub struct SphereFit {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Root-mean-square of `|p − center| − radius`.
    pub rms: f64,
}

/// Algebraic sphere fit: `|p|² = 2⟨c, p⟩ + (R² − |c|²)` is linear in the
/// unknowns, so one dense solve gives center and radius.
pub fn fit_sphere(positions: &[f64], dim: usize) -> SphereFit {
    use nalgebra::{DMatrix, DVector};
    let n = positions.len() / dim;
    let mut ata = DMatrix::<f64>::zeros(dim + 1, dim + 1);
    let mut atb = DVector::<f64>::zeros(dim + 1);
    for p in positions.chunks_exact(dim) {
        let norm_sq: f64 = p.iter().map(|x| x * x).sum();
        let mut row = Vec::with_capacity(dim + 1);
        row.extend(p.iter().map(|&x| 2.0 * x));
        row.push(1.0);
        for i in 0..=dim {
            for j in 0..=dim {
                ata[(i, j)] += row[i] * row[j];
            }
            atb[i] += row[i] * norm_sq;
        }
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .unwrap_or_else(|| DVector::zeros(dim + 1));
    let center: Vec<f64> = sol.iter().take(dim).copied().collect();
    let c_sq: f64 = center.iter().map(|x| x * x).sum();
    let radius = (sol[dim] + c_sq).max(0.0).sqrt();
    let mut rms = 0.0;
    for p in positions.chunks_exact(dim) {
        let d = dist2(p, &center).sqrt() - radius;
        rms += d * d;
    }
    SphereFit {
        center,
        radius,
        rms: (rms / n as f64).sqrt(),
    }
}

/// One rescaled-singularity record.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupRecord {
    /// First time the concentration at radius `r` exceeded the threshold.
    pub t: f64,
    /// Concentration radius.
    pub r: f64,
    /// Maximizing ball center.
    pub x: Vec<f64>,
    /// `∫|A°|² dμ` of the rescaled mesh (scale invariant).
    pub tracefree_energy: f64,
    /// RMS residual of the best-fit sphere through the rescaled vertices.
    pub sphere_rms: f64,
    /// Index of the source snapshot.
    pub snapshot_index: usize,
    /// The rescaled mesh itself.
    #[serde(skip)]
    pub rescaled: ImmersedMesh,
}

/// For each radius in the schedule, find the first snapshot whose
/// concentration exceeds `eps3`, rescale about the maximizing center and
/// report roundness. The default schedule is geometric with factor ½
/// starting from the first snapshot's largest small radius.
pub fn blowup_report(
    snapshots: &[(f64, ImmersedMesh)],
    eps3: f64,
    schedule: Option<&[f64]>,
    eps1: f64,
) -> Result<Vec<BlowupRecord>, AnalysisError> {
    if snapshots.is_empty() {
        return Err(AnalysisError::InvalidArgument(
            "no snapshots supplied".into(),
        ));
    }
    let fields: Vec<_> = snapshots
        .iter()
        .map(|(_, m)| ops::curvature_field(m))
        .collect::<Result<_, _>>()?;

    let default_schedule;
    let radii: &[f64] = match schedule {
        Some(r) => r,
        None => {
            let rho0 = super::largest_small_radius(&snapshots[0].1, &fields[0], eps1);
            let floor = snapshots
                .last()
                .map(|(_, m)| m.min_edge_length())
                .unwrap_or(0.0);
            let mut r = rho0 * 0.5;
            let mut v = Vec::new();
            while r > floor && v.len() < 40 {
                v.push(r);
                r *= 0.5;
            }
            default_schedule = v;
            &default_schedule
        }
    };

    let mut records = Vec::new();
    for &r in radii {
        let mut hit = None;
        for (idx, ((t, mesh), field)) in snapshots.iter().zip(fields.iter()).enumerate() {
            let (eta, center) = super::concentration_argmax(mesh, field, r, None);
            if eta > eps3 {
                hit = Some((idx, *t, center));
                break;
            }
        }
        let Some((idx, t, center)) = hit else {
            continue;
        };
        let rescaled = rescale_about(&snapshots[idx].1, &center, r)?;
        let rescaled_field = ops::curvature_field(&rescaled)?;
        let rescaled_ops = ops::build_operators(&rescaled)?;
        let tracefree_energy = rescaled_ops.integrate(rescaled_field.norm_ao_sq());
        let fit = fit_sphere(rescaled.positions(), rescaled.ambient_dim());
        records.push(BlowupRecord {
            t,
            r,
            x: center,
            tracefree_energy,
            sphere_rms: fit.rms,
            snapshot_index: idx,
            rescaled,
        });
    }
    if records.is_empty() {
        return Err(AnalysisError::RadiusScheduleExhausted);
    }
    Ok(records)
}

//! Scalar functionals, quantitative decay bounds as runtime checks,
//! concentration and lifespan diagnostics, blowup rescaling, and the
//! numerical inequality bench.

mod blowup;
mod concentration;
mod inequalities;

pub use blowup::{blowup_report, fit_sphere, rescale_about, BlowupRecord, SphereFit};
pub use concentration::{
    concentration, concentration_argmax, concentration_sequential, largest_small_radius,
    lifespan_constant_fit, predicted_lifespan,
};
pub use inequalities::{
    gradient_domination_check, mss_check, random_bumps, seeded_bump, GradientDominationReport,
    MssReport, MSS_CONSTANT_N2,
};

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::ops::{CurvatureField, OperatorCache};

/// Area of the unit `n`-sphere, `n ∈ {2, 3, 4}`.
pub fn unit_sphere_area(n: u32) -> Result<f64, AnalysisError> {
    use std::f64::consts::PI;
    match n {
        2 => Ok(4.0 * PI),
        3 => Ok(2.0 * PI * PI),
        4 => Ok(8.0 * PI * PI / 3.0),
        other => Err(AnalysisError::UnsupportedDimension(other)),
    }
}

/// Sharp area-decay constant `C_n = 4·ωₙ^{4/n}·n²`; `C₂ = 256π²`.
pub fn area_decay_constant(n: u32) -> Result<f64, AnalysisError> {
    let omega = unit_sphere_area(n)?;
    let nf = n as f64;
    Ok(4.0 * omega.powf(4.0 / nf) * nf * nf)
}

/// Energy floor of the total mean curvature for closed surfaces,
/// `∫|H|² dμ ≥ 16π` with equality on round spheres.
pub fn chen_energy_floor() -> f64 {
    16.0 * std::f64::consts::PI
}

/// Thresholds that the continuum theory leaves non-explicit, exposed as
/// configuration with stated defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Constants {
    /// Concentration threshold for the lifespan bound (default 1.0).
    pub eps1: f64,
    /// Tracefree-energy smallness threshold; must stay below `8π`
    /// (default `0.9·8π`).
    pub eps2: f64,
    /// Lifespan constant in `T ≥ ρ⁴/c` (default 1.0).
    pub c_lifespan: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            eps1: 1.0,
            eps2: 0.9 * 8.0 * std::f64::consts::PI,
            c_lifespan: 1.0,
        }
    }
}

/// One time-series row of scalar functionals along a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Discrete area `μ`.
    pub area: f64,
    /// `μ^{4/n}`; `μ²` for surfaces.
    pub area_power: f64,
    /// `∫|H|² dμ`.
    pub energy_h2: f64,
    /// `∫|A|² dμ`.
    pub energy_a2: f64,
    /// `∫|A°|² dμ`.
    pub energy_ao2: f64,
    /// `∫|H|² dμ − 16π`.
    pub chen_residual: f64,
    /// `(μ(0)² − C₂t) − μ(t)²`.
    pub area_bound_residual: f64,
    /// Largest radius with concentration below `ε₁`, when sampled.
    pub rho_star: Option<f64>,
    /// Concentration at `rho_star`, when sampled.
    pub eta_at_rho: Option<f64>,
    pub h_min: f64,
    pub max_abs_a: f64,
}

impl DiagnosticsRecord {
    /// CSV header, fixed column order.
    pub const CSV_HEADER: &'static str = "t,area,area_sq,energy_H2,energy_A2,energy_Ao2,chen_residual,area_bound_residual,rho_star,eta_at_rho,h_min,max_abs_A";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.17e}"),
            None => "nan".to_string(),
        };
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{:.17e},{:.17e}",
            self.t,
            self.area,
            self.area_power,
            self.energy_h2,
            self.energy_a2,
            self.energy_ao2,
            self.chen_residual,
            self.area_bound_residual,
            opt(self.rho_star),
            opt(self.eta_at_rho),
            self.h_min,
            self.max_abs_a,
        )
    }
}

/// Functionals of a standalone snapshot (time zero, residual against its own
/// area).
pub fn diagnostics(
    field: &CurvatureField,
    ops: &OperatorCache,
    constants: &Constants,
) -> DiagnosticsRecord {
    let area = ops.total_area();
    diagnostics_at(field, ops, constants, 0.0, area * area, f64::NAN)
}

/// Functionals of a snapshot inside a run: `t` is the simulation clock,
/// `initial_area_sq` is `μ(0)²` and `h_min` the current minimum edge length
/// (pass `NaN` to have it recomputed).
pub fn diagnostics_at(
    field: &CurvatureField,
    ops: &OperatorCache,
    _constants: &Constants,
    t: f64,
    initial_area_sq: f64,
    h_min: f64,
) -> DiagnosticsRecord {
    let area = ops.total_area();
    let energy_h2 = ops.integrate(field.norm_h_sq());
    let energy_a2 = ops.integrate(field.norm_a_sq());
    let energy_ao2 = ops.integrate(field.norm_ao_sq());
    let c2 = 256.0 * std::f64::consts::PI * std::f64::consts::PI;
    DiagnosticsRecord {
        t,
        area,
        area_power: area * area,
        energy_h2,
        energy_a2,
        energy_ao2,
        chen_residual: energy_h2 - chen_energy_floor(),
        area_bound_residual: (initial_area_sq - c2 * t) - area * area,
        rho_star: None,
        eta_at_rho: None,
        h_min: if h_min.is_nan() {
            ops.min_edge_length()
        } else {
            h_min
        },
        max_abs_a: field.max_abs_a(),
    }
}

/// Upper bound on the maximal existence time, `μ₀^{4/n} / C_n`.
pub fn extinction_upper_bound(mu0: f64, n: u32) -> Result<f64, AnalysisError> {
    if mu0 < 0.0 {
        return Err(AnalysisError::InvalidArgument(format!(
            "area must be nonnegative, got {mu0}"
        )));
    }
    Ok(mu0.powf(4.0 / n as f64) / area_decay_constant(n)?)
}

/// Radius of the shrinking sphere, `(r₀⁴ − 4n²t)^{1/4}`.
pub fn sphere_radius_at(r0: f64, n: u32, t: f64) -> Result<f64, AnalysisError> {
    let extinction = r0.powi(4) / (4.0 * (n * n) as f64);
    if t < 0.0 || t > extinction {
        return Err(AnalysisError::BeyondExtinction { t, extinction });
    }
    Ok((r0.powi(4) - 4.0 * (n * n) as f64 * t).max(0.0).powf(0.25))
}

/// Result of the sharp area-decay check along a run.
#[derive(Debug, Clone, Copy)]
pub struct AreaDecayReport {
    pub pass: bool,
    /// Minimal slack margin `(μ₀² − C₂t + slack) − μ(t)²`; nonnegative when
    /// the bound holds.
    pub worst_margin: f64,
}

/// Verify `μ(t)² ≤ μ(0)² − C₂·t + 0.02·μ(0)²` at every sample.
pub fn area_decay_check(records: &[DiagnosticsRecord], _constants: &Constants) -> AreaDecayReport {
    let Some(first) = records.first() else {
        return AreaDecayReport {
            pass: true,
            worst_margin: f64::INFINITY,
        };
    };
    let mu0_sq = first.area_power;
    let slack = 0.02 * mu0_sq;
    let c2 = 256.0 * std::f64::consts::PI * std::f64::consts::PI;
    let mut worst = f64::INFINITY;
    for r in records {
        let margin = (mu0_sq - c2 * r.t + slack) - r.area_power;
        worst = worst.min(margin);
    }
    AreaDecayReport {
        pass: worst >= 0.0,
        worst_margin: worst,
    }
}

/// Result of the tracefree-energy monotonicity check.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityReport {
    pub pass: bool,
    /// Largest relative uptick between consecutive samples.
    pub worst_uptick: f64,
}

/// Check that `∫|A°|² dμ` is nonincreasing along the run, allowing relative
/// upticks of `1e−3` per sample. Errors when the initial energy already
/// exceeds `eps2`, in which case the continuum lemma gives no guarantee.
pub fn tracefree_monotonicity_check(
    records: &[DiagnosticsRecord],
    eps2: f64,
) -> Result<MonotonicityReport, AnalysisError> {
    const UPTICK_TOL: f64 = 1e-3;
    let Some(first) = records.first() else {
        return Ok(MonotonicityReport {
            pass: true,
            worst_uptick: 0.0,
        });
    };
    if first.energy_ao2 > eps2 {
        return Err(AnalysisError::PreconditionViolated {
            initial: first.energy_ao2,
            threshold: eps2,
        });
    }
    let mut worst: f64 = 0.0;
    for pair in records.windows(2) {
        let prev = pair[0].energy_ao2;
        let next = pair[1].energy_ao2;
        if prev > 0.0 {
            worst = worst.max((next - prev) / prev);
        }
    }
    Ok(MonotonicityReport {
        pass: worst <= UPTICK_TOL,
        worst_uptick: worst,
    })
}

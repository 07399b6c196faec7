//! Time integration of the velocity family `F = Δ⊥H + cubic term` with step
//! control and termination detection.
//!
//! Two integrators are provided. The semi-implicit position scheme treats
//! the full bilaplacian implicitly with the metric frozen per step,
//! `(M + τ·L₀M⁻¹L₀) f⁺ = M f`, which is unconditionally linearly stable and
//! is exact about the lower-order terms for the chen family (they enter
//! through `L₀` acting on `f`). The explicit normal scheme moves vertices by
//! the projected velocity and exercises the Willmore and surface-diffusion
//! variants, which are not linear in `f`.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, Constants, DiagnosticsRecord};
use crate::error::FlowError;
use crate::linalg::cg_interleaved;
use crate::mesh::ImmersedMesh;
use crate::ops::{
    self, build_operators, curvature_field, q_endomorphism, q_endomorphism_tracefree,
    CurvatureField, OperatorCache,
};

/// Relative residual target of the semi-implicit linear solve.
pub const CF_SOLVE_TOL: f64 = 1e-10;
/// Iteration budget of the conjugate-gradient solver.
pub const CF_SOLVE_MAX_ITER: usize = 2000;

/// Velocity family `F = Δ⊥H + P₃⁰(A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowFamily {
    /// `F = Δ⊥H − Q(A)H`; the normal form of `∂t f = −Δ²f`.
    Chen,
    /// `F = Δ⊥H + Q(A°)H`.
    Willmore,
    /// `F = Δ⊥H`.
    SurfaceDiffusion,
}

impl FlowFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowFamily::Chen => "chen",
            FlowFamily::Willmore => "willmore",
            FlowFamily::SurfaceDiffusion => "surface_diffusion",
        }
    }
}

impl std::str::FromStr for FlowFamily {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chen" => Ok(FlowFamily::Chen),
            "willmore" => Ok(FlowFamily::Willmore),
            "surface_diffusion" => Ok(FlowFamily::SurfaceDiffusion),
            other => Err(format!("unknown flow family `{other}`")),
        }
    }
}

/// Time integrator choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    CfSemiimplicit,
    NcfExplicit,
}

impl Integrator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Integrator::CfSemiimplicit => "cf_semiimplicit",
            Integrator::NcfExplicit => "ncf_explicit",
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cf_semiimplicit" => Ok(Integrator::CfSemiimplicit),
            "ncf_explicit" => Ok(Integrator::NcfExplicit),
            other => Err(format!("unknown integrator `{other}`")),
        }
    }
}

/// Run configuration; field names double as the config-file keys.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlowConfig {
    pub family: FlowFamily,
    pub integrator: Integrator,
    /// Dimensionless step-scale σ in the fourth-order CFL heuristic.
    pub tau_scale: f64,
    /// Hard cap on the step size.
    pub tau_max: f64,
    /// Steps between operator-cache rebuilds.
    pub rebuild_every: usize,
    pub max_steps: usize,
    /// Terminate `Extinct` when the area falls below this fraction of the
    /// initial area.
    pub stop_area_fraction: f64,
    /// Terminate `SingularityDetected` when `max|A|·h_min` exceeds this.
    pub stop_max_a_h: f64,
    /// Steps between diagnostics records (and snapshots).
    pub diag_every: usize,
    /// Sample `ρ*` every this many diagnostics records (0 disables).
    pub rho_every: usize,
    pub constants: Constants,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            family: FlowFamily::Chen,
            integrator: Integrator::CfSemiimplicit,
            tau_scale: 0.1,
            tau_max: f64::INFINITY,
            rebuild_every: 1,
            max_steps: 1_000_000,
            stop_area_fraction: 0.01,
            stop_max_a_h: 5.0,
            diag_every: 50,
            rho_every: 0,
            constants: Constants::default(),
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Extinct,
    SingularityDetected,
    StepBudget,
    SolverFailure,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Extinct => "extinct",
            Termination::SingularityDetected => "singularity_detected",
            Termination::StepBudget => "step_budget",
            Termination::SolverFailure => "solver_failure",
        }
    }
}

/// One frame of a trajectory: mesh plus clock, step index and caches.
#[derive(Debug)]
pub struct FlowState {
    pub mesh: ImmersedMesh,
    pub t: f64,
    pub step: usize,
    pub ops: OperatorCache,
    pub field: CurvatureField,
    pub termination: Option<Termination>,
}

impl FlowState {
    /// Validate the mesh and build the caches.
    pub fn new(mesh: ImmersedMesh) -> Result<Self, FlowError> {
        mesh.validate()?;
        let ops = build_operators(&mesh)?;
        let field = curvature_field(&mesh)?;
        Ok(Self {
            mesh,
            t: 0.0,
            step: 0,
            ops,
            field,
            termination: None,
        })
    }

    fn rebuild_ops(&mut self) -> Result<(), FlowError> {
        self.ops = build_operators(&self.mesh)?;
        Ok(())
    }

    fn rebuild_field(&mut self) -> Result<(), FlowError> {
        self.field = curvature_field(&self.mesh)?;
        Ok(())
    }

    fn ensure_active(&self) -> Result<(), FlowError> {
        if let Some(term) = &self.termination {
            return Err(FlowError::AlreadyTerminated(term.as_str().to_string()));
        }
        Ok(())
    }
}

/// The flow velocity `F` with sign convention `∂t f = −F`: the normal
/// projection of the componentwise `ΔΔf` equals `Δ⊥H − Q(A)H`, to which the
/// family-specific cubic correction is added.
pub fn velocity(
    mesh: &ImmersedMesh,
    ops: &OperatorCache,
    field: &CurvatureField,
    family: FlowFamily,
) -> Vec<f64> {
    let dim = mesh.ambient_dim();
    let nv = mesh.num_vertices();
    let mut h_lap = vec![0.0; nv * dim];
    ops.apply_laplacian(mesh.positions(), &mut h_lap, dim);
    let mut f = vec![0.0; nv * dim];
    ops.apply_laplacian(&h_lap, &mut f, dim);
    for v in 0..nv {
        field
            .frames()
            .project_normal(v, &mut f[v * dim..(v + 1) * dim]);
    }
    match family {
        FlowFamily::Chen => {}
        FlowFamily::SurfaceDiffusion => {
            let q = q_endomorphism(field, field.h_ambient());
            for (fi, qi) in f.iter_mut().zip(q.iter()) {
                *fi += qi;
            }
        }
        FlowFamily::Willmore => {
            let q = q_endomorphism(field, field.h_ambient());
            let qo = q_endomorphism_tracefree(field, field.h_ambient());
            for ((fi, qi), qoi) in f.iter_mut().zip(q.iter()).zip(qo.iter()) {
                *fi += qi + qoi;
            }
        }
    }
    f
}

/// Fourth-order CFL heuristic: `τ = min(τ_max, σ·h_min⁴)` for the
/// semi-implicit scheme, additionally damped by `1/(1 + (h_min·max|A|)⁴)`
/// for the explicit one.
pub fn choose_tau(state: &FlowState, config: &FlowConfig) -> f64 {
    let h_min = state.mesh.min_edge_length();
    let base = config.tau_scale * h_min.powi(4);
    match config.integrator {
        Integrator::CfSemiimplicit => config.tau_max.min(base),
        Integrator::NcfExplicit => {
            let a_h = h_min * state.field.max_abs_a();
            config.tau_max.min(base / (1.0 + a_h.powi(4)))
        }
    }
}

/// One explicit step of the purely normal flow: `positions ← positions − τF`,
/// caches rebuilt. `τ = 0` leaves the state unchanged.
pub fn step_ncf(state: &mut FlowState, tau: f64, family: FlowFamily) -> Result<(), FlowError> {
    state.ensure_active()?;
    if tau < 0.0 {
        return Err(FlowError::NonPositiveStep(tau));
    }
    if tau == 0.0 {
        return Ok(());
    }
    let positions = ncf_positions(state, tau, family);
    advance(state, positions, tau)?;
    state.rebuild_ops()?;
    state.rebuild_field()?;
    Ok(())
}

fn ncf_positions(state: &FlowState, tau: f64, family: FlowFamily) -> Vec<f64> {
    let f = velocity(&state.mesh, &state.ops, &state.field, family);
    state
        .mesh
        .positions()
        .iter()
        .zip(f.iter())
        .map(|(p, fi)| p - tau * fi)
        .collect()
}

/// One semi-implicit step of the position form `∂t f = −Δ²f` (chen only):
/// solve `(M + τ·L₀M⁻¹L₀) f⁺ = M f` per ambient coordinate to relative
/// residual `1e−10`, metric frozen at the current step.
pub fn step_cf(state: &mut FlowState, tau: f64, family: FlowFamily) -> Result<(), FlowError> {
    state.ensure_active()?;
    if family != FlowFamily::Chen {
        return Err(FlowError::IntegratorFamilyMismatch(
            family.as_str().to_string(),
        ));
    }
    if tau < 0.0 {
        return Err(FlowError::NonPositiveStep(tau));
    }
    if tau == 0.0 {
        return Ok(());
    }
    let positions = cf_solve(&state.mesh, &state.ops, tau, None)?;
    advance(state, positions, tau)?;
    state.rebuild_ops()?;
    state.rebuild_field()?;
    Ok(())
}

fn advance(state: &mut FlowState, positions: Vec<f64>, tau: f64) -> Result<(), FlowError> {
    state.mesh = state.mesh.with_positions(positions)?;
    state.t += tau;
    state.step += 1;
    Ok(())
}

/// Solve the semi-implicit system, returning the new interleaved positions.
fn cf_solve(
    mesh: &ImmersedMesh,
    ops: &OperatorCache,
    tau: f64,
    guess: Option<&[f64]>,
) -> Result<Vec<f64>, FlowError> {
    let dim = mesh.ambient_dim();
    let nv = mesh.num_vertices();
    let mass = ops.mass();
    let stiffness = ops.stiffness();

    let mut b = vec![0.0; nv * dim];
    for (i, &m) in mass.iter().enumerate() {
        for c in 0..dim {
            b[i * dim + c] = m * mesh.positions()[i * dim + c];
        }
    }

    // Jacobi diagonal of M + τ·L₀M⁻¹L₀ (the product diagonal is exact).
    let mut inv_diag = vec![0.0; nv];
    for i in 0..nv {
        let (cols, vals) = stiffness.row(i);
        let mut d2 = 0.0;
        for (c, v) in cols.iter().zip(vals.iter()) {
            d2 += v * v / mass[*c as usize];
        }
        inv_diag[i] = 1.0 / (mass[i] + tau * d2);
    }

    let scratch = RefCell::new((vec![0.0; nv * dim], vec![0.0; nv * dim]));
    let apply = |x: &[f64], y: &mut [f64]| {
        let (ref mut t1, ref mut t2) = *scratch.borrow_mut();
        stiffness.mul_interleaved(x, t1, dim);
        for (i, &m) in mass.iter().enumerate() {
            for c in 0..dim {
                t1[i * dim + c] /= m;
            }
        }
        stiffness.mul_interleaved(t1, t2, dim);
        for (i, &m) in mass.iter().enumerate() {
            for c in 0..dim {
                y[i * dim + c] = m * x[i * dim + c] + tau * t2[i * dim + c];
            }
        }
    };

    let mut x = match guess {
        Some(g) => g.to_vec(),
        None => mesh.positions().to_vec(),
    };
    cg_interleaved(
        apply,
        &b,
        &mut x,
        dim,
        &inv_diag,
        CF_SOLVE_TOL,
        CF_SOLVE_MAX_ITER,
    )
    .map_err(FlowError::SolverFailure)?;
    Ok(x)
}

/// A persisted frame of the trajectory.
#[derive(Debug, Clone)]
pub struct FlowSnapshot {
    pub step: usize,
    pub t: f64,
    pub mesh: ImmersedMesh,
}

/// Everything a finished run hands to analysis and persistence.
#[derive(Debug)]
pub struct FlowTrajectory {
    pub snapshots: Vec<FlowSnapshot>,
    pub records: Vec<DiagnosticsRecord>,
    pub termination: Termination,
    /// Human-readable cause for solver failures.
    pub termination_detail: Option<String>,
    pub initial_area: f64,
    pub final_state: FlowState,
}

impl FlowTrajectory {
    /// `(t, ρ*)` samples available in the records.
    pub fn rho_samples(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.rho_star.map(|rho| (r.t, rho)))
            .collect()
    }
}

/// Iterate `choose_tau` + step until extinction, singularity, solver failure
/// or the step budget. Snapshots and diagnostics are persisted every
/// `diag_every` steps; errors surface in the termination, never as panics.
pub fn run_flow(mesh: ImmersedMesh, config: &FlowConfig) -> Result<FlowTrajectory, FlowError> {
    let mut state = FlowState::new(mesh)?;
    let initial_area = state.ops.total_area();
    let area_floor = config.stop_area_fraction * initial_area;
    let degenerate_floor = state.mesh.degenerate_face_threshold();

    let mut snapshots = Vec::new();
    let mut records = Vec::new();
    let mut diag_count = 0usize;
    let mut prev_positions: Option<Vec<f64>> = None;

    macro_rules! record_now {
        ($state:expr) => {{
            let mut rec = analysis::diagnostics_at(
                &$state.field,
                &$state.ops,
                &config.constants,
                $state.t,
                initial_area * initial_area,
                $state.mesh.min_edge_length(),
            );
            if config.rho_every > 0 && diag_count % config.rho_every == 0 {
                let rho =
                    analysis::largest_small_radius(&$state.mesh, &$state.field, config.constants.eps1);
                rec.rho_star = Some(rho);
                rec.eta_at_rho =
                    Some(analysis::concentration(&$state.mesh, &$state.field, rho, None));
            }
            diag_count += 1;
            records.push(rec);
            snapshots.push(FlowSnapshot {
                step: $state.step,
                t: $state.t,
                mesh: $state.mesh.clone(),
            });
        }};
    }

    record_now!(state);

    let mut termination_detail = None;
    let termination = loop {
        if state.step >= config.max_steps {
            break Termination::StepBudget;
        }
        let tau = choose_tau(&state, config);

        // Advance positions; stale caches within a rebuild window are the
        // documented accuracy/speed trade.
        let step_result = match config.integrator {
            Integrator::CfSemiimplicit => {
                if config.family != FlowFamily::Chen {
                    return Err(FlowError::IntegratorFamilyMismatch(
                        config.family.as_str().to_string(),
                    ));
                }
                let extrapolated = prev_positions.as_ref().map(|prev| {
                    state
                        .mesh
                        .positions()
                        .iter()
                        .zip(prev.iter())
                        .map(|(cur, old)| 2.0 * cur - old)
                        .collect::<Vec<f64>>()
                });
                cf_solve(&state.mesh, &state.ops, tau, extrapolated.as_deref())
            }
            Integrator::NcfExplicit => Ok(ncf_positions(&state, tau, config.family)),
        };
        let positions = match step_result {
            Ok(p) => p,
            Err(e) => {
                termination_detail = Some(e.to_string());
                break Termination::SolverFailure;
            }
        };
        if positions.iter().any(|p| !p.is_finite()) {
            termination_detail = Some("non-finite positions".into());
            break Termination::SolverFailure;
        }
        prev_positions = Some(state.mesh.positions().to_vec());
        if let Err(e) = advance(&mut state, positions, tau) {
            termination_detail = Some(e.to_string());
            break Termination::SolverFailure;
        }

        let rebuild_due = config.rebuild_every <= 1 || state.step % config.rebuild_every == 0;
        let diag_due = config.diag_every > 0 && state.step % config.diag_every == 0;
        let field_due = match config.integrator {
            Integrator::NcfExplicit => rebuild_due || diag_due,
            Integrator::CfSemiimplicit => diag_due,
        };
        if rebuild_due || diag_due {
            if let Err(e) = state.rebuild_ops() {
                termination_detail = Some(e.to_string());
                break Termination::SolverFailure;
            }
            if state.ops.min_face_area() < degenerate_floor {
                termination_detail = Some("degenerate face".into());
                break Termination::SolverFailure;
            }
            if state.ops.total_area() < area_floor {
                break Termination::Extinct;
            }
        }
        if field_due {
            if let Err(e) = state.rebuild_field() {
                termination_detail = Some(e.to_string());
                break Termination::SolverFailure;
            }
            if state.field.max_abs_a() * state.mesh.min_edge_length() > config.stop_max_a_h {
                if diag_due {
                    record_now!(state);
                }
                break Termination::SingularityDetected;
            }
        }
        if diag_due {
            record_now!(state);
        }
    };

    // Final frame, unless the last loop iteration just recorded it.
    if snapshots.last().map(|s| s.step) != Some(state.step) {
        let _ = state.rebuild_ops();
        let _ = state.rebuild_field();
        record_now!(state);
    }
    let _ = diag_count;
    state.termination = Some(termination);
    Ok(FlowTrajectory {
        snapshots,
        records,
        termination,
        termination_detail,
        initial_area,
        final_state: state,
    })
}

/// Rebuild caches for an arbitrary mesh and return `(ops, field)`; shared by
/// callers that analyse snapshots.
pub fn snapshot_caches(
    mesh: &ImmersedMesh,
) -> Result<(OperatorCache, CurvatureField), FlowError> {
    Ok((build_operators(mesh)?, ops::curvature_field(mesh)?))
}

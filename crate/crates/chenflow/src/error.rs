//! Error types for the mesh, operator, flow and analysis layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("ambient dimension {0} is below 3")]
    AmbientDimensionTooSmall(usize),
    #[error("position buffer length {len} is not a multiple of ambient dimension {dim}")]
    PositionLengthMismatch { len: usize, dim: usize },
    #[error("face {face} is invalid: {reason}")]
    InvalidFace { face: usize, reason: String },
    #[error("boundary edge ({0}, {1}): mesh is not closed")]
    NotClosed(usize, usize),
    #[error("edge ({0}, {1}) traversed twice in the same direction: orientation is inconsistent")]
    NotOriented(usize, usize),
    #[error("face {face} is degenerate (area {area:.3e} below threshold {eps:.3e})")]
    DegenerateFace { face: usize, area: f64, eps: f64 },
    #[error("subdivision level {0} exceeds the memory budget (max {1})")]
    LevelTooLarge(u32, u32),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: {found} coordinates in a plain OBJ; dimensions above 3 need the extended format")]
    UnsupportedDimension { line: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum OpsError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("vertex {vertex} has a rank-deficient star (colinear 1-ring)")]
    RankDeficientStar { vertex: usize },
    #[error("vertex {vertex}: {count} stencil points are not enough for a quadratic fit")]
    UnderdeterminedFit { vertex: usize, count: usize },
    #[error("vertex {vertex} has fewer than 3 neighbors")]
    StarTooSmall { vertex: usize },
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error("the semi-implicit integrator supports the chen family only, got {0}")]
    IntegratorFamilyMismatch(String),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("flow already terminated ({0})")]
    AlreadyTerminated(String),
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error("surface dimension {0} is not supported here (choose 2, 3 or 4)")]
    UnsupportedDimension(u32),
    #[error("time {t} lies beyond the extinction time {extinction}")]
    BeyondExtinction { t: f64, extinction: f64 },
    #[error("initial tracefree energy {initial:.6} exceeds the threshold {threshold:.6}")]
    PreconditionViolated { initial: f64, threshold: f64 },
    #[error("no snapshot concentrates above the threshold for any scheduled radius")]
    RadiusScheduleExhausted,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

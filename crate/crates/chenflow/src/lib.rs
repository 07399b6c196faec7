//! Discrete simulator and analysis suite for Chen's flow, the biharmonic heat
//! flow `∂t f = −Δ²f` of closed surfaces immersed in `R^N`, together with the
//! Willmore and surface-diffusion variants of the same velocity family.
//!
//! The crate is organised along the pipeline:
//!
//! * [`mesh`] — immersed triangle meshes, generators and file I/O;
//! * [`ops`] — discrete differential-geometry operators (mass/stiffness,
//!   mean curvature, second fundamental form, covariant gradients);
//! * [`flow`] — time integration with step control and termination detection;
//! * [`analysis`] — scalar functionals, decay and concentration diagnostics,
//!   blowup rescaling and the numerical inequality bench.
//!
//! All heavy kernels are data-parallel over vertices or faces. With the
//! default `parallel` feature they run on rayon; without it they fall back to
//! sequential loops. Results are identical in both modes because reductions
//! are always performed in deterministic order.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod flow;
pub mod linalg;
pub mod mesh;
pub mod ops;

pub use error::{AnalysisError, FlowError, MeshError, OpsError};
pub use mesh::{ImmersedMesh, MeshQualityReport};
pub use ops::{CurvatureField, FrameField, GradientField, OperatorCache};

//! Discrete differential-geometry operators: mass and stiffness matrices,
//! mean curvature, adapted frames, second fundamental form and derived
//! curvature quantities, the `Q(A)` endomorphism, and covariant gradients.

mod curvature;
mod frames;
mod gradient;
mod operators;

pub use curvature::{
    gauss_curvature_angle_defect, q_endomorphism, q_endomorphism_tracefree,
    second_fundamental_form, second_fundamental_form_sequential, CurvatureField,
};
pub use frames::{vertex_frames, vertex_frames_sequential, FrameField, VertexFrame};
pub use gradient::{
    covariant_gradients, covariant_gradients_sequential, face_scalar_gradient_norms,
    GradientField,
};
pub use operators::{
    build_operators, build_operators_sequential, mean_curvature_vector, OperatorCache,
    ANGLE_DEGENERATE_GAP, COT_CLAMP,
};

use crate::error::OpsError;
use crate::mesh::ImmersedMesh;

/// Convenience: frames plus curvature field in one call.
pub fn curvature_field(mesh: &ImmersedMesh) -> Result<CurvatureField, OpsError> {
    let frames = vertex_frames(mesh)?;
    second_fundamental_form(mesh, &frames)
}

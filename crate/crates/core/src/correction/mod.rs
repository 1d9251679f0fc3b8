//! Correction function near the interface: local Cauchy collocation,
//! right-hand-side corrections and corrected interpolation.

pub mod field;
pub mod interp;
pub mod patch;

pub use field::{nearest_center, rhs_correction, CorrectionField, CorrectionPlan, RADIUS_FACTOR};
pub use interp::{corrected_interpolate, InterpolationStencil};
pub use patch::{
    basis, basis_grad, collocation_matrix, solve_local_cauchy, CauchyPatch, JumpData, PatchSystem,
};

#[cfg(test)]
mod tests;

//! Linear solvers: geometric multigrid, GMRES and small dense factorizations.

pub mod dense;
pub mod gmres;
pub mod multigrid;

pub use dense::{qr_solve_small, HouseholderQr, LuFactor};
pub use gmres::{gmres, GmresConfig};
pub use multigrid::{multigrid_solve, MultigridConfig, MultigridHierarchy};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Relative 2-norm residual.
    pub final_residual: f64,
    /// Seconds.
    pub wall_time: f64,
}

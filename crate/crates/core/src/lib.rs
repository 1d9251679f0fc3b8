//! Kernel-free boundary integral solvers for elliptic boundary-value and
//! interface problems on parameterized surfaces.
//!
//! Potentials are evaluated by solving equivalent interface problems with a
//! corrected seven-point finite-difference scheme on the parameter plane, and
//! the resulting second-kind boundary integral equations are solved by GMRES.

// index loops mirror the stencil and matrix formulas; `!(x > 0.0)` is
// deliberate so NaN lands in the error branch
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bie;
pub mod correction;
pub mod error;
pub mod geometry;
pub mod grid_fd;
pub mod harness;
pub mod interface;
pub mod potentials;
pub mod solver;

pub use error::{KfbiError, Result};

//! Cartesian grids and the seven-point variable-coefficient operator.

pub mod grid;
pub mod operator;

pub use grid::{CartesianGrid, GridFunction};
pub use operator::{MMatrixReport, MixedBranch, SevenPointOperator, CENTER, OFFSETS};

use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum KfbiError {
    #[error("degenerate parameterization at ({u}, {v}): |X_u x X_v| = {norm:e}")]
    DegenerateParameterization { u: f64, v: f64, norm: f64 },

    #[error("indefinite coefficient tensor at ({x}, {y}): a11*a22 - a12^2 = {det:e}")]
    IndefiniteCoefficients { x: f64, y: f64, det: f64 },

    #[error("curve too small for the grid: {points} interface points (need at least 8)")]
    CurveTooSmall { points: usize },

    #[error("degenerate closed curve: {0}")]
    DegenerateCurve(String),

    #[error(
        "interface lies within {distance:e} of the domain boundary (need more than {limit:e})"
    )]
    InterfaceTooCloseToBoundary { distance: f64, limit: f64 },

    #[error("rank-deficient system: numerical rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("grid node {node} needs a correction value but has no patch")]
    MissingPatch { node: usize },

    #[error("not enough grid nodes around interface point {point} for interpolation")]
    InsufficientNodes { point: usize },

    #[error("multigrid did not converge in {cycles} cycles (relative residual {residual:e})")]
    MultigridNotConverged { cycles: usize, residual: f64 },

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error(
        "GMRES reached {iterations} iterations without converging (relative residual {residual:e})"
    )]
    GmresNotConverged { iterations: usize, residual: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl KfbiError {
    /// Short machine-readable tag, used by the CLI error line and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            KfbiError::DegenerateParameterization { .. } => "degenerate_parameterization",
            KfbiError::IndefiniteCoefficients { .. } => "indefinite_coefficients",
            KfbiError::CurveTooSmall { .. } => "curve_too_small",
            KfbiError::DegenerateCurve(_) => "degenerate_curve",
            KfbiError::InterfaceTooCloseToBoundary { .. } => "interface_too_close",
            KfbiError::RankDeficient { .. } => "rank_deficient",
            KfbiError::MissingPatch { .. } => "missing_patch",
            KfbiError::InsufficientNodes { .. } => "insufficient_nodes",
            KfbiError::MultigridNotConverged { .. } => "multigrid_not_converged",
            KfbiError::SingularOperator(_) => "singular_operator",
            KfbiError::GmresNotConverged { .. } => "gmres_not_converged",
            KfbiError::ShapeMismatch { .. } => "shape_mismatch",
            KfbiError::InvalidGrid(_) => "invalid_grid",
            KfbiError::InvalidProblem(_) => "invalid_problem",
            KfbiError::Config(_) => "config",
            KfbiError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, KfbiError>;

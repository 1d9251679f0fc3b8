//! Example catalog, manufactured data, convergence sweeps and reports.

pub mod catalog;
pub mod config;
pub mod manufactured;
pub mod report;
pub mod validate;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

pub use catalog::{preset, presets, ExactId, Preset, ReferenceRow};
pub use config::{check_grid_size, CurveSpec, ExperimentConfig, SurfaceSpec};
pub use manufactured::{manufacture, ManufacturedProblem, SurfaceCalculus};
pub use report::{
    dump_field, emit_table, error_norm, fill_orders, format_table, ConvergenceRow, TABLE_HEADER,
};

use crate::bie::{
    solve_dirichlet, solve_interface_equal_ratio, solve_interface_generic, solve_neumann,
    BieSolution, ProblemKind,
};
use crate::error::Result;
use crate::grid_fd::CartesianGrid;
use crate::interface::{InterfaceGeometry, Side};
use crate::potentials::PotentialContext;
use crate::solver::{GmresConfig, MultigridConfig};

/// Result of one grid level, with enough state for further checks.
#[derive(Debug)]
pub struct RunOutcome {
    pub n: usize,
    pub m: usize,
    /// Formulation actually used (equal-ratio requests with unequal ratios
    /// run the generic system).
    pub solved_as: ProblemKind,
    pub solution: BieSolution,
    pub exact: Vec<f64>,
    pub max_error: f64,
    /// Context construction plus BIE solve, in seconds.
    pub cpu_seconds: f64,
    /// Context of the `+` operator (classification, interface points).
    pub context: PotentialContext,
}

/// Builds the contexts, manufactures the data and solves on an `n × n` grid.
pub fn run_single(cfg: &ExperimentConfig, n: usize) -> Result<RunOutcome> {
    cfg.validate()?;
    config::check_grid_size(n)?;
    let surface = cfg.surface.build();
    let grid = CartesianGrid::new(&surface.domain, n)?;
    let mg = MultigridConfig {
        tol: cfg.mg_tol,
        ..Default::default()
    };
    let gm = GmresConfig {
        tol: cfg.gmres_tol,
        max_iter: cfg.gmres_max_iter,
    };
    let bvp = matches!(
        cfg.problem,
        ProblemKind::DirichletBvp | ProblemKind::NeumannBvp
    );
    let lp = cfg.kappa_plus / cfg.beta_plus;
    let lm = if bvp {
        lp
    } else {
        cfg.kappa_minus / cfg.beta_minus
    };
    let equal = (lp - lm).abs() <= 1e-12 * lp.abs().max(lm.abs()).max(f64::MIN_POSITIVE);
    let solved_as = match cfg.problem {
        ProblemKind::InterfaceEqualRatio if !equal => ProblemKind::InterfaceGeneric,
        k => k,
    };

    let start = Instant::now();
    let iface = Arc::new(InterfaceGeometry::new(&surface, cfg.curve.build(), grid.h)?);
    let ctx = PotentialContext::for_surface(&surface, iface.clone(), n, lp, mg)?;
    let ctx_minus = if solved_as == ProblemKind::InterfaceGeneric && !equal {
        Some(PotentialContext::for_surface(&surface, iface, n, lm, mg)?)
    } else {
        None
    };
    let setup = start.elapsed().as_secs_f64();

    let data = manufacture(cfg, &surface, &ctx)?;
    let mut spec = data.spec;
    spec.kind = solved_as;

    let start = Instant::now();
    let solution = match solved_as {
        ProblemKind::DirichletBvp => solve_dirichlet(&ctx, &spec, gm)?,
        ProblemKind::NeumannBvp => solve_neumann(&ctx, &spec, gm)?,
        ProblemKind::InterfaceEqualRatio => solve_interface_equal_ratio(&ctx, &spec, gm)?,
        ProblemKind::InterfaceGeneric => {
            solve_interface_generic(&ctx, ctx_minus.as_ref().unwrap_or(&ctx), &spec, gm)?
        }
    };
    let cpu_seconds = setup + start.elapsed().as_secs_f64();
    let side = if bvp { Some(Side::Plus) } else { None };
    let max_error = error_norm(&solution.u, &data.exact, &ctx.cls, side);
    Ok(RunOutcome {
        n,
        m: ctx.points(),
        solved_as,
        solution,
        exact: data.exact,
        max_error,
        cpu_seconds,
        context: ctx,
    })
}

fn to_row(n: usize, r: Result<RunOutcome>) -> ConvergenceRow {
    match r {
        Ok(o) => ConvergenceRow {
            n,
            m: o.m,
            gmres_iterations: o.solution.stats.gmres_iterations,
            cpu_seconds: o.cpu_seconds,
            max_error: o.max_error,
            observed_order: None,
            failure: None,
        },
        Err(e) => ConvergenceRow {
            n,
            m: 0,
            gmres_iterations: 0,
            cpu_seconds: 0.0,
            max_error: f64::NAN,
            observed_order: None,
            failure: Some(format!("{}: {e}", e.kind())),
        },
    }
}

/// Convergence sweep over `cfg.grids`. A failing level is recorded in its
/// row and does not stop the sweep.
pub fn run_example(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let mut rows: Vec<ConvergenceRow> = if cfg.parallel_rows {
        cfg.grids
            .par_iter()
            .map(|&n| to_row(n, run_single(cfg, n)))
            .collect()
    } else {
        cfg.grids
            .iter()
            .map(|&n| to_row(n, run_single(cfg, n)))
            .collect()
    };
    fill_orders(&mut rows);
    Ok(rows)
}

//! Self-contained property checks behind `kfbi validate`.

use std::sync::Arc;

use crate::correction::{rhs_correction, JumpData};
use crate::error::Result;
use crate::geometry::{ConstantCoefficients, ParametricSurface, Point2, SurfaceCoefficients};
use crate::grid_fd::{CartesianGrid, GridFunction, SevenPointOperator};
use crate::harness::catalog::preset;
use crate::harness::config::SurfaceSpec;
use crate::harness::run_single;
use crate::interface::{InterfaceGeometry, NodeClass, ParametricCurve, Side};
use crate::potentials::{
    double_layer, single_layer, PotentialContext, PotentialRequest, SourceTerm,
};
use crate::solver::{MultigridConfig, MultigridHierarchy};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, r: Result<(bool, String)>) -> CheckOutcome {
    match r {
        Ok((passed, detail)) => CheckOutcome {
            name,
            passed,
            detail,
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("{}: {e}", e.kind()),
        },
    }
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn plane_context(n: usize, lambda: f64, curve: ParametricCurve) -> Result<PotentialContext> {
    let plane = ParametricSurface::plane(1.0);
    let grid = CartesianGrid::new(&plane.domain, n)?;
    let iface = Arc::new(InterfaceGeometry::new(&plane, curve, grid.h)?);
    PotentialContext::for_surface(&plane, iface, n, lambda, MultigridConfig::default())
}

/// Jump-relation errors per grid size on the plane.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JumpReport {
    /// `max |[Dφ] − φ|` and `max |[∂_ν Sψ] + ψ|` combined.
    pub identity: Vec<f64>,
    /// One-sided trace error against a manufactured piecewise solution.
    pub trace: Vec<f64>,
    /// One-sided conormal-derivative error against the same solution.
    pub flux: Vec<f64>,
}

/// Piecewise solution `u⁺ = eˣ sin y`, `u⁻ = x² + y²/2 − 0.3` of
/// `Δu − λu = F` with `λ = 1` on the plane.
struct PlaneManufactured;

impl PlaneManufactured {
    const LAMBDA: f64 = 1.0;

    fn u(side: Side, p: Point2) -> f64 {
        match side {
            Side::Plus => p[0].exp() * p[1].sin(),
            Side::Minus => p[0] * p[0] + 0.5 * p[1] * p[1] - 0.3,
        }
    }

    fn grad(side: Side, p: Point2) -> Point2 {
        match side {
            Side::Plus => [p[0].exp() * p[1].sin(), p[0].exp() * p[1].cos()],
            Side::Minus => [2.0 * p[0], p[1]],
        }
    }

    fn source(side: Side, p: Point2) -> f64 {
        let lap = match side {
            Side::Plus => 0.0,
            Side::Minus => 3.0,
        };
        lap - Self::LAMBDA * Self::u(side, p)
    }

    fn jumps(ctx: &PotentialContext) -> JumpData {
        let pts = &ctx.iface.points.points;
        let (p, m) = (Side::Plus, Side::Minus);
        JumpData {
            phi: pts
                .iter()
                .map(|q| Self::u(p, q.xi) - Self::u(m, q.xi))
                .collect(),
            psi: pts
                .iter()
                .map(|q| {
                    q.conormal_derivative(Self::grad(p, q.xi))
                        - q.conormal_derivative(Self::grad(m, q.xi))
                })
                .collect(),
            fbar: pts
                .iter()
                .map(|q| Self::source(p, q.xi) - Self::source(m, q.xi))
                .collect(),
        }
    }

    fn nodal(ctx: &PotentialContext, f: impl Fn(Side, Point2) -> f64) -> Vec<f64> {
        (0..ctx.grid.len())
            .map(|k| f(ctx.side(k), ctx.grid.node_point(k)))
            .collect()
    }
}

/// Jump identities of the double and single layer plus one-sided accuracy
/// of the potential solve, on an ellipse in the plane.
pub fn jump_relations(sizes: &[usize]) -> Result<JumpReport> {
    let density = |p: Point2| (p[0] + 0.3).exp() * (2.0 * p[1]).cos();
    let mut report = JumpReport::default();
    for &n in sizes {
        let ctx = plane_context(
            n,
            PlaneManufactured::LAMBDA,
            ParametricCurve::ellipse(0.6, 0.4, 0.3),
        )?;
        let pts = &ctx.iface.points.points;
        let dens: Vec<f64> = pts.iter().map(|q| density(q.xi)).collect();
        let d = double_layer(&ctx, &dens)?;
        let s = single_layer(&ctx, &dens)?;
        let neg: Vec<f64> = dens.iter().map(|v| -v).collect();
        report
            .identity
            .push(max_abs_diff(&d.trace_jump(), &dens).max(max_abs_diff(&s.dnu_jump(), &neg)));

        let jumps = PlaneManufactured::jumps(&ctx);
        let source = SourceTerm {
            nodal: PlaneManufactured::nodal(&ctx, PlaneManufactured::source),
            jump: jumps.fbar.clone(),
        };
        let boundary = GridFunction::from_values(
            ctx.grid,
            PlaneManufactured::nodal(&ctx, PlaneManufactured::u),
        )?;
        let req = PotentialRequest::default()
            .with_source(source)
            .with_phi(jumps.phi)
            .with_psi(jumps.psi)
            .with_boundary(boundary);
        let r = ctx.solve(&req)?;
        let (mut te, mut fe) = (0.0_f64, 0.0_f64);
        for (l, q) in pts.iter().enumerate() {
            for (side, tr, dn) in [
                (Side::Plus, r.trace_plus[l], r.dnu_plus[l]),
                (Side::Minus, r.trace_minus[l], r.dnu_minus[l]),
            ] {
                te = te.max((tr - PlaneManufactured::u(side, q.xi)).abs());
                fe =
                    fe.max((dn - q.conormal_derivative(PlaneManufactured::grad(side, q.xi))).abs());
            }
        }
        report.trace.push(te);
        report.flux.push(fe);
    }
    Ok(report)
}

fn check_jumps() -> Result<(bool, String)> {
    let r = jump_relations(&[64, 128, 256])?;
    let identity = r.identity.iter().cloned().fold(0.0, f64::max);
    let (ot, of) = (order(r.trace[1], r.trace[2]), order(r.flux[1], r.flux[2]));
    Ok((
        identity <= 1e-10 && ot >= 1.7 && of >= 1.7,
        format!(
            "identity {identity:.1e}; trace {:.2e}/{:.2e}/{:.2e} order {ot:.2}; flux {:.2e}/{:.2e}/{:.2e} order {of:.2}",
            r.trace[0], r.trace[1], r.trace[2], r.flux[0], r.flux[1], r.flux[2]
        ),
    ))
}

/// Max local truncation error of the corrected scheme over regular and
/// irregular nodes for a manufactured piecewise solution on the plane.
pub fn corrected_truncation(n: usize) -> Result<(f64, f64)> {
    let ctx = plane_context(
        n,
        PlaneManufactured::LAMBDA,
        ParametricCurve::star(0.5, 0.5, 0.2, 0.15, 3),
    )?;
    let field = ctx.plan.field(&PlaneManufactured::jumps(&ctx))?;
    let d = rhs_correction(&ctx.op, &ctx.cls, &field)?;
    let exact = GridFunction::from_values(
        ctx.grid,
        PlaneManufactured::nodal(&ctx, PlaneManufactured::u),
    )?;
    let source = PlaneManufactured::nodal(&ctx, PlaneManufactured::source);
    let lu = ctx.op.apply(&exact)?;
    let bc = ctx.op.boundary_contribution(&exact);
    let (mut reg, mut irr) = (0.0_f64, 0.0_f64);
    for k in ctx.grid.interior() {
        let tau =
            (lu.values[k] + bc.values[k] - ctx.source_scale[k] * source[k] - d.values[k]).abs();
        match ctx.cls.node_class[k] {
            NodeClass::Irregular => irr = irr.max(tau),
            NodeClass::Regular => reg = reg.max(tau),
            NodeClass::Boundary => {}
        }
    }
    Ok((reg, irr))
}

fn check_truncation() -> Result<(bool, String)> {
    let (r1, i1) = corrected_truncation(64)?;
    let (r2, i2) = corrected_truncation(128)?;
    let (orr, oi) = (order(r1, r2), order(i1, i2));
    Ok((
        orr >= 1.7 && oi >= 0.8,
        format!(
            "regular {r1:.2e}→{r2:.2e} order {orr:.2}; irregular {i1:.2e}→{i2:.2e} order {oi:.2}"
        ),
    ))
}

/// Exactness for a quadratic correction function and the largest patch
/// condition number on the helicoid.
pub fn patch_reproduction() -> Result<(f64, f64)> {
    let plane = ParametricSurface::plane(1.0);
    let field = ConstantCoefficients {
        a11: 1.2,
        a12: -0.3,
        a22: 0.8,
        a: 0.0,
    };
    let grid = CartesianGrid::new(&plane.domain, 64)?;
    let iface = Arc::new(InterfaceGeometry::new(
        &plane,
        ParametricCurve::ellipse(0.6, 0.4, 0.3),
        grid.h,
    )?);
    let ctx = PotentialContext::new(&field, 0.0, iface, grid, MultigridConfig::default())?;
    let c = |p: Point2| {
        1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[0] - 0.3 * p[1] * p[1] + 0.7 * p[0] * p[1]
    };
    let grad = |p: Point2| [2.0 + p[0] + 0.7 * p[1], -1.0 - 0.6 * p[1] + 0.7 * p[0]];
    let lc = 1.2 * 1.0 + 0.8 * (-0.6) + 2.0 * (-0.3) * 0.7;
    let pts = &ctx.iface.points.points;
    let jumps = JumpData {
        phi: pts.iter().map(|q| c(q.xi)).collect(),
        psi: pts
            .iter()
            .map(|q| q.conormal_derivative(grad(q.xi)))
            .collect(),
        fbar: vec![lc; pts.len()],
    };
    let f = ctx.plan.field(&jumps)?;
    let mut err: f64 = 0.0;
    for node in ctx.plan.covered_nodes() {
        err = err.max((f.value(node)? - c(grid.node_point(node))).abs());
    }
    for (l, patch) in f.patches.iter().enumerate() {
        for q in [pts[l].xi, pts[(l + 1) % pts.len()].xi] {
            err = err.max((patch.eval(q) - c(q)).abs());
        }
    }

    let heli = SurfaceSpec::Helicoid { half_width: 1.0 }.build();
    let hgrid = CartesianGrid::new(&heli.domain, 128)?;
    let hiface = Arc::new(InterfaceGeometry::new(
        &heli,
        ParametricCurve::circle(0.5),
        hgrid.h,
    )?);
    let hctx = PotentialContext::for_surface(&heli, hiface, 128, 1.0, MultigridConfig::default())?;
    Ok((err, hctx.plan.max_condition()))
}

fn check_patches() -> Result<(bool, String)> {
    let (err, cond) = patch_reproduction()?;
    Ok((
        err <= 1e-9 && cond <= 1e5,
        format!("quadratic reproduction {err:.2e}; max condition {cond:.3e}"),
    ))
}

fn check_mmatrix() -> Result<(bool, String)> {
    let surface = SurfaceSpec::ShearedCubic { half_width: 1.0 }.build();
    let grid = CartesianGrid::new(&surface.domain, 32)?;
    let field = SurfaceCoefficients {
        surface,
        lambda: 5.0,
    };
    let report = SevenPointOperator::build(grid, &field)?.mmatrix_diagnostics();
    Ok((report.is_m_matrix(), format!("{report:?}")))
}

fn check_periodic_multigrid() -> Result<(bool, String)> {
    let mut detail = Vec::new();
    let mut ok = true;
    for spec in [
        SurfaceSpec::Torus {
            major: 2.0,
            minor: 0.8,
        },
        SurfaceSpec::Dupin {
            a: 1.0,
            b: 1.0,
            c: -0.3,
            d: 0.5,
        },
    ] {
        let surface = spec.build();
        let grid = CartesianGrid::new(&surface.domain, 128)?;
        let field = SurfaceCoefficients {
            surface,
            lambda: 0.5,
        };
        let hier = MultigridHierarchy::build(grid, &field, MultigridConfig::default())?;
        let rhs = GridFunction::from_fn(grid, |p| (p[0]).sin() * (2.0 * p[1]).cos() + 0.1);
        let (_, stats) = hier.solve(&rhs)?;
        ok &= stats.final_residual <= 1e-10;
        detail.push(format!(
            "{:.2e} in {} cycles",
            stats.final_residual, stats.iterations
        ));
    }
    Ok((ok, format!("torus {}; cyclide {}", detail[0], detail[1])))
}

/// GMRES iteration counts of `name` over `sizes`.
pub fn iteration_counts(name: &str, sizes: &[usize]) -> Result<Vec<usize>> {
    let cfg = preset(name)
        .ok_or_else(|| crate::KfbiError::Config(format!("unknown preset {name}")))?
        .config;
    sizes
        .iter()
        .map(|&n| run_single(&cfg, n).map(|o| o.solution.stats.gmres_iterations))
        .collect()
}

fn check_iterations() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["ex1-dirichlet", "ex1-neumann"] {
        let it = iteration_counts(name, &[32, 64, 128, 256])?;
        let spread = it.iter().max().unwrap_or(&0) - it.iter().min().unwrap_or(&0);
        ok &= spread <= 5;
        detail.push(format!("{name} {it:?}"));
    }
    Ok((ok, detail.join("; ")))
}

/// Runs every check; none of them aborts the others.
pub fn property_suite() -> Vec<CheckOutcome> {
    vec![
        outcome("jump_relations", check_jumps()),
        outcome("corrected_truncation", check_truncation()),
        outcome("patch_reproduction", check_patches()),
        outcome("mmatrix", check_mmatrix()),
        outcome("periodic_multigrid", check_periodic_multigrid()),
        outcome("gmres_iterations", check_iterations()),
    ]
}

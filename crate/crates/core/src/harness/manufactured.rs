use rayon::prelude::*;

use crate::bie::{PiecewiseSource, ProblemKind, ProblemSpec};
use crate::error::Result;
use crate::geometry::{pullback_coefficients, ParametricSurface, Point2};
use crate::grid_fd::GridFunction;
use crate::harness::config::ExperimentConfig;
use crate::interface::Side;
use crate::potentials::PotentialContext;

/// Differentiation step relative to the parameter-domain extent.
pub const FD_STEP_FACTOR: f64 = 1e-3;

/// Fourth-order central-difference derivative of `f` along `dir`.
fn d4(f: &dyn Fn(Point2) -> f64, p: Point2, dir: usize, s: f64) -> f64 {
    let at = |k: f64| {
        let mut q = p;
        q[dir] += k * s;
        f(q)
    };
    (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * s)
}

/// Surface gradient and Laplace–Beltrami operator by finite differences in
/// parameter coordinates.
#[derive(Debug, Clone)]
pub struct SurfaceCalculus<'a> {
    pub surface: &'a ParametricSurface,
    pub step: f64,
}

impl<'a> SurfaceCalculus<'a> {
    pub fn new(surface: &'a ParametricSurface) -> Self {
        SurfaceCalculus {
            surface,
            step: FD_STEP_FACTOR * surface.domain.extent(),
        }
    }

    pub fn param_gradient(&self, f: &dyn Fn(Point2) -> f64, p: Point2) -> Point2 {
        [d4(f, p, 0, self.step), d4(f, p, 1, self.step)]
    }

    /// `Δ_S f = (1/√g) ∂_i(√g g^ij ∂_j f)`.
    pub fn laplace_beltrami(&self, f: &dyn Fn(Point2) -> f64, p: Point2) -> Result<f64> {
        let s = self.step;
        let flux = |q: Point2, i: usize| -> Result<f64> {
            let c = pullback_coefficients(self.surface, q, 0.0)?;
            let g = self.param_gradient(f, q);
            Ok(if i == 0 {
                c.a11 * g[0] + c.a12 * g[1]
            } else {
                c.a12 * g[0] + c.a22 * g[1]
            })
        };
        let mut div = 0.0;
        for i in 0..2 {
            let at = |k: f64| {
                let mut q = p;
                q[i] += k * s;
                flux(q, i)
            };
            div += (8.0 * (at(1.0)? - at(-1.0)?) - (at(2.0)? - at(-2.0)?)) / (12.0 * s);
        }
        Ok(div / pullback_coefficients(self.surface, p, 0.0)?.source_scale)
    }
}

/// Manufactured problem data on one grid plus the exact piecewise solution.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub spec: ProblemSpec,
    /// Exact value of the owning side at every node.
    pub exact: Vec<f64>,
}

/// Applies `β Δ_S − κ`, traces and conormal fluxes to the exact solution.
pub fn manufacture(
    cfg: &ExperimentConfig,
    surface: &ParametricSurface,
    ctx: &PotentialContext,
) -> Result<ManufacturedProblem> {
    let calc = SurfaceCalculus::new(surface);
    let exact = cfg.exact;
    let u = |side: Side| move |p: Point2| exact.eval(side, surface.embed(p), p);
    let (up, um) = (u(Side::Plus), u(Side::Minus));
    let bvp = matches!(
        cfg.problem,
        ProblemKind::DirichletBvp | ProblemKind::NeumannBvp
    );
    let (kp, km) = (
        cfg.kappa_plus,
        if bvp { cfg.kappa_plus } else { cfg.kappa_minus },
    );
    let (bp, bm) = (
        cfg.beta_plus,
        if bvp { cfg.beta_plus } else { cfg.beta_minus },
    );
    // BVPs solve only the + side; its solution is sampled on both sides of the curve
    let um_eff = move |p: Point2| if bvp { up(p) } else { um(p) };
    let source = |side: Side, p: Point2| -> Result<f64> {
        Ok(match side {
            Side::Plus => bp * calc.laplace_beltrami(&up, p)? - kp * up(p),
            Side::Minus => bm * calc.laplace_beltrami(&um_eff, p)? - km * um_eff(p),
        })
    };

    let grid = ctx.grid;
    let nodal = (0..grid.len())
        .into_par_iter()
        .map(|k| source(ctx.side(k), grid.node_point(k)))
        .collect::<Result<Vec<_>>>()?;
    let pts = &ctx.iface.points.points;
    let plus = pts
        .par_iter()
        .map(|q| source(Side::Plus, q.xi))
        .collect::<Result<Vec<_>>>()?;
    let minus = pts
        .par_iter()
        .map(|q| source(Side::Minus, q.xi))
        .collect::<Result<Vec<_>>>()?;
    let flux_p: Vec<f64> = pts
        .iter()
        .map(|q| q.conormal_derivative(calc.param_gradient(&up, q.xi)))
        .collect();
    let flux_m: Vec<f64> = pts
        .iter()
        .map(|q| q.conormal_derivative(calc.param_gradient(&um_eff, q.xi)))
        .collect();

    let (g1, g2, boundary) = match cfg.problem {
        ProblemKind::DirichletBvp => (pts.iter().map(|q| up(q.xi)).collect(), vec![], None),
        ProblemKind::NeumannBvp => (flux_p.iter().map(|v| bp * v).collect(), vec![], None),
        ProblemKind::InterfaceEqualRatio | ProblemKind::InterfaceGeneric => {
            let g1 = pts.iter().map(|q| up(q.xi) - um(q.xi)).collect();
            let g2 = flux_p
                .iter()
                .zip(&flux_m)
                .map(|(a, b)| bp * a - bm * b)
                .collect();
            let boundary = if grid.is_fully_periodic() {
                None
            } else {
                Some(GridFunction::from_fn(grid, um))
            };
            (g1, g2, boundary)
        }
    };
    let exact_nodal = (0..grid.len())
        .map(|k| {
            let p = grid.node_point(k);
            match ctx.side(k) {
                Side::Plus => up(p),
                Side::Minus => um_eff(p),
            }
        })
        .collect();
    Ok(ManufacturedProblem {
        spec: ProblemSpec {
            kind: cfg.problem,
            kappa_plus: cfg.kappa_plus,
            kappa_minus: cfg.kappa_minus,
            beta_plus: cfg.beta_plus,
            beta_minus: cfg.beta_minus,
            g1,
            g2,
            source: PiecewiseSource { nodal, plus, minus },
            boundary,
        },
        exact: exact_nodal,
    })
}

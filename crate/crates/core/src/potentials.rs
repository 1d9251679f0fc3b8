//! Kernel-free layer and volume potentials.
//!
//! A potential is evaluated by solving the equivalent interface problem
//! `Δ_S u − λu = F` with prescribed jumps `[u] = Φ`, `[ν·∇_S u] = Ψ` on the
//! grid, then reading one-sided traces and conormal derivatives at the
//! interface points. `+` is the enclosed side and jumps are `+` minus `−`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::correction::{
    corrected_interpolate, rhs_correction, CorrectionPlan, InterpolationStencil, JumpData,
};
use crate::error::{KfbiError, Result};
use crate::geometry::{CoefficientField, ParametricSurface, Point2, SurfaceCoefficients};
use crate::grid_fd::{CartesianGrid, GridFunction, SevenPointOperator};
use crate::interface::{classify_nodes, InterfaceGeometry, NodeClassification, Side};
use crate::solver::{MultigridConfig, MultigridHierarchy, SolveStats};

/// Everything that depends only on geometry, grid and `λ`: operator,
/// multigrid hierarchy, classification, factored collocation patches and
/// interpolation weights.
pub struct PotentialContext {
    pub lambda: f64,
    pub grid: CartesianGrid,
    pub iface: Arc<InterfaceGeometry>,
    pub op: SevenPointOperator,
    pub cls: NodeClassification,
    pub hierarchy: MultigridHierarchy,
    pub plan: CorrectionPlan,
    pub stencils: Vec<InterpolationStencil>,
    /// `√g` at every node.
    pub source_scale: Vec<f64>,
}

impl std::fmt::Debug for PotentialContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialContext")
            .field("lambda", &self.lambda)
            .field("n", &self.grid.n)
            .field("points", &self.iface.len())
            .field("irregular", &self.cls.irregular.len())
            .finish()
    }
}

impl PotentialContext {
    /// Context for `Δ_S − λ` on `surface`.
    pub fn for_surface(
        surface: &ParametricSurface,
        iface: Arc<InterfaceGeometry>,
        n: usize,
        lambda: f64,
        mg: MultigridConfig,
    ) -> Result<Self> {
        let grid = CartesianGrid::new(&surface.domain, n)?;
        let field = SurfaceCoefficients {
            surface: surface.clone(),
            lambda,
        };
        Self::new(&field, lambda, iface, grid, mg)
    }

    /// Context for an arbitrary coefficient field; `lambda` is recorded for reporting.
    pub fn new(
        field: &dyn CoefficientField,
        lambda: f64,
        iface: Arc<InterfaceGeometry>,
        grid: CartesianGrid,
        mg: MultigridConfig,
    ) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(KfbiError::InvalidProblem(format!(
                "reaction ratio must be ≥ 0, got {lambda}"
            )));
        }
        let op = SevenPointOperator::build(grid, field)?;
        let cls = classify_nodes(&iface.spline, &op)?;
        let hierarchy = MultigridHierarchy::from_operator(&op, field, mg)?;
        let stencils = (0..iface.len())
            .into_par_iter()
            .map(|l| InterpolationStencil::new(&grid, &iface, l, 1))
            .collect::<Result<Vec<_>>>()?;
        let plan = CorrectionPlan::new(field, &iface, grid, &cls.z_set)?;
        let source_scale = (0..grid.len())
            .into_par_iter()
            .map(|k| field.source_scale(grid.node_point(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PotentialContext {
            lambda,
            grid,
            iface,
            op,
            cls,
            hierarchy,
            plan,
            stencils,
            source_scale,
        })
    }

    pub fn points(&self) -> usize {
        self.iface.len()
    }

    pub fn side(&self, node: usize) -> Side {
        self.cls.side[node]
    }

    /// Solves the equivalent interface problem for `req`.
    pub fn solve(&self, req: &PotentialRequest) -> Result<PotentialResult> {
        let m = self.points();
        let grid = self.grid;
        let take = |v: &Option<Vec<f64>>| -> Result<Vec<f64>> {
            match v {
                Some(v) if v.len() != m => Err(KfbiError::ShapeMismatch {
                    expected: m,
                    got: v.len(),
                }),
                Some(v) => Ok(v.clone()),
                None => Ok(vec![0.0; m]),
            }
        };
        let jumps = JumpData {
            phi: take(&req.phi)?,
            psi: take(&req.psi)?,
            fbar: match &req.source {
                Some(s) => take(&Some(s.jump.clone()))?,
                None => vec![0.0; m],
            },
        };
        let field = self.plan.field(&jumps)?;
        let mut rhs = rhs_correction(&self.op, &self.cls, &field)?;
        if let Some(src) = &req.source {
            if src.nodal.len() != grid.len() {
                return Err(KfbiError::ShapeMismatch {
                    expected: grid.len(),
                    got: src.nodal.len(),
                });
            }
            for idx in grid.interior() {
                rhs.values[idx] += self.source_scale[idx] * src.nodal[idx];
            }
        }
        if let Some(g0) = &req.boundary {
            if g0.grid != grid {
                return Err(KfbiError::ShapeMismatch {
                    expected: grid.len(),
                    got: g0.values.len(),
                });
            }
            let bc = self.op.boundary_contribution(g0);
            for idx in grid.interior() {
                rhs.values[idx] -= bc.values[idx];
            }
        }
        let (mut u, stats) = self.hierarchy.solve(&rhs)?;
        if let Some(g0) = &req.boundary {
            for idx in 0..grid.len() {
                if grid.is_boundary(idx) {
                    u.values[idx] = g0.values[idx];
                }
            }
        }
        let sides = self
            .stencils
            .par_iter()
            .map(|st| {
                let p = corrected_interpolate(&u, &field, st, &self.cls, Side::Plus)?;
                let q = corrected_interpolate(&u, &field, st, &self.cls, Side::Minus)?;
                Ok((p, q))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PotentialResult {
            trace_plus: sides.iter().map(|s| s.0 .0).collect(),
            trace_minus: sides.iter().map(|s| s.1 .0).collect(),
            dnu_plus: sides.iter().map(|s| s.0 .1).collect(),
            dnu_minus: sides.iter().map(|s| s.1 .1).collect(),
            grid_values: u,
            stats,
        })
    }
}

/// Source of the equivalent interface problem: nodal values of `F` (each
/// node carrying its own side's value) and the jump `[F]` at interface points.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    pub nodal: Vec<f64>,
    pub jump: Vec<f64>,
}

impl SourceTerm {
    pub fn zero(ctx: &PotentialContext) -> Self {
        SourceTerm {
            nodal: vec![0.0; ctx.grid.len()],
            jump: vec![0.0; ctx.points()],
        }
    }

    /// From one-sided closures defined near and on their own side.
    pub fn from_sides(
        ctx: &PotentialContext,
        f_plus: &dyn Fn(Point2) -> f64,
        f_minus: &dyn Fn(Point2) -> f64,
    ) -> Self {
        let grid = ctx.grid;
        let nodal = (0..grid.len())
            .map(|k| {
                let p = grid.node_point(k);
                match ctx.side(k) {
                    Side::Plus => f_plus(p),
                    Side::Minus => f_minus(p),
                }
            })
            .collect();
        let jump = ctx
            .iface
            .points
            .points
            .iter()
            .map(|q| f_plus(q.xi) - f_minus(q.xi))
            .collect();
        SourceTerm { nodal, jump }
    }

    /// `f` inside, zero outside.
    pub fn interior_only(ctx: &PotentialContext, f: &dyn Fn(Point2) -> f64) -> Self {
        Self::from_sides(ctx, f, &|_| 0.0)
    }

    /// From piecewise nodal values; one-sided values at interface points are
    /// continued as constants from the nearest node of the same side.
    pub fn from_nodal(ctx: &PotentialContext, values: &GridFunction) -> Result<Self> {
        let grid = ctx.grid;
        if values.grid != grid {
            return Err(KfbiError::ShapeMismatch {
                expected: grid.len(),
                got: values.values.len(),
            });
        }
        let mut jump = Vec::with_capacity(ctx.points());
        for (l, q) in ctx.iface.points.points.iter().enumerate() {
            let (ci, cj) = grid.nearest(q.xi);
            let mut best = [(f64::INFINITY, 0.0); 2];
            for dj in -2..=2 {
                for di in -2..=2 {
                    let Some(n) = grid.wrap_index(ci + di, cj + dj) else {
                        continue;
                    };
                    let p = grid.node_point(n);
                    let d = (p[0] - q.xi[0]).hypot(p[1] - q.xi[1]);
                    let s = if ctx.side(n) == Side::Plus { 0 } else { 1 };
                    if d < best[s].0 {
                        best[s] = (d, values.values[n]);
                    }
                }
            }
            if !best[0].0.is_finite() || !best[1].0.is_finite() {
                return Err(KfbiError::InsufficientNodes { point: l });
            }
            jump.push(best[0].1 - best[1].1);
        }
        Ok(SourceTerm {
            nodal: values.values.clone(),
            jump,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        SourceTerm {
            nodal: self.nodal.iter().map(|v| v * c).collect(),
            jump: self.jump.iter().map(|v| v * c).collect(),
        }
    }
}

/// Data of one equivalent interface problem; absent parts are zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PotentialRequest {
    pub source: Option<SourceTerm>,
    /// `[u]` at interface points.
    pub phi: Option<Vec<f64>>,
    /// `[ν·∇_S u]` at interface points.
    pub psi: Option<Vec<f64>>,
    /// Dirichlet values on `∂Ω` nodes (non-periodic directions); zero if absent.
    pub boundary: Option<GridFunction>,
}

impl PotentialRequest {
    pub fn with_source(mut self, s: SourceTerm) -> Self {
        self.source = Some(s);
        self
    }

    pub fn with_phi(mut self, phi: Vec<f64>) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn with_psi(mut self, psi: Vec<f64>) -> Self {
        self.psi = Some(psi);
        self
    }

    pub fn with_boundary(mut self, g: GridFunction) -> Self {
        self.boundary = Some(g);
        self
    }
}

#[derive(Debug, Clone)]
pub struct PotentialResult {
    pub grid_values: GridFunction,
    pub trace_plus: Vec<f64>,
    pub trace_minus: Vec<f64>,
    pub dnu_plus: Vec<f64>,
    pub dnu_minus: Vec<f64>,
    /// Multigrid statistics of the underlying solve.
    pub stats: SolveStats,
}

impl PotentialResult {
    pub fn avg_trace(&self) -> Vec<f64> {
        self.trace_plus
            .iter()
            .zip(&self.trace_minus)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn avg_dnu(&self) -> Vec<f64> {
        self.dnu_plus
            .iter()
            .zip(&self.dnu_minus)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn trace_jump(&self) -> Vec<f64> {
        self.trace_plus
            .iter()
            .zip(&self.trace_minus)
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn dnu_jump(&self) -> Vec<f64> {
        self.dnu_plus
            .iter()
            .zip(&self.dnu_minus)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// `V f`: source `f`, no jumps.
pub fn volume_potential(ctx: &PotentialContext, f: SourceTerm) -> Result<PotentialResult> {
    ctx.solve(&PotentialRequest::default().with_source(f))
}

/// `S ψ`: flux jump `−ψ`.
pub fn single_layer(ctx: &PotentialContext, psi: &[f64]) -> Result<PotentialResult> {
    ctx.solve(&PotentialRequest::default().with_psi(psi.iter().map(|v| -v).collect()))
}

/// `D φ`: trace jump `φ`.
pub fn double_layer(ctx: &PotentialContext, phi: &[f64]) -> Result<PotentialResult> {
    ctx.solve(&PotentialRequest::default().with_phi(phi.to_vec()))
}

/// `Kφ`: average of the two traces of a double-layer result.
pub fn principal_value_k(double: &PotentialResult) -> Vec<f64> {
    double.avg_trace()
}

/// `K′ψ`: average conormal derivative of a single-layer result.
pub fn adjoint_kprime(single: &PotentialResult) -> Vec<f64> {
    single.avg_dnu()
}

/// `Hφ`: average conormal derivative of a double-layer result.
pub fn hypersingular_h(double: &PotentialResult) -> Vec<f64> {
    double.avg_dnu()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::ParametricCurve;

    fn plane_ctx(n: usize, lambda: f64, curve: ParametricCurve) -> PotentialContext {
        let plane = ParametricSurface::plane(1.0);
        let grid = CartesianGrid::new(&plane.domain, n).unwrap();
        let iface = Arc::new(InterfaceGeometry::new(&plane, curve, grid.h).unwrap());
        PotentialContext::for_surface(&plane, iface, n, lambda, MultigridConfig::default()).unwrap()
    }

    #[test]
    fn homogeneous_request_is_zero() {
        let ctx = plane_ctx(32, 1.0, ParametricCurve::circle(0.5));
        let r = ctx.solve(&PotentialRequest::default()).unwrap();
        assert_eq!(r.grid_values.max_abs(), 0.0);
        assert!(r.trace_plus.iter().chain(&r.dnu_minus).all(|v| *v == 0.0));
        let psi = vec![0.0; ctx.points()];
        assert_eq!(single_layer(&ctx, &psi).unwrap().grid_values.max_abs(), 0.0);
        assert_eq!(double_layer(&ctx, &psi).unwrap().grid_values.max_abs(), 0.0);
        assert!(principal_value_k(&double_layer(&ctx, &psi).unwrap())
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn manufactured_piecewise_solution_converges() {
        let curve = ParametricCurve::ellipse(0.6, 0.4, 0.4);
        let up = |p: Point2| (p[0] + 0.5 * p[1]).sin() + 2.0;
        let um = |p: Point2| p[0] * p[0] - p[1] * p[1] * p[0];
        let gp = |p: Point2| [(p[0] + 0.5 * p[1]).cos(), 0.5 * (p[0] + 0.5 * p[1]).cos()];
        let gm = |p: Point2| [2.0 * p[0] - p[1] * p[1], -2.0 * p[1] * p[0]];
        let lap_p = |p: Point2| -1.25 * (p[0] + 0.5 * p[1]).sin();
        let lap_m = |p: Point2| 2.0 - 2.0 * p[0];
        let lambda = 1.0;
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let ctx = plane_ctx(n, lambda, curve);
            let fp = |p: Point2| lap_p(p) - lambda * up(p);
            let fm = |p: Point2| lap_m(p) - lambda * um(p);
            let pts = &ctx.iface.points.points;
            let req = PotentialRequest::default()
                .with_source(SourceTerm::from_sides(&ctx, &fp, &fm))
                .with_phi(pts.iter().map(|q| up(q.xi) - um(q.xi)).collect())
                .with_psi(
                    pts.iter()
                        .map(|q| q.conormal_derivative(gp(q.xi)) - q.conormal_derivative(gm(q.xi)))
                        .collect(),
                )
                .with_boundary(GridFunction::from_fn(ctx.grid, um));
            let r = ctx.solve(&req).unwrap();
            let err = (0..ctx.grid.len())
                .map(|k| {
                    let p = ctx.grid.node_point(k);
                    let e = if ctx.side(k) == Side::Plus {
                        up(p)
                    } else {
                        um(p)
                    };
                    (r.grid_values.values[k] - e).abs()
                })
                .fold(0.0, f64::max);
            let terr = pts
                .iter()
                .zip(&r.trace_plus)
                .map(|(q, t)| (t - up(q.xi)).abs())
                .fold(0.0, f64::max);
            errs.push((err, terr));
        }
        let ratio = errs[0].0 / errs[1].0;
        assert!((3.2..=4.8).contains(&ratio), "{errs:?}");
        assert!(errs[1].1 < 1e-3, "{errs:?}");
    }

    #[test]
    fn volume_potential_recovers_manufactured_field() {
        let ctx = plane_ctx(64, 1.0, ParametricCurve::circle(0.5));
        let pi = std::f64::consts::PI;
        let w = |p: Point2| (pi * p[0]).sin() * (pi * p[1]).sin();
        let f = |p: Point2| (-2.0 * pi * pi - 1.0) * w(p);
        let r = volume_potential(&ctx, SourceTerm::from_sides(&ctx, &f, &f)).unwrap();
        let err = (0..ctx.grid.len())
            .map(|k| (r.grid_values.values[k] - w(ctx.grid.node_point(k))).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");
        let jump = r.trace_jump().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(jump < 1e-3, "{jump}");
    }

    #[test]
    fn requests_superpose() {
        let plane = ParametricSurface::plane(1.0);
        let grid = CartesianGrid::new(&plane.domain, 64).unwrap();
        let iface =
            Arc::new(InterfaceGeometry::new(&plane, ParametricCurve::circle(0.5), grid.h).unwrap());
        let mg = MultigridConfig {
            tol: 1e-14,
            ..Default::default()
        };
        let ctx = PotentialContext::for_surface(&plane, iface, 64, 2.0, mg).unwrap();
        let m = ctx.points();
        let a: Vec<f64> = (0..m).map(|l| (l as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..m).map(|l| (l as f64 * 0.7).cos()).collect();
        let ra = ctx
            .solve(&PotentialRequest::default().with_phi(a.clone()))
            .unwrap();
        let rb = ctx
            .solve(&PotentialRequest::default().with_psi(b.clone()))
            .unwrap();
        let rab = ctx
            .solve(&PotentialRequest::default().with_phi(a).with_psi(b))
            .unwrap();
        for k in 0..ctx.grid.len() {
            let s = ra.grid_values.values[k] + rb.grid_values.values[k];
            assert!((s - rab.grid_values.values[k]).abs() < 1e-10);
        }
        for l in 0..m {
            assert!((ra.dnu_plus[l] + rb.dnu_plus[l] - rab.dnu_plus[l]).abs() < 1e-9);
        }
    }
}

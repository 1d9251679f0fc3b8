//! Second-kind boundary integral equations for the BVPs and interface
//! problems, solved by GMRES with kernel-free operator applications.
//!
//! Every problem is scaled to `Δ_S u − λu = f̂` per side with `λ = κ/β` and
//! `f̂ = f/β`. The `+` side is enclosed by the interface.

use std::time::Instant;

use crate::error::{KfbiError, Result};
use crate::geometry::Point2;
use crate::grid_fd::GridFunction;
use crate::interface::Side;
use crate::potentials::{PotentialContext, PotentialRequest, PotentialResult, SourceTerm};
use crate::solver::{gmres, GmresConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    DirichletBvp,
    NeumannBvp,
    InterfaceEqualRatio,
    InterfaceGeneric,
}

/// Piecewise source: `nodal[k]` is the value of the side owning node `k`,
/// `plus`/`minus` are the one-sided values at the interface points.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSource {
    pub nodal: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl PiecewiseSource {
    pub fn zero(ctx: &PotentialContext) -> Self {
        PiecewiseSource {
            nodal: vec![0.0; ctx.grid.len()],
            plus: vec![0.0; ctx.points()],
            minus: vec![0.0; ctx.points()],
        }
    }

    pub fn from_sides(
        ctx: &PotentialContext,
        f_plus: &dyn Fn(Point2) -> f64,
        f_minus: &dyn Fn(Point2) -> f64,
    ) -> Self {
        let s = SourceTerm::from_sides(ctx, f_plus, f_minus);
        let pts = &ctx.iface.points.points;
        PiecewiseSource {
            nodal: s.nodal,
            plus: pts.iter().map(|q| f_plus(q.xi)).collect(),
            minus: pts.iter().map(|q| f_minus(q.xi)).collect(),
        }
    }

    /// `s⁺ f` on `+` nodes and `s⁻ f` on `−` nodes.
    fn scaled(&self, ctx: &PotentialContext, s_plus: f64, s_minus: f64) -> SourceTerm {
        let nodal = self
            .nodal
            .iter()
            .enumerate()
            .map(|(k, v)| match ctx.side(k) {
                Side::Plus => s_plus * v,
                Side::Minus => s_minus * v,
            })
            .collect();
        let jump = self
            .plus
            .iter()
            .zip(&self.minus)
            .map(|(p, m)| s_plus * p - s_minus * m)
            .collect();
        SourceTerm { nodal, jump }
    }

    fn check(&self, ctx: &PotentialContext) -> Result<()> {
        if self.nodal.len() != ctx.grid.len() {
            return Err(KfbiError::ShapeMismatch {
                expected: ctx.grid.len(),
                got: self.nodal.len(),
            });
        }
        for v in [&self.plus, &self.minus] {
            if v.len() != ctx.points() {
                return Err(KfbiError::ShapeMismatch {
                    expected: ctx.points(),
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// One boundary or interface problem on a fixed grid and interface.
///
/// `g1` holds `g_D`, `g_N` or the value jump `[u]`; `g2` is the flux jump
/// `[β ν·∇u]` for interface problems and empty otherwise. For BVPs only the
/// `+` coefficients and source are used.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub source: PiecewiseSource,
    /// Exterior Dirichlet values on `∂Ω` for interface problems.
    pub boundary: Option<GridFunction>,
}

impl ProblemSpec {
    pub fn lambda_plus(&self) -> f64 {
        self.kappa_plus / self.beta_plus
    }

    pub fn lambda_minus(&self) -> f64 {
        self.kappa_minus / self.beta_minus
    }

    /// `(β⁺ − β⁻)/(β⁺ + β⁻)`.
    pub fn atwood(&self) -> f64 {
        (self.beta_plus - self.beta_minus) / (self.beta_plus + self.beta_minus)
    }

    pub fn has_equal_ratio(&self) -> bool {
        let (a, b) = (self.lambda_plus(), self.lambda_minus());
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    pub fn validate(&self, ctx: &PotentialContext) -> Result<()> {
        let bad = |msg: String| Err(KfbiError::InvalidProblem(msg));
        let m = ctx.points();
        self.source.check(ctx)?;
        if self.g1.len() != m {
            return Err(KfbiError::ShapeMismatch {
                expected: m,
                got: self.g1.len(),
            });
        }
        let closed = ctx.grid.is_fully_periodic();
        match self.kind {
            ProblemKind::DirichletBvp | ProblemKind::NeumannBvp => {
                if !(self.beta_plus > 0.0) {
                    return bad(format!("β must be > 0, got {}", self.beta_plus));
                }
                if self.kind == ProblemKind::DirichletBvp && !(self.kappa_plus >= 0.0) {
                    return bad(format!("κ must be ≥ 0, got {}", self.kappa_plus));
                }
                if self.kind == ProblemKind::NeumannBvp && !(self.kappa_plus > 0.0) {
                    return bad(format!(
                        "Neumann problem needs κ > 0, got {}",
                        self.kappa_plus
                    ));
                }
            }
            ProblemKind::InterfaceEqualRatio | ProblemKind::InterfaceGeneric => {
                if self.g2.len() != m {
                    return Err(KfbiError::ShapeMismatch {
                        expected: m,
                        got: self.g2.len(),
                    });
                }
                if !(self.beta_plus > 0.0 && self.beta_minus > 0.0) {
                    return bad(format!(
                        "β± must be > 0, got {} and {}",
                        self.beta_plus, self.beta_minus
                    ));
                }
                if !(self.kappa_plus >= 0.0 && self.kappa_minus >= 0.0) {
                    return bad(format!(
                        "κ± must be ≥ 0, got {} and {}",
                        self.kappa_plus, self.kappa_minus
                    ));
                }
                if closed && self.kappa_plus == 0.0 && self.kappa_minus == 0.0 {
                    return bad("closed surface with κ⁺ = κ⁻ = 0 has a nullspace".into());
                }
                if self.kind == ProblemKind::InterfaceEqualRatio && !self.has_equal_ratio() {
                    return bad(format!(
                        "κ/β ratios differ ({} vs {}); use the generic formulation",
                        self.lambda_plus(),
                        self.lambda_minus()
                    ));
                }
            }
        }
        if let Some(g0) = &self.boundary {
            if g0.grid != ctx.grid {
                return Err(KfbiError::ShapeMismatch {
                    expected: ctx.grid.len(),
                    got: g0.values.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BieStats {
    pub gmres_iterations: usize,
    pub gmres_residual: f64,
    /// Equivalent interface problems solved, including setup and reconstruction.
    pub potential_solves: usize,
    pub multigrid_cycles: usize,
    /// Seconds spent in the solve phase.
    pub wall_time: f64,
}

/// One-sided traces and conormal derivatives of the reconstructed solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryValues {
    pub trace_plus: Vec<f64>,
    pub trace_minus: Vec<f64>,
    pub dnu_plus: Vec<f64>,
    pub dnu_minus: Vec<f64>,
}

impl From<&PotentialResult> for BoundaryValues {
    fn from(r: &PotentialResult) -> Self {
        BoundaryValues {
            trace_plus: r.trace_plus.clone(),
            trace_minus: r.trace_minus.clone(),
            dnu_plus: r.dnu_plus.clone(),
            dnu_minus: r.dnu_minus.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BieSolution {
    /// Piecewise solution: each node holds its own side's value. For BVPs
    /// only `+` nodes are meaningful.
    pub u: GridFunction,
    /// `φ`, `ψ`, or `(φ, ψ)` stacked.
    pub density: Vec<f64>,
    pub boundary_values: BoundaryValues,
    pub stats: BieStats,
}

/// Counts potential solves and multigrid cycles across a BIE solve.
#[derive(Default)]
struct Tally {
    solves: usize,
    cycles: usize,
}

impl Tally {
    fn run(&mut self, ctx: &PotentialContext, req: &PotentialRequest) -> Result<PotentialResult> {
        let r = ctx.solve(req)?;
        self.solves += 1;
        self.cycles += r.stats.iterations;
        Ok(r)
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn finish(
    u: GridFunction,
    density: Vec<f64>,
    bv: BoundaryValues,
    tally: Tally,
    g: crate::solver::SolveStats,
    start: Instant,
) -> BieSolution {
    BieSolution {
        u,
        density,
        boundary_values: bv,
        stats: BieStats {
            gmres_iterations: g.iterations,
            gmres_residual: g.final_residual,
            potential_solves: tally.solves,
            multigrid_cycles: tally.cycles,
            wall_time: start.elapsed().as_secs_f64(),
        },
    }
}

/// `(½I + K)φ`, evaluated as the inner trace of `Dφ`.
pub fn dirichlet_operator(ctx: &PotentialContext, phi: &[f64]) -> Result<Vec<f64>> {
    Ok(ctx
        .solve(&PotentialRequest::default().with_phi(phi.to_vec()))?
        .trace_plus)
}

/// `(½I − K′)ψ = −∂_ν(Sψ)⁺`.
pub fn neumann_operator(ctx: &PotentialContext, psi: &[f64]) -> Result<Vec<f64>> {
    let r = ctx.solve(&PotentialRequest::default().with_psi(psi.iter().map(|v| -v).collect()))?;
    Ok(r.dnu_plus.iter().map(|v| -v).collect())
}

/// `ψ − 2A K′ψ` with Atwood ratio `A`.
pub fn interface_equal_ratio_operator(
    ctx: &PotentialContext,
    atwood: f64,
    psi: &[f64],
) -> Result<Vec<f64>> {
    if atwood == 0.0 {
        return Ok(psi.to_vec());
    }
    let r = ctx.solve(&PotentialRequest::default().with_psi(psi.iter().map(|v| -v).collect()))?;
    Ok(psi
        .iter()
        .zip(r.avg_dnu())
        .map(|(p, k)| p - 2.0 * atwood * k)
        .collect())
}

/// Two-density operator of the generic interface system, `ρ = β⁻/β⁺`.
///
/// With `φ = u_i|Γ`, `ψ = ν·∇u_e|Γ` and the zero extensions of `u_i`, `u_e`
/// written as interface solutions of their own operators, averaging traces
/// and fluxes gives
///
/// ```text
/// φ − (T⁺ − T⁻)            = r
/// (1 + ρ)/2 ψ − (F⁺ − F⁻)  = s
/// ```
///
/// where `T±`, `F±` are average traces and fluxes of the `±` operator's
/// solution with jumps `Φ = φ` and `Ψ = ρψ` (for `+`) or `Ψ = ψ` (for `−`).
pub fn interface_generic_operator(
    ctx_plus: &PotentialContext,
    ctx_minus: &PotentialContext,
    rho: f64,
    density: &[f64],
) -> Result<Vec<f64>> {
    generic_apply(ctx_plus, ctx_minus, rho, density, &mut Tally::default())
}

fn generic_apply(
    ctx_plus: &PotentialContext,
    ctx_minus: &PotentialContext,
    rho: f64,
    density: &[f64],
    tally: &mut Tally,
) -> Result<Vec<f64>> {
    let m = ctx_plus.points();
    if density.len() != 2 * m {
        return Err(KfbiError::ShapeMismatch {
            expected: 2 * m,
            got: density.len(),
        });
    }
    let (phi, psi) = density.split_at(m);
    let rp = tally.run(
        ctx_plus,
        &PotentialRequest::default()
            .with_phi(phi.to_vec())
            .with_psi(psi.iter().map(|v| rho * v).collect()),
    )?;
    let rm = tally.run(
        ctx_minus,
        &PotentialRequest::default()
            .with_phi(phi.to_vec())
            .with_psi(psi.to_vec()),
    )?;
    let (tp, tm, fp, fm) = (rp.avg_trace(), rm.avg_trace(), rp.avg_dnu(), rm.avg_dnu());
    let mut out = Vec::with_capacity(2 * m);
    for l in 0..m {
        out.push(phi[l] - (tp[l] - tm[l]));
    }
    for l in 0..m {
        out.push(0.5 * (1.0 + rho) * psi[l] - (fp[l] - fm[l]));
    }
    Ok(out)
}

fn expect_kind(spec: &ProblemSpec, kind: ProblemKind) -> Result<()> {
    if spec.kind != kind {
        return Err(KfbiError::InvalidProblem(format!(
            "expected a {kind:?} problem, got {:?}",
            spec.kind
        )));
    }
    Ok(())
}

fn check_lambda(ctx: &PotentialContext, lambda: f64) -> Result<()> {
    if (ctx.lambda - lambda).abs() > 1e-12 * lambda.abs().max(1.0) {
        return Err(KfbiError::InvalidProblem(format!(
            "potential context built for λ = {}, problem needs λ = {lambda}",
            ctx.lambda
        )));
    }
    Ok(())
}

/// `u = Vf̂ + Dφ` with `(½I + K)φ = g_D − (Vf̂)⁺`. Only `+` nodes of `u` are meaningful.
pub fn solve_dirichlet(
    ctx: &PotentialContext,
    spec: &ProblemSpec,
    cfg: GmresConfig,
) -> Result<BieSolution> {
    expect_kind(spec, ProblemKind::DirichletBvp)?;
    spec.validate(ctx)?;
    check_lambda(ctx, spec.lambda_plus())?;
    let start = Instant::now();
    let mut tally = Tally::default();
    let f = spec.source.scaled(ctx, 1.0 / spec.beta_plus, 0.0);
    let v = tally.run(ctx, &PotentialRequest::default().with_source(f.clone()))?;
    let rhs = sub(&spec.g1, &v.trace_plus);
    let (phi, g) = gmres(
        |x| {
            let r = tally.run(ctx, &PotentialRequest::default().with_phi(x.to_vec()))?;
            Ok(r.trace_plus)
        },
        &rhs,
        cfg,
    )?;
    let u = tally.run(
        ctx,
        &PotentialRequest::default()
            .with_source(f)
            .with_phi(phi.clone()),
    )?;
    let bv = BoundaryValues::from(&u);
    Ok(finish(u.grid_values, phi, bv, tally, g, start))
}

/// `u = Vf̂ − Sψ` with `(½I − K′)ψ = g_N/β − ∂_ν(Vf̂)⁺`.
pub fn solve_neumann(
    ctx: &PotentialContext,
    spec: &ProblemSpec,
    cfg: GmresConfig,
) -> Result<BieSolution> {
    expect_kind(spec, ProblemKind::NeumannBvp)?;
    spec.validate(ctx)?;
    check_lambda(ctx, spec.lambda_plus())?;
    let start = Instant::now();
    let mut tally = Tally::default();
    let f = spec.source.scaled(ctx, 1.0 / spec.beta_plus, 0.0);
    let v = tally.run(ctx, &PotentialRequest::default().with_source(f.clone()))?;
    let rhs: Vec<f64> = spec
        .g1
        .iter()
        .zip(&v.dnu_plus)
        .map(|(g, d)| g / spec.beta_plus - d)
        .collect();
    let (psi, g) = gmres(
        |x| {
            let r = tally.run(
                ctx,
                &PotentialRequest::default().with_psi(x.iter().map(|v| -v).collect()),
            )?;
            Ok(r.dnu_plus.iter().map(|v| -v).collect())
        },
        &rhs,
        cfg,
    )?;
    let u = tally.run(
        ctx,
        &PotentialRequest::default()
            .with_source(f)
            .with_psi(psi.clone()),
    )?;
    let bv = BoundaryValues::from(&u);
    Ok(finish(u.grid_values, psi, bv, tally, g, start))
}

/// `u = Dg₁ − Sψ + Vf̂` with `ψ − 2A K′ψ = 2g₂/(β⁺+β⁻) − 2A·avg ∂_ν(Dg₁ + Vf̂)`.
/// Here `ψ = [ν·∇u]`.
pub fn solve_interface_equal_ratio(
    ctx: &PotentialContext,
    spec: &ProblemSpec,
    cfg: GmresConfig,
) -> Result<BieSolution> {
    expect_kind(spec, ProblemKind::InterfaceEqualRatio)?;
    spec.validate(ctx)?;
    check_lambda(ctx, spec.lambda_plus())?;
    let start = Instant::now();
    let mut tally = Tally::default();
    let atwood = spec.atwood();
    let f = spec
        .source
        .scaled(ctx, 1.0 / spec.beta_plus, 1.0 / spec.beta_minus);
    let mut base = PotentialRequest::default()
        .with_source(f)
        .with_phi(spec.g1.clone());
    base.boundary = spec.boundary.clone();
    let w = tally.run(ctx, &base)?;
    let bsum = spec.beta_plus + spec.beta_minus;
    let rhs: Vec<f64> = spec
        .g2
        .iter()
        .zip(w.avg_dnu())
        .map(|(g2, d)| 2.0 * g2 / bsum - 2.0 * atwood * d)
        .collect();
    let (psi, g) = gmres(
        |x| {
            if atwood == 0.0 {
                return Ok(x.to_vec());
            }
            let r = tally.run(
                ctx,
                &PotentialRequest::default().with_psi(x.iter().map(|v| -v).collect()),
            )?;
            Ok(x.iter()
                .zip(r.avg_dnu())
                .map(|(p, k)| p - 2.0 * atwood * k)
                .collect())
        },
        &rhs,
        cfg,
    )?;
    let u = tally.run(ctx, &base.with_psi(psi.clone()))?;
    let bv = BoundaryValues::from(&u);
    Ok(finish(u.grid_values, psi, bv, tally, g, start))
}

/// Generic two-density system, see [`interface_generic_operator`].
///
/// Right-hand side from `P⁺ = solve⁺(F = f̂⁺χ⁺, Ψ = g₂/β⁺)` and
/// `P⁻ = solve⁻(F = f̂⁻χ⁻, Φ = g₁, g₀)`:
/// `r = g₁/2 + T(P⁺) + T(P⁻)`, `s = −g₂/(2β⁺) + F(P⁺) + F(P⁻)`.
/// Reconstruction: `u_i = solve⁺(f̂⁺χ⁺, Φ = φ, Ψ = (g₂ + β⁻ψ)/β⁺)` and
/// `u_e = solve⁻(f̂⁻χ⁻, Φ = g₁ − φ, Ψ = −ψ, g₀)`.
pub fn solve_interface_generic(
    ctx_plus: &PotentialContext,
    ctx_minus: &PotentialContext,
    spec: &ProblemSpec,
    cfg: GmresConfig,
) -> Result<BieSolution> {
    expect_kind(spec, ProblemKind::InterfaceGeneric)?;
    spec.validate(ctx_plus)?;
    if ctx_minus.grid != ctx_plus.grid || ctx_minus.points() != ctx_plus.points() {
        return Err(KfbiError::InvalidProblem(
            "± contexts must share grid and interface".into(),
        ));
    }
    check_lambda(ctx_plus, spec.lambda_plus())?;
    check_lambda(ctx_minus, spec.lambda_minus())?;
    let start = Instant::now();
    let mut tally = Tally::default();
    let m = ctx_plus.points();
    let (bp, bm) = (spec.beta_plus, spec.beta_minus);
    let rho = bm / bp;
    let f_in = spec.source.scaled(ctx_plus, 1.0 / bp, 0.0);
    let f_out = spec.source.scaled(ctx_minus, 0.0, 1.0 / bm);

    let pp = tally.run(
        ctx_plus,
        &PotentialRequest::default()
            .with_source(f_in.clone())
            .with_psi(spec.g2.iter().map(|v| v / bp).collect()),
    )?;
    let mut pm_req = PotentialRequest::default()
        .with_source(f_out.clone())
        .with_phi(spec.g1.clone());
    pm_req.boundary = spec.boundary.clone();
    let pm = tally.run(ctx_minus, &pm_req)?;
    let (tpp, tpm, fpp, fpm) = (pp.avg_trace(), pm.avg_trace(), pp.avg_dnu(), pm.avg_dnu());
    let mut rhs = Vec::with_capacity(2 * m);
    for l in 0..m {
        rhs.push(0.5 * spec.g1[l] + tpp[l] + tpm[l]);
    }
    for l in 0..m {
        rhs.push(-0.5 * spec.g2[l] / bp + fpp[l] + fpm[l]);
    }

    let (density, g) = gmres(
        |x| generic_apply(ctx_plus, ctx_minus, rho, x, &mut tally),
        &rhs,
        cfg,
    )?;
    let (phi, psi) = density.split_at(m);

    let ui = tally.run(
        ctx_plus,
        &PotentialRequest::default()
            .with_source(f_in)
            .with_phi(phi.to_vec())
            .with_psi(
                spec.g2
                    .iter()
                    .zip(psi)
                    .map(|(g2, p)| (g2 + bm * p) / bp)
                    .collect(),
            ),
    )?;
    let mut ue_req = PotentialRequest::default()
        .with_source(f_out)
        .with_phi(spec.g1.iter().zip(phi).map(|(g1, p)| g1 - p).collect())
        .with_psi(psi.iter().map(|v| -v).collect());
    ue_req.boundary = spec.boundary.clone();
    let ue = tally.run(ctx_minus, &ue_req)?;

    let grid = ctx_plus.grid;
    let values = (0..grid.len())
        .map(|k| match ctx_plus.side(k) {
            Side::Plus => ui.grid_values.values[k],
            Side::Minus => ue.grid_values.values[k],
        })
        .collect();
    let bv = BoundaryValues {
        trace_plus: ui.trace_plus.clone(),
        trace_minus: ue.trace_minus.clone(),
        dnu_plus: ui.dnu_plus.clone(),
        dnu_minus: ue.dnu_minus.clone(),
    };
    let u = GridFunction::from_values(grid, values)?;
    Ok(finish(u, density, bv, tally, g, start))
}

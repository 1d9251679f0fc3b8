use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use kfbi::bie::{
    interface_equal_ratio_operator, solve_dirichlet, solve_interface_equal_ratio, ProblemSpec,
};
use kfbi::geometry::ParametricSurface;
use kfbi::grid_fd::{CartesianGrid, GridFunction};
use kfbi::harness::{error_norm, manufacture, preset};
use kfbi::interface::{InterfaceGeometry, ParametricCurve, Side};
use kfbi::potentials::{PotentialContext, PotentialRequest, SourceTerm};
use kfbi::solver::{GmresConfig, MultigridConfig};

fn plane_context() -> &'static PotentialContext {
    static CTX: OnceLock<PotentialContext> = OnceLock::new();
    CTX.get_or_init(|| {
        let plane = ParametricSurface::plane(1.0);
        let grid = CartesianGrid::new(&plane.domain, 32).unwrap();
        let iface = Arc::new(
            InterfaceGeometry::new(&plane, ParametricCurve::ellipse(0.55, 0.4, 0.5), grid.h)
                .unwrap(),
        );
        let mg = MultigridConfig {
            tol: 1e-14,
            ..Default::default()
        };
        PotentialContext::for_surface(&plane, iface, 32, 2.0, mg).unwrap()
    })
}

/// A request built from a handful of smooth modes with the given weights.
fn request(ctx: &PotentialContext, w: &[f64; 6]) -> PotentialRequest {
    let pts = &ctx.iface.points.points;
    let phi = pts
        .iter()
        .map(|q| w[0] + w[1] * (3.0 * q.xi[0]).sin())
        .collect();
    let psi = pts
        .iter()
        .map(|q| w[2] * q.xi[1] + w[3] * (q.xi[0] * q.xi[1]).cos())
        .collect();
    let (a, b) = (w[4], w[5]);
    let source = SourceTerm::from_sides(ctx, &move |p| a * (p[0] + p[1]).cos(), &move |p| {
        b * p[0] * p[0]
    });
    PotentialRequest::default()
        .with_phi(phi)
        .with_psi(psi)
        .with_source(source)
}

fn add(a: &PotentialRequest, b: &PotentialRequest) -> PotentialRequest {
    let sum = |x: &Option<Vec<f64>>, y: &Option<Vec<f64>>| {
        Some(
            x.as_ref()
                .unwrap()
                .iter()
                .zip(y.as_ref().unwrap())
                .map(|(p, q)| p + q)
                .collect(),
        )
    };
    let (sa, sb) = (a.source.as_ref().unwrap(), b.source.as_ref().unwrap());
    PotentialRequest::default()
        .with_phi(sum(&a.phi, &b.phi).unwrap())
        .with_psi(sum(&a.psi, &b.psi).unwrap())
        .with_source(SourceTerm {
            nodal: sa.nodal.iter().zip(&sb.nodal).map(|(p, q)| p + q).collect(),
            jump: sa.jump.iter().zip(&sb.jump).map(|(p, q)| p + q).collect(),
        })
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1e-300_f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

fn weights() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-2.0..2.0_f64)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(12) })]

    #[test]
    fn potential_solve_is_linear(wa in weights(), wb in weights()) {
        let ctx = plane_context();
        let (ra, rb) = (request(ctx, &wa), request(ctx, &wb));
        let (a, b) = (ctx.solve(&ra).unwrap(), ctx.solve(&rb).unwrap());
        let ab = ctx.solve(&add(&ra, &rb)).unwrap();
        let sum = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p + q).collect() };
        prop_assert!(rel_diff(&ab.grid_values.values, &sum(&a.grid_values.values, &b.grid_values.values)) < 1e-10);
        prop_assert!(rel_diff(&ab.trace_plus, &sum(&a.trace_plus, &b.trace_plus)) < 1e-10);
        prop_assert!(rel_diff(&ab.dnu_minus, &sum(&a.dnu_minus, &b.dnu_minus)) < 1e-10);
    }

    #[test]
    fn zero_atwood_operator_is_identity(w in prop::collection::vec(-5.0..5.0_f64, 1..4)) {
        let ctx = plane_context();
        let psi: Vec<f64> = (0..ctx.points()).map(|k| w[k % w.len()] * (k as f64 * 0.37).sin()).collect();
        prop_assert_eq!(interface_equal_ratio_operator(ctx, 0.0, &psi).unwrap(), psi);
    }

    #[test]
    fn error_norm_is_a_max_norm(offset in -3.0..3.0_f64, spike in 0.0..10.0_f64, node in 0usize..33 * 33) {
        let ctx = plane_context();
        let grid = ctx.grid;
        let exact: Vec<f64> = (0..grid.len()).map(|k| (k as f64 * 0.1).sin()).collect();
        let same = GridFunction::from_values(grid, exact.clone()).unwrap();
        prop_assert_eq!(error_norm(&same, &exact, &ctx.cls, None), 0.0);
        let shifted = GridFunction::from_values(grid, exact.iter().map(|v| v + offset).collect()).unwrap();
        prop_assert!((error_norm(&shifted, &exact, &ctx.cls, None) - offset.abs()).abs() < 1e-12);
        let mut poked = exact.clone();
        poked[node] += spike;
        let e = error_norm(&GridFunction::from_values(grid, poked).unwrap(), &exact, &ctx.cls, None);
        let expect = if grid.is_boundary(node) { 0.0 } else { spike };
        prop_assert!((e - expect).abs() < 1e-12);
        let plus_only = error_norm(&shifted, &exact, &ctx.cls, Some(Side::Plus));
        prop_assert!((plus_only - offset.abs()).abs() < 1e-12);
    }
}

fn scaled(spec: &ProblemSpec, c: f64) -> ProblemSpec {
    let mut s = spec.clone();
    s.g1.iter_mut().chain(s.g2.iter_mut()).for_each(|v| *v *= c);
    let src = &mut s.source;
    src.nodal
        .iter_mut()
        .chain(src.plus.iter_mut())
        .chain(src.minus.iter_mut())
        .for_each(|v| *v *= c);
    if let Some(b) = &mut s.boundary {
        b.values.iter_mut().for_each(|v| *v *= c);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(4) })]

    #[test]
    fn dirichlet_solution_scales_with_data(c in prop_oneof![-1e3..-1e-3_f64, 1e-3..1e3_f64]) {
        let cfg = preset("ex1-dirichlet").unwrap().config;
        let surface = cfg.surface.build();
        let grid = CartesianGrid::new(&surface.domain, 32).unwrap();
        let iface = Arc::new(InterfaceGeometry::new(&surface, cfg.curve.build(), grid.h).unwrap());
        let ctx = PotentialContext::for_surface(&surface, iface, 32, cfg.kappa_plus, MultigridConfig::default()).unwrap();
        let spec = manufacture(&cfg, &surface, &ctx).unwrap().spec;
        let gm = GmresConfig { tol: 1e-12, max_iter: 100 };
        let base = solve_dirichlet(&ctx, &spec, gm).unwrap();
        let s = solve_dirichlet(&ctx, &scaled(&spec, c), gm).unwrap();
        let expect: Vec<f64> = base.u.values.iter().map(|v| c * v).collect();
        prop_assert!(rel_diff(&s.u.values, &expect) < 1e-9);
        let dens: Vec<f64> = base.density.iter().map(|v| c * v).collect();
        prop_assert!(rel_diff(&s.density, &dens) < 1e-9);
    }

    #[test]
    fn interface_solution_scales_with_data(c in prop_oneof![-1e2..-1e-2_f64, 1e-2..1e2_f64]) {
        let cfg = preset("ex3-q-0.5").unwrap().config;
        let surface = cfg.surface.build();
        let grid = CartesianGrid::new(&surface.domain, 64).unwrap();
        let iface = Arc::new(InterfaceGeometry::new(&surface, cfg.curve.build(), grid.h).unwrap());
        let lambda = cfg.kappa_plus / cfg.beta_plus;
        let ctx = PotentialContext::for_surface(&surface, iface, 64, lambda, MultigridConfig::default()).unwrap();
        let spec = manufacture(&cfg, &surface, &ctx).unwrap().spec;
        let gm = GmresConfig { tol: 1e-12, max_iter: 100 };
        let base = solve_interface_equal_ratio(&ctx, &spec, gm).unwrap();
        let s = solve_interface_equal_ratio(&ctx, &scaled(&spec, c), gm).unwrap();
        let expect: Vec<f64> = base.u.values.iter().map(|v| c * v).collect();
        prop_assert!(rel_diff(&s.u.values, &expect) < 1e-9);
    }
}

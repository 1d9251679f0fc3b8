use std::f64::consts::PI;

use super::*;
use crate::geometry::{
    CoefficientField, ConstantCoefficients, ParamDomain, ParametricSurface, SurfaceCoefficients,
    SurfaceKind,
};
use crate::grid_fd::{CartesianGrid, GridFunction, SevenPointOperator};
use crate::interface::{
    classify_nodes, InterfaceGeometry, NodeClassification, ParametricCurve, Side,
};

struct Setup {
    grid: CartesianGrid,
    iface: InterfaceGeometry,
    op: SevenPointOperator,
    cls: NodeClassification,
    stencils: Vec<InterpolationStencil>,
    plan: CorrectionPlan,
}

fn setup(
    surface: &ParametricSurface,
    field: &dyn CoefficientField,
    curve: ParametricCurve,
    n: usize,
) -> Setup {
    let grid = CartesianGrid::new(&surface.domain, n).unwrap();
    let iface = InterfaceGeometry::new(surface, curve, grid.h).unwrap();
    let op = SevenPointOperator::build(grid, field).unwrap();
    let cls = classify_nodes(&iface.spline, &op).unwrap();
    let stencils: Vec<_> = (0..iface.len())
        .map(|l| InterpolationStencil::new(&grid, &iface, l, 1).unwrap())
        .collect();
    let mut nodes = cls.z_set.clone();
    for s in &stencils {
        nodes.extend_from_slice(&s.nodes);
    }
    let plan = CorrectionPlan::new(field, &iface, grid, &nodes).unwrap();
    Setup {
        grid,
        iface,
        op,
        cls,
        stencils,
        plan,
    }
}

/// Cauchy data of a smooth `C` with gradient and `L C` given in closed form.
fn jumps_for(
    iface: &InterfaceGeometry,
    field: &dyn CoefficientField,
    c: impl Fn([f64; 2]) -> f64,
    grad: impl Fn([f64; 2]) -> [f64; 2],
    lc: impl Fn([f64; 2]) -> f64,
) -> JumpData {
    let pts = &iface.points.points;
    JumpData {
        phi: pts.iter().map(|p| c(p.xi)).collect(),
        psi: pts
            .iter()
            .map(|p| p.conormal_derivative(grad(p.xi)))
            .collect(),
        fbar: pts
            .iter()
            .map(|p| lc(p.xi) / field.source_scale(p.xi).unwrap())
            .collect(),
    }
}

#[test]
fn homogeneous_data_gives_zero_patches() {
    let plane = ParametricSurface::plane(1.0);
    let field = SurfaceCoefficients {
        surface: plane.clone(),
        lambda: 1.0,
    };
    let s = setup(&plane, &field, ParametricCurve::circle(0.5), 32);
    let f = s.plan.field(&JumpData::zeros(s.iface.len())).unwrap();
    assert!(f.patches.iter().all(|p| p.alpha == [0.0; 6]));
    let d = rhs_correction(&s.op, &s.cls, &f).unwrap();
    assert_eq!(d.max_abs(), 0.0);
}

#[test]
fn quadratic_correction_is_reproduced() {
    let plane = ParametricSurface::plane(1.0);
    let field = ConstantCoefficients {
        a11: 1.2,
        a12: -0.3,
        a22: 0.8,
        a: 0.0,
    };
    let s = setup(&plane, &field, ParametricCurve::ellipse(0.6, 0.4, 0.3), 64);
    let c = |p: [f64; 2]| {
        1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[0] - 0.3 * p[1] * p[1] + 0.7 * p[0] * p[1]
    };
    let grad = |p: [f64; 2]| [2.0 + p[0] + 0.7 * p[1], -1.0 - 0.6 * p[1] + 0.7 * p[0]];
    let lc = |_: [f64; 2]| 1.2 * 1.0 + 0.8 * (-0.6) + 2.0 * (-0.3) * 0.7;
    let jumps = jumps_for(&s.iface, &field, c, grad, lc);
    let f = s.plan.field(&jumps).unwrap();
    for node in s.plan.covered_nodes() {
        let p = s.grid.node_point(node);
        assert!((f.value(node).unwrap() - c(p)).abs() < 1e-9);
    }
    for patch in &f.patches {
        assert!((patch.eval(patch.center) - patch.alpha[0]).abs() < 1e-15);
    }
}

#[test]
fn helicoid_patches_are_well_conditioned() {
    let surface = ParametricSurface::new(SurfaceKind::Helicoid, ParamDomain::square(1.0));
    let field = SurfaceCoefficients {
        surface: surface.clone(),
        lambda: 1.0,
    };
    let grid = CartesianGrid::new(&surface.domain, 128).unwrap();
    let iface = InterfaceGeometry::new(&surface, ParametricCurve::circle(0.5), grid.h).unwrap();
    let mut conds = Vec::new();
    for factor in [2.0, 3.0, 4.0] {
        let worst = (0..iface.len())
            .map(|l| {
                PatchSystem::build(&field, &iface, l, factor * grid.h, grid.h)
                    .unwrap()
                    .condition
            })
            .fold(0.0, f64::max);
        conds.push(worst);
    }
    assert!(conds[1] <= 1e5, "{conds:?}");
    let (lo, hi) = conds
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi / lo <= 10.0, "{conds:?}");
}

#[test]
fn correction_function_is_third_order() {
    let plane = ParametricSurface::plane(1.0);
    let field = SurfaceCoefficients {
        surface: plane.clone(),
        lambda: 1.0,
    };
    let c = |p: [f64; 2]| p[0].sin() * p[1].cos();
    let grad = |p: [f64; 2]| [p[0].cos() * p[1].cos(), -p[0].sin() * p[1].sin()];
    let lc = |p: [f64; 2]| -3.0 * c(p);
    let mut errs = Vec::new();
    for n in [64usize, 128] {
        let s = setup(
            &plane,
            &field,
            ParametricCurve::star(0.6, 0.5, 0.2, 0.1, 3),
            n,
        );
        let f = s
            .plan
            .field(&jumps_for(&s.iface, &field, c, grad, lc))
            .unwrap();
        let err = s
            .cls
            .z_set
            .iter()
            .map(|&k| (f.value(k).unwrap() - c(s.grid.node_point(k))).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    let ratio = errs[0] / errs[1];
    assert!((6.0..=10.0).contains(&ratio), "ratio {ratio} errs {errs:?}");
}

#[test]
fn unit_jump_correction_at_single_cut_node() {
    let plane = ParametricSurface::plane(1.0);
    let field = SurfaceCoefficients {
        surface: plane.clone(),
        lambda: 0.0,
    };
    let s = setup(&plane, &field, ParametricCurve::circle(0.5), 32);
    let mut jumps = JumpData::zeros(s.iface.len());
    jumps.phi.iter_mut().for_each(|v| *v = 1.0);
    let f = s.plan.field(&jumps).unwrap();
    let d = rhs_correction(&s.op, &s.cls, &f).unwrap();
    let h2 = s.grid.h * s.grid.h;
    let mut checked = 0;
    for (&idx, cut) in s.cls.irregular.iter().zip(&s.cls.stencil_cut) {
        if s.cls.side[idx] == Side::Plus && cut.len() == 1 && cut[0].0 == 5 {
            assert!((d.values[idx] + 1.0 / h2).abs() < 1e-9 / h2);
            checked += 1;
        }
    }
    assert!(checked > 0);
    for idx in s.grid.interior() {
        if !s.cls.is_irregular(idx) {
            assert_eq!(d.values[idx], 0.0);
        }
    }
}

#[test]
fn interpolation_reproduces_quadratics_and_jumps() {
    let plane = ParametricSurface::plane(1.0);
    let field = SurfaceCoefficients {
        surface: plane.clone(),
        lambda: 0.0,
    };
    let s = setup(&plane, &field, ParametricCurve::circle(0.5), 64);
    let quad = |p: [f64; 2]| 0.3 + p[0] - 2.0 * p[1] + p[0] * p[0] + 0.5 * p[0] * p[1];
    let u = GridFunction::from_fn(s.grid, quad);
    let zero = s.plan.field(&JumpData::zeros(s.iface.len())).unwrap();
    for (l, st) in s.stencils.iter().enumerate() {
        let q = s.iface.point(l);
        for side in [Side::Plus, Side::Minus] {
            let (v, _) = corrected_interpolate(&u, &zero, st, &s.cls, side).unwrap();
            assert!((v - quad(q.xi)).abs() < 1e-10);
        }
    }

    // u⁺ = x², u⁻ = x² + 1, so C = −1
    let mut jumps = JumpData::zeros(s.iface.len());
    jumps.phi.iter_mut().for_each(|v| *v = -1.0);
    let field_c = s.plan.field(&jumps).unwrap();
    let piecewise = GridFunction::from_values(
        s.grid,
        (0..s.grid.len())
            .map(|k| {
                let x = s.grid.node_point(k)[0];
                if s.cls.side[k] == Side::Plus {
                    x * x
                } else {
                    x * x + 1.0
                }
            })
            .collect(),
    )
    .unwrap();
    for (l, st) in s.stencils.iter().enumerate() {
        let x = s.iface.point(l).xi[0];
        let (vp, _) = corrected_interpolate(&piecewise, &field_c, st, &s.cls, Side::Plus).unwrap();
        let (vm, _) = corrected_interpolate(&piecewise, &field_c, st, &s.cls, Side::Minus).unwrap();
        assert!((vp - x * x).abs() < 1e-10);
        assert!((vm - x * x - 1.0).abs() < 1e-10);
    }

    let lin = GridFunction::from_fn(s.grid, |p| p[0]);
    for (l, st) in s.stencils.iter().enumerate() {
        let b = s.iface.point(l).conormal.flux;
        let (_, d) = corrected_interpolate(&lin, &zero, st, &s.cls, Side::Plus).unwrap();
        assert!((d - b[0]).abs() < 1e-8);
    }
}

#[test]
fn nearest_center_prefers_lower_index_on_ties() {
    let plane = ParametricSurface::plane(1.0);
    let iface =
        InterfaceGeometry::new(&plane, ParametricCurve::circle(0.5), 2.0 * PI / 200.0).unwrap();
    let a = iface.point(0).xi;
    let b = iface.point(1).xi;
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    assert_eq!(nearest_center(&iface, mid).0, 0);
}

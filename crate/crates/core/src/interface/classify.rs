use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{KfbiError, Result};
use crate::geometry::Point2;
use crate::grid_fd::{CartesianGrid, SevenPointOperator, OFFSETS};
use crate::interface::spline::SplineCurve;

/// `Plus` is the region enclosed by the interface, `Minus` the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Boundary,
    Regular,
    Irregular,
}

#[derive(Debug, Clone)]
pub struct NodeClassification {
    pub side: Vec<Side>,
    pub node_class: Vec<NodeClass>,
    /// Irregular nodes in increasing index order.
    pub irregular: Vec<usize>,
    /// For each entry of `irregular`: `(stencil slot, node)` of opposite-side members.
    pub stencil_cut: Vec<Vec<(usize, usize)>>,
    /// Union of all opposite-side stencil members, sorted.
    pub z_set: Vec<usize>,
}

impl NodeClassification {
    pub fn count(&self, class: NodeClass) -> usize {
        self.node_class.iter().filter(|&&c| c == class).count()
    }

    pub fn is_irregular(&self, idx: usize) -> bool {
        self.node_class[idx] == NodeClass::Irregular
    }
}

const SAMPLES_PER_SEGMENT: usize = 16;

/// x-coordinates where the spline crosses the horizontal line `y`, using the
/// half-open rule `y(θ) ≥ y` so vertices are counted once.
fn row_crossings(samples: &[(f64, Point2)], spline: &SplineCurve, y: f64) -> Vec<f64> {
    let n = samples.len();
    let mut xs = Vec::new();
    for k in 0..n {
        let (t0, p0) = samples[k];
        let (mut t1, p1) = samples[(k + 1) % n];
        if k + 1 == n {
            t1 += 2.0 * PI;
        }
        let above0 = p0[1] >= y;
        let above1 = p1[1] >= y;
        if above0 == above1 {
            continue;
        }
        let (mut lo, mut hi) = (t0, t1);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if (spline.eval(mid)[1] >= y) == above0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let t = 0.5 * (lo + hi);
        xs.push(spline.eval(t)[0]);
    }
    xs
}

fn spline_samples(spline: &SplineCurve) -> Vec<(f64, Point2)> {
    let n = spline.len() * SAMPLES_PER_SEGMENT;
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            (t, spline.eval(t))
        })
        .collect()
}

fn side_from_crossings(crossings: &[f64], x: f64, tie: f64) -> Side {
    let mut right = 0;
    for &xc in crossings {
        if (x - xc).abs() <= tie {
            return Side::Minus;
        }
        if xc > x {
            right += 1;
        }
    }
    if right % 2 == 1 {
        Side::Plus
    } else {
        Side::Minus
    }
}

/// Side of a single point by crossing number against the spline.
pub fn point_side(spline: &SplineCurve, p: Point2, tie: f64) -> Side {
    let samples = spline_samples(spline);
    side_from_crossings(&row_crossings(&samples, spline, p[1]), p[0], tie)
}

/// Checks `dist(Γ, ∂Ω) > 2h`. Periodic directions are checked against the
/// seam as well, since crossing-number classification and patch coordinates
/// assume the curve does not wrap.
fn check_boundary_clearance(spline: &SplineCurve, grid: &CartesianGrid) -> Result<()> {
    let x1 = grid.x0 + grid.n as f64 * grid.h;
    let y1 = grid.y0 + grid.n as f64 * grid.h;
    let mut dist = f64::INFINITY;
    for p in spline.polyline(SAMPLES_PER_SEGMENT) {
        dist = dist.min(p[0] - grid.x0).min(x1 - p[0]);
        dist = dist.min(p[1] - grid.y0).min(y1 - p[1]);
    }
    let limit = 2.0 * grid.h;
    if dist <= limit {
        return Err(KfbiError::InterfaceTooCloseToBoundary {
            distance: dist,
            limit,
        });
    }
    Ok(())
}

/// Assigns every node a side, marks irregular interior nodes of `op`'s
/// stencil pattern and collects the set of opposite-side stencil members.
pub fn classify_nodes(spline: &SplineCurve, op: &SevenPointOperator) -> Result<NodeClassification> {
    let grid = op.grid;
    check_boundary_clearance(spline, &grid)?;
    let samples = spline_samples(spline);
    let tie = 1e-12 * grid.h;
    let nx = grid.nx();
    let rows: Vec<Vec<Side>> = (0..grid.ny())
        .into_par_iter()
        .map(|j| {
            let y = grid.y0 + j as f64 * grid.h;
            let xs = row_crossings(&samples, spline, y);
            (0..nx)
                .map(|i| side_from_crossings(&xs, grid.x0 + i as f64 * grid.h, tie))
                .collect()
        })
        .collect();
    let side: Vec<Side> = rows.into_iter().flatten().collect();

    let mut node_class = vec![NodeClass::Boundary; grid.len()];
    let mut irregular = Vec::new();
    let mut stencil_cut = Vec::new();
    let mut in_z = vec![false; grid.len()];
    for idx in grid.interior() {
        let (i, j) = grid.ij(idx);
        let c = &op.coeffs[idx];
        let mut cut = Vec::new();
        for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
            if c[k] == 0.0 {
                continue;
            }
            if let Some(n) = grid.offset(i, j, dx, dy) {
                if side[n] != side[idx] {
                    cut.push((k, n));
                }
            }
        }
        if cut.is_empty() {
            node_class[idx] = NodeClass::Regular;
        } else {
            node_class[idx] = NodeClass::Irregular;
            for &(_, n) in &cut {
                in_z[n] = true;
            }
            irregular.push(idx);
            stencil_cut.push(cut);
        }
    }
    let z_set = (0..grid.len()).filter(|&k| in_z[k]).collect();
    Ok(NodeClassification {
        side,
        node_class,
        irregular,
        stencil_cut,
        z_set,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub theta: f64,
    pub point: Point2,
    pub distance: f64,
    pub side: Side,
    /// False when Newton failed and the sampled minimum was returned.
    pub converged: bool,
}

/// Closest spline point to `x` by Newton on `(Γ(θ) − x)·Γ'(θ) = 0`, seeded
/// from the nearest of `4M` samples.
pub fn closest_point(spline: &SplineCurve, x: Point2) -> ClosestPoint {
    let n = 4 * spline.len();
    let dt = 2.0 * PI / n as f64;
    let dist2 = |p: Point2| (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
    let mut seed = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let t = k as f64 * dt;
        let d = dist2(spline.eval(t));
        if d < best {
            best = d;
            seed = t;
        }
    }

    let mut theta = seed;
    let mut converged = false;
    for _ in 0..50 {
        let (p, d1, d2) = spline.eval_all(theta);
        let r = [p[0] - x[0], p[1] - x[1]];
        let g = r[0] * d1[0] + r[1] * d1[1];
        let gp = d1[0] * d1[0] + d1[1] * d1[1] + r[0] * d2[0] + r[1] * d2[1];
        if g.abs() < 1e-13 {
            converged = true;
            break;
        }
        if gp <= 0.0 {
            break;
        }
        let step = (g / gp).clamp(-dt, dt);
        theta -= step;
        if step.abs() < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged || dist2(spline.eval(theta)) > best {
        theta = seed;
        converged = false;
    }
    let theta = theta.rem_euclid(2.0 * PI);
    let (p, d1, _) = spline.eval_all(theta);
    let r = [x[0] - p[0], x[1] - p[1]];
    // right of a counter-clockwise tangent is outside
    let outward = r[0] * d1[1] - r[1] * d1[0];
    let distance = r[0].hypot(r[1]);
    let scale = d1[0].hypot(d1[1]);
    let side = if outward < -1e-12 * scale * distance.max(f64::MIN_POSITIVE) && distance > 0.0 {
        Side::Plus
    } else {
        Side::Minus
    };
    ClosestPoint {
        theta,
        point: p,
        distance,
        side,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConstantCoefficients, ParamDomain};
    use crate::interface::curve::{sample_knots, ParametricCurve};
    use crate::interface::spline::build_spline;

    fn setup(curve: ParametricCurve, n: usize) -> (SplineCurve, SevenPointOperator) {
        let grid = CartesianGrid::new(&ParamDomain::square(1.0), n).unwrap();
        let spline = build_spline(&sample_knots(&curve, grid.h).unwrap()).unwrap();
        let op = SevenPointOperator::build(grid, &ConstantCoefficients::laplacian()).unwrap();
        (spline, op)
    }

    #[test]
    fn circle_sides() {
        let (spline, op) = setup(ParametricCurve::circle(0.5), 32);
        let cls = classify_nodes(&spline, &op).unwrap();
        let g = op.grid;
        assert_eq!(cls.side[g.idx(16, 16)], Side::Plus);
        assert_eq!(cls.side[g.idx(28, 28)], Side::Minus);
    }

    #[test]
    fn crossing_number_agrees_with_signed_distance() {
        for n in [32usize, 64, 128] {
            let (spline, op) = setup(ParametricCurve::circle(0.5), n);
            let cls = classify_nodes(&spline, &op).unwrap();
            for idx in 0..op.grid.len() {
                let p = op.grid.node_point(idx);
                let s = p[0].hypot(p[1]) - 0.5;
                // the spline deviates from the circle by far less than 1e-4
                if s.abs() > 1e-4 {
                    let expect = if s < 0.0 { Side::Plus } else { Side::Minus };
                    assert_eq!(cls.side[idx], expect, "n={n} p={p:?}");
                }
            }
        }
    }

    #[test]
    fn irregular_set_matches_brute_force() {
        let (spline, op) = setup(ParametricCurve::circle(0.5), 64);
        let cls = classify_nodes(&spline, &op).unwrap();
        let g = op.grid;
        let exact = |idx: usize| {
            let p = g.node_point(idx);
            p[0].hypot(p[1]) < 0.5
        };
        let mut brute = 0;
        for idx in g.interior() {
            let (i, j) = g.ij(idx);
            let me = exact(idx);
            let cut = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| exact(g.offset(i, j, dx, dy).unwrap()) != me);
            if cut {
                brute += 1;
                assert!(cls.is_irregular(idx));
            }
        }
        assert_eq!(brute, cls.irregular.len());
        let ratio = brute as f64 / (PI / g.h);
        assert!((0.8..=2.0).contains(&ratio), "ratio {ratio}");
        for cut in &cls.stencil_cut {
            for &(_, n) in cut {
                assert!(cls.z_set.binary_search(&n).is_ok());
            }
        }
        assert_eq!(
            cls.count(NodeClass::Regular) + cls.count(NodeClass::Irregular),
            g.interior().len()
        );
    }

    #[test]
    fn interface_near_boundary_is_rejected() {
        let (spline, op) = setup(ParametricCurve::circle(0.97), 32);
        assert!(matches!(
            classify_nodes(&spline, &op),
            Err(KfbiError::InterfaceTooCloseToBoundary { .. })
        ));
    }

    fn unit_circle_spline() -> SplineCurve {
        build_spline(&sample_knots(&ParametricCurve::circle(1.0), 0.02).unwrap()).unwrap()
    }

    #[test]
    fn closest_point_on_circle() {
        let s = unit_circle_spline();
        let cp = closest_point(&s, [0.7, 0.0]);
        assert!(cp.converged);
        let theta = if cp.theta > PI {
            cp.theta - 2.0 * PI
        } else {
            cp.theta
        };
        assert!(theta.abs() < 1e-6);
        assert!((cp.distance - 0.3).abs() < 1e-6);
        assert_eq!(cp.side, Side::Plus);
        let cp = closest_point(&s, [0.0, 1.2]);
        assert!((cp.theta - PI / 2.0).abs() < 1e-6);
        assert!((cp.distance - 0.2).abs() < 1e-6);
        assert_eq!(cp.side, Side::Minus);
    }

    #[test]
    fn closest_point_matches_dense_sampling_on_star() {
        let curve = ParametricCurve::star(0.6, 0.6, 0.0, 0.4, 3);
        let h = 2.0 * PI / 128.0;
        let s = build_spline(&sample_knots(&curve, h).unwrap()).unwrap();
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let t = 2.0 * PI * rnd();
            let p = s.eval(t);
            let d = s.deriv(t);
            let len = d[0].hypot(d[1]);
            let off = (rnd() - 0.5) * 4.0 * h;
            let x = [p[0] + off * d[1] / len, p[1] - off * d[0] / len];
            let cp = closest_point(&s, x);
            let samples = 100_000;
            let dt = 2.0 * PI / samples as f64;
            let dist = |t: f64| {
                let q = s.eval(t);
                (q[0] - x[0]).hypot(q[1] - x[1])
            };
            let k_best = (0..samples)
                .min_by(|&a, &b| dist(a as f64 * dt).total_cmp(&dist(b as f64 * dt)))
                .unwrap();
            // golden-section polish inside the sampled bracket
            let (mut lo, mut hi) = ((k_best as f64 - 1.0) * dt, (k_best as f64 + 1.0) * dt);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let a = hi - phi * (hi - lo);
                let b = lo + phi * (hi - lo);
                if dist(a) < dist(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            let brute = dist(0.5 * (lo + hi));
            assert!(
                (brute - cp.distance).abs() < 1e-8,
                "{} vs {}",
                cp.distance,
                brute
            );
        }
    }
}

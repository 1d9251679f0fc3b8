use std::f64::consts::PI;

use crate::error::{KfbiError, Result};
use crate::geometry::Point2;

/// Closed analytic curve in the parameter plane, traversed counter-clockwise
/// for `θ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParametricCurve {
    Circle {
        radius: f64,
        center: Point2,
    },
    /// Ellipse with semi-axes `ra`, `rb` rotated by `alpha`.
    RotatedEllipse {
        ra: f64,
        rb: f64,
        alpha: f64,
        center: Point2,
    },
    /// `((ra + ε cos mθ) cos(θ+α), (rb + ε cos mθ) sin(θ+α))`.
    Star {
        ra: f64,
        rb: f64,
        alpha: f64,
        epsilon: f64,
        folds: u32,
        center: Point2,
    },
}

impl ParametricCurve {
    pub fn circle(radius: f64) -> Self {
        ParametricCurve::Circle {
            radius,
            center: [0.0, 0.0],
        }
    }

    pub fn ellipse(ra: f64, rb: f64, alpha: f64) -> Self {
        ParametricCurve::RotatedEllipse {
            ra,
            rb,
            alpha,
            center: [0.0, 0.0],
        }
    }

    pub fn star(ra: f64, rb: f64, alpha: f64, epsilon: f64, folds: u32) -> Self {
        ParametricCurve::Star {
            ra,
            rb,
            alpha,
            epsilon,
            folds,
            center: [0.0, 0.0],
        }
    }

    pub fn eval(&self, theta: f64) -> Point2 {
        match *self {
            ParametricCurve::Circle { radius, center } => {
                let (s, c) = theta.sin_cos();
                [center[0] + radius * c, center[1] + radius * s]
            }
            ParametricCurve::RotatedEllipse {
                ra,
                rb,
                alpha,
                center,
            } => {
                let (st, ct) = theta.sin_cos();
                let (sa, ca) = alpha.sin_cos();
                [
                    center[0] + ra * ct * ca - rb * st * sa,
                    center[1] + ra * ct * sa + rb * st * ca,
                ]
            }
            ParametricCurve::Star {
                ra,
                rb,
                alpha,
                epsilon,
                folds,
                center,
            } => {
                let bump = epsilon * (folds as f64 * theta).cos();
                let (s, c) = (theta + alpha).sin_cos();
                [center[0] + (ra + bump) * c, center[1] + (rb + bump) * s]
            }
        }
    }

    pub fn eval_deriv(&self, theta: f64) -> Point2 {
        match *self {
            ParametricCurve::Circle { radius, .. } => {
                let (s, c) = theta.sin_cos();
                [-radius * s, radius * c]
            }
            ParametricCurve::RotatedEllipse { ra, rb, alpha, .. } => {
                let (st, ct) = theta.sin_cos();
                let (sa, ca) = alpha.sin_cos();
                [-ra * st * ca - rb * ct * sa, -ra * st * sa + rb * ct * ca]
            }
            ParametricCurve::Star {
                ra,
                rb,
                alpha,
                epsilon,
                folds,
                ..
            } => {
                let m = folds as f64;
                let bump = epsilon * (m * theta).cos();
                let dbump = -epsilon * m * (m * theta).sin();
                let (s, c) = (theta + alpha).sin_cos();
                [dbump * c - (ra + bump) * s, dbump * s + (rb + bump) * c]
            }
        }
    }

    fn speed(&self, theta: f64) -> f64 {
        let d = self.eval_deriv(theta);
        d[0].hypot(d[1])
    }

    /// Arc length between `a` and `b` (`a < b`).
    pub fn arc_length_between(&self, a: f64, b: f64) -> f64 {
        adaptive_gauss(&|t| self.speed(t), a, b, 1e-10, 0)
    }

    pub fn perimeter(&self) -> f64 {
        // split into a few panels so the adaptive rule never sees a full period
        let panels = 16;
        let w = 2.0 * PI / panels as f64;
        (0..panels)
            .map(|k| self.arc_length_between(k as f64 * w, (k + 1) as f64 * w))
            .sum()
    }
}

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

pub(crate) fn gauss5(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let whole = gauss5(f, a, b);
    let mid = 0.5 * (a + b);
    let left = gauss5(f, a, mid);
    let right = gauss5(f, mid, b);
    if (left + right - whole).abs() <= tol || depth >= 40 {
        left + right
    } else {
        adaptive_gauss(f, a, mid, 0.5 * tol, depth + 1)
            + adaptive_gauss(f, mid, b, 0.5 * tol, depth + 1)
    }
}

/// Number of knots for target spacing `1.5 h`.
pub fn knot_count(perimeter: f64, h: f64) -> usize {
    (perimeter / (1.5 * h)).round() as usize
}

/// Samples `M = round(L / 1.5h)` knots equally spaced in arc length.
pub fn sample_knots(curve: &ParametricCurve, h: f64) -> Result<Vec<Point2>> {
    if !(h > 0.0) {
        return Err(KfbiError::InvalidGrid(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    let perimeter = curve.perimeter();
    let m = knot_count(perimeter, h);
    if m < 8 {
        return Err(KfbiError::CurveTooSmall { points: m });
    }

    // cumulative arc length on a fine θ table, then Newton inside the bracket
    let panels = 8 * m;
    let dt = 2.0 * PI / panels as f64;
    let mut cumulative = Vec::with_capacity(panels + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for k in 0..panels {
        acc += curve.arc_length_between(k as f64 * dt, (k + 1) as f64 * dt);
        cumulative.push(acc);
    }
    let total = acc;

    let mut knots = Vec::with_capacity(m);
    let mut panel = 0;
    for k in 0..m {
        let target = total * k as f64 / m as f64;
        while panel + 1 < panels && cumulative[panel + 1] <= target {
            panel += 1;
        }
        let t0 = panel as f64 * dt;
        let mut t =
            t0 + dt * (target - cumulative[panel]) / (cumulative[panel + 1] - cumulative[panel]);
        for _ in 0..30 {
            let s = cumulative[panel] + gauss5(&|x| curve.speed(x), t0, t);
            let step = (s - target) / curve.speed(t);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        knots.push(curve.eval(t));
    }
    Ok(knots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_curves_return_to_start() {
        let curves = [
            ParametricCurve::circle(0.5),
            ParametricCurve::ellipse(0.7, 0.4, 3.0 * PI / 5.0),
            ParametricCurve::star(0.7, 0.4, 6.0 * PI / 7.0, 0.3, 3),
            ParametricCurve::star(0.6, 0.6, PI / 4.0, 0.4, 3),
        ];
        for c in curves {
            let a = c.eval(0.0);
            let b = c.eval(2.0 * PI - 1e-15);
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c = ParametricCurve::star(0.7, 0.7, 11.0 * PI / 13.0, 0.3, 5);
        for t in [0.1, 1.3, 4.0] {
            let d = c.eval_deriv(t);
            let e = 1e-6;
            let (p, m) = (c.eval(t + e), c.eval(t - e));
            assert!((d[0] - (p[0] - m[0]) / (2.0 * e)).abs() < 1e-8);
            assert!((d[1] - (p[1] - m[1]) / (2.0 * e)).abs() < 1e-8);
        }
    }

    fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
        let orient = |p: Point2, q: Point2, r: Point2| {
            (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        };
        let d1 = orient(c, d, a);
        let d2 = orient(c, d, b);
        let d3 = orient(a, b, c);
        let d4 = orient(a, b, d);
        d1 * d2 < 0.0 && d3 * d4 < 0.0
    }

    #[test]
    fn shipped_curves_are_simple() {
        let curves = [
            ParametricCurve::circle(1.0),
            ParametricCurve::ellipse(0.7, 0.4, 3.0 * PI / 5.0),
            ParametricCurve::ellipse(1.0, 0.6, 9.0 * PI / 13.0),
            ParametricCurve::star(0.7, 0.4, 6.0 * PI / 7.0, 0.3, 3),
            ParametricCurve::star(0.7, 0.7, 11.0 * PI / 13.0, 0.3, 5),
            ParametricCurve::star(0.6, 0.6, PI / 4.0, 0.4, 3),
        ];
        let n = 512;
        for c in curves {
            let pts: Vec<Point2> = (0..n)
                .map(|k| c.eval(2.0 * PI * k as f64 / n as f64))
                .collect();
            for i in 0..n {
                for j in i + 2..n {
                    if i == 0 && j == n - 1 {
                        continue;
                    }
                    assert!(!segments_intersect(
                        pts[i],
                        pts[(i + 1) % n],
                        pts[j],
                        pts[(j + 1) % n]
                    ));
                }
            }
        }
    }

    #[test]
    fn circle_perimeter_is_exact() {
        let c = ParametricCurve::circle(0.5);
        assert!((c.perimeter() - PI).abs() < 1e-10);
    }

    #[test]
    fn knot_counts() {
        assert_eq!(
            sample_knots(&ParametricCurve::circle(1.0), 0.1)
                .unwrap()
                .len(),
            42
        );
        assert_eq!(
            sample_knots(&ParametricCurve::circle(0.5), 0.0625)
                .unwrap()
                .len(),
            34
        );
        assert!(matches!(
            sample_knots(&ParametricCurve::circle(0.5), 4.0),
            Err(KfbiError::CurveTooSmall { .. })
        ));
    }

    #[test]
    fn knot_spacing_is_near_one_and_a_half_h() {
        let c = ParametricCurve::ellipse(0.7, 0.4, 3.0 * PI / 5.0);
        let h = 2.0 / 64.0;
        let knots = sample_knots(&c, h).unwrap();
        assert_eq!(knots.len(), 75);
        let m = knots.len();
        for k in 0..m {
            let a = knots[k];
            let b = knots[(k + 1) % m];
            let chord = (a[0] - b[0]).hypot(a[1] - b[1]);
            assert!(chord > 1.2 * h && chord < 1.8 * h);
        }
    }
}

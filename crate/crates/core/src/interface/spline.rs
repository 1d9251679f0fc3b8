use std::f64::consts::PI;

use crate::error::{KfbiError, Result};
use crate::geometry::Point2;

/// Periodic cubic spline through `M` knots, parameterized by `θ ∈ [0, 2π)`
/// with knot `k` at `θ_k = 2πk/M`.
#[derive(Debug, Clone)]
pub struct SplineCurve {
    knots: Vec<Point2>,
    /// Second derivatives with respect to the integer knot parameter.
    second: Vec<Point2>,
}

/// Solves the cyclic tridiagonal system `x_{k−1} + 4 x_k + x_{k+1} = rhs_k`.
fn solve_cyclic_141(rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    // Sherman–Morrison on the periodic corners, with γ = −b_0
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    let thomas = |d: &[f64], r: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = 1.0 / d[0];
        x[0] = r[0] / d[0];
        for k in 1..n {
            let m = d[k] - c[k - 1];
            c[k] = 1.0 / m;
            x[k] = (r[k] - x[k - 1]) / m;
        }
        for k in (0..n - 1).rev() {
            x[k] -= c[k] * x[k + 1];
        }
        x
    };
    let y = thomas(&diag, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = thomas(&diag, &u);
    let factor = (y[0] + y[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    y.iter().zip(&z).map(|(a, b)| a - factor * b).collect()
}

/// Shoelace area of a closed polygon; positive for counter-clockwise order.
pub fn signed_area(points: &[Point2]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|k| {
            let a = points[k];
            let b = points[(k + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

pub fn build_spline(knots: &[Point2]) -> Result<SplineCurve> {
    let m = knots.len();
    if m < 8 {
        return Err(KfbiError::CurveTooSmall { points: m });
    }
    let mut perimeter = 0.0;
    for k in 0..m {
        let a = knots[k];
        let b = knots[(k + 1) % m];
        let d = (a[0] - b[0]).hypot(a[1] - b[1]);
        if d == 0.0 {
            return Err(KfbiError::DegenerateCurve(format!(
                "knots {k} and {} coincide",
                (k + 1) % m
            )));
        }
        perimeter += d;
    }
    let area = signed_area(knots);
    if area.abs() <= 1e-10 * perimeter * perimeter {
        return Err(KfbiError::DegenerateCurve("knots enclose no area".into()));
    }

    let mut second = vec![[0.0; 2]; m];
    for dim in 0..2 {
        let rhs: Vec<f64> = (0..m)
            .map(|k| {
                let prev = knots[(k + m - 1) % m][dim];
                let next = knots[(k + 1) % m][dim];
                6.0 * (next - 2.0 * knots[k][dim] + prev)
            })
            .collect();
        let sol = solve_cyclic_141(&rhs);
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(KfbiError::DegenerateCurve("singular spline system".into()));
        }
        for k in 0..m {
            second[k][dim] = sol[k];
        }
    }
    Ok(SplineCurve {
        knots: knots.to_vec(),
        second,
    })
}

impl SplineCurve {
    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn knots(&self) -> &[Point2] {
        &self.knots
    }

    pub fn knot_theta(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.len() as f64
    }

    fn locate(&self, theta: f64) -> (usize, f64) {
        let m = self.len() as f64;
        let t = (theta / (2.0 * PI) * m).rem_euclid(m);
        let k = (t.floor() as usize).min(self.len() - 1);
        (k, t - k as f64)
    }

    /// Position, first and second derivative with respect to `θ`.
    pub fn eval_all(&self, theta: f64) -> (Point2, Point2, Point2) {
        let (k, s) = self.locate(theta);
        let m = self.len();
        let p0 = self.knots[k];
        let p1 = self.knots[(k + 1) % m];
        let m0 = self.second[k];
        let m1 = self.second[(k + 1) % m];
        let scale = m as f64 / (2.0 * PI);
        let r = 1.0 - s;
        let mut pos = [0.0; 2];
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for i in 0..2 {
            pos[i] =
                r * p0[i] + s * p1[i] + ((r * r * r - r) * m0[i] + (s * s * s - s) * m1[i]) / 6.0;
            d1[i] = (p1[i] - p0[i]
                + (-(3.0 * r * r - 1.0) * m0[i] + (3.0 * s * s - 1.0) * m1[i]) / 6.0)
                * scale;
            d2[i] = (r * m0[i] + s * m1[i]) * scale * scale;
        }
        (pos, d1, d2)
    }

    pub fn eval(&self, theta: f64) -> Point2 {
        self.eval_all(theta).0
    }

    pub fn deriv(&self, theta: f64) -> Point2 {
        self.eval_all(theta).1
    }

    /// Arc length between `a < b` by 5-point Gauss–Legendre on each crossed segment.
    pub fn arc_length_between(&self, a: f64, b: f64) -> f64 {
        let w = 2.0 * PI / self.len() as f64;
        let mut total = 0.0;
        let mut t = a;
        while t < b - 1e-15 {
            let next = (((t / w) + 1e-12).floor() + 1.0) * w;
            let end = next.min(b);
            total += crate::interface::curve::gauss5(
                &|s| {
                    let d = self.deriv(s);
                    d[0].hypot(d[1])
                },
                t,
                end,
            );
            t = end;
        }
        total
    }

    /// `m` points equally spaced in arc length along the spline, starting at θ = 0.
    pub fn resample_uniform(&self, m: usize) -> Vec<Point2> {
        let segs = self.len();
        let w = 2.0 * PI / segs as f64;
        let mut cumulative = Vec::with_capacity(segs + 1);
        cumulative.push(0.0);
        for k in 0..segs {
            let prev = cumulative[k];
            cumulative.push(prev + self.arc_length_between(k as f64 * w, (k + 1) as f64 * w));
        }
        let total = cumulative[segs];
        let speed = |t: f64| {
            let d = self.deriv(t);
            d[0].hypot(d[1])
        };
        let mut out = Vec::with_capacity(m);
        let mut seg = 0;
        for k in 0..m {
            let target = total * k as f64 / m as f64;
            while seg + 1 < segs && cumulative[seg + 1] <= target {
                seg += 1;
            }
            let t0 = seg as f64 * w;
            let mut t =
                t0 + w * (target - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg]);
            for _ in 0..30 {
                let s = cumulative[seg] + crate::interface::curve::gauss5(&speed, t0, t);
                let step = (s - target) / speed(t);
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            out.push(self.eval(t));
        }
        out
    }

    /// Samples `per_segment` points on each spline segment.
    pub fn polyline(&self, per_segment: usize) -> Vec<Point2> {
        let n = self.len() * per_segment;
        (0..n)
            .map(|k| self.eval(2.0 * PI * k as f64 / n as f64))
            .collect()
    }
}

use crate::error::Result;
use crate::geometry::{conormal_at, Conormal, ParametricSurface, Point2};
use crate::interface::curve::{sample_knots, ParametricCurve};
use crate::interface::spline::{build_spline, signed_area, SplineCurve};

const MAX_RESAMPLE_PASSES: usize = 8;
const RESAMPLE_TARGET: f64 = 1.01;

fn arc_spacing_ratio(spline: &SplineCurve) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..spline.len() {
        let d = spline.arc_length_between(
            spline.knot_theta(k),
            spline.knot_theta(k) + 2.0 * std::f64::consts::PI / spline.len() as f64,
        );
        lo = lo.min(d);
        hi = hi.max(d);
    }
    hi / lo
}

/// One discretization point `q_l` on the interface preimage.
#[derive(Debug, Clone, Copy)]
pub struct InterfacePoint {
    pub xi: Point2,
    /// Unit parameter-plane tangent (counter-clockwise).
    pub tangent: Point2,
    pub conormal: Conormal,
    /// Cumulative spline arc length from point 0.
    pub arc: f64,
}

impl InterfacePoint {
    /// Outward parameter-plane unit normal (right of the direction of travel).
    pub fn outward_normal(&self) -> Point2 {
        [self.tangent[1], -self.tangent[0]]
    }

    /// `ν·∇_S u` from the parameter gradient of `u`.
    pub fn conormal_derivative(&self, grad: Point2) -> f64 {
        self.conormal.flux[0] * grad[0] + self.conormal.flux[1] * grad[1]
    }
}

#[derive(Debug, Clone)]
pub struct InterfacePointSet {
    pub points: Vec<InterfacePoint>,
    /// Mean arc-length spacing between neighbouring points.
    pub spacing: f64,
    /// Arc length of the closed spline.
    pub perimeter: f64,
}

impl InterfacePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest over smallest neighbour arc spacing.
    pub fn spacing_ratio(&self) -> f64 {
        let m = self.len();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..m {
            let next = if k + 1 == m {
                self.perimeter
            } else {
                self.points[k + 1].arc
            };
            let d = next - self.points[k].arc;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        hi / lo
    }
}

/// Spline-resampled interface together with its discretization points.
#[derive(Debug, Clone)]
pub struct InterfaceGeometry {
    pub curve: ParametricCurve,
    pub spline: SplineCurve,
    pub points: InterfacePointSet,
}

impl InterfaceGeometry {
    pub fn new(surface: &ParametricSurface, curve: ParametricCurve, h: f64) -> Result<Self> {
        let mut knots = sample_knots(&curve, h)?;
        if signed_area(&knots) < 0.0 {
            knots[1..].reverse();
        }
        let mut spline = build_spline(&knots)?;
        let m = spline.len();
        // re-interpolate at equal spline arc length until the spacing settles
        for _ in 0..MAX_RESAMPLE_PASSES {
            if arc_spacing_ratio(&spline) <= RESAMPLE_TARGET {
                break;
            }
            spline = build_spline(&spline.resample_uniform(m))?;
        }
        let mut points = Vec::with_capacity(m);
        let mut arc = 0.0;
        for k in 0..m {
            let theta = spline.knot_theta(k);
            let (xi, d1, _) = spline.eval_all(theta);
            if k > 0 {
                arc += spline.arc_length_between(spline.knot_theta(k - 1), theta);
            }
            let len = d1[0].hypot(d1[1]);
            let tangent = [d1[0] / len, d1[1] / len];
            let conormal = conormal_at(surface, xi, tangent)?;
            points.push(InterfacePoint {
                xi,
                tangent,
                conormal,
                arc,
            });
        }
        let perimeter =
            arc + spline.arc_length_between(spline.knot_theta(m - 1), 2.0 * std::f64::consts::PI);
        let spacing = perimeter / m as f64;
        Ok(InterfaceGeometry {
            curve,
            spline,
            points: InterfacePointSet {
                points,
                spacing,
                perimeter,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, l: usize) -> &InterfacePoint {
        &self.points.points[l]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn resampled_points_are_quasi_uniform() {
        let plane = ParametricSurface::plane(1.0);
        for curve in [
            ParametricCurve::circle(0.5),
            ParametricCurve::ellipse(0.7, 0.4, 3.0 * PI / 5.0),
            ParametricCurve::star(0.7, 0.4, 6.0 * PI / 7.0, 0.3, 3),
        ] {
            for n in [32usize, 64, 128] {
                let g = InterfaceGeometry::new(&plane, curve, 2.0 / n as f64).unwrap();
                assert!(g.len() >= 8);
                assert!(
                    g.points.spacing_ratio() <= 1.1,
                    "{curve:?} n={n}: {}",
                    g.points.spacing_ratio()
                );
            }
        }
    }

    #[test]
    fn point_count_doubles_with_resolution() {
        let plane = ParametricSurface::plane(1.0);
        let curve = ParametricCurve::ellipse(0.7, 0.4, 3.0 * PI / 5.0);
        for n in [32usize, 64, 128] {
            let a = InterfaceGeometry::new(&plane, curve, 2.0 / n as f64)
                .unwrap()
                .len() as f64;
            let b = InterfaceGeometry::new(&plane, curve, 1.0 / n as f64)
                .unwrap()
                .len() as f64;
            assert!((1.9..=2.1).contains(&(b / a)));
        }
    }

    #[test]
    fn circle_conormal_is_radial_on_the_plane() {
        let plane = ParametricSurface::plane(1.0);
        let g = InterfaceGeometry::new(&plane, ParametricCurve::circle(0.5), 1.0 / 32.0).unwrap();
        for p in &g.points.points {
            let r = p.xi[0].hypot(p.xi[1]);
            assert!((p.conormal.nu[0] - p.xi[0] / r).abs() < 1e-4);
            assert!((p.conormal.nu[1] - p.xi[1] / r).abs() < 1e-4);
        }
    }
}

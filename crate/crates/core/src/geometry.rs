//! Surface embeddings, induced metric, and the variable coefficients of the
//! planar pullback of `Δ_S − κ`.
//!
//! A surface is described by a map `X(ξ)` from a rectangular parameter domain
//! into R³. Pulling `Δ_S u − κu = F` back to the parameter plane and
//! multiplying by `√g` gives the divergence-form equation
//!
//! ```text
//! ∂_i (a_ij ∂_j u) − a u = √g F,    a_ij = √g g^ij,    a = κ √g
//! ```
//!
//! which is what the finite-difference layer discretizes.

use std::fmt;
use std::sync::Arc;

use crate::error::{KfbiError, Result};

pub type Point2 = [f64; 2];
pub type Vec3 = [f64; 3];

pub(crate) fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

fn scale3(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Rectangular parameter domain `[u0,u1]×[v0,v1]`, optionally periodic per direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl ParamDomain {
    pub fn square(half_width: f64) -> Self {
        ParamDomain {
            u0: -half_width,
            u1: half_width,
            v0: -half_width,
            v1: half_width,
            periodic_u: false,
            periodic_v: false,
        }
    }

    /// The doubly periodic square `[−π, π)²`.
    pub fn periodic_torus() -> Self {
        let pi = std::f64::consts::PI;
        ParamDomain {
            u0: -pi,
            u1: pi,
            v0: -pi,
            v1: pi,
            periodic_u: true,
            periodic_v: true,
        }
    }

    pub fn extent(&self) -> f64 {
        (self.u1 - self.u0).max(self.v1 - self.v0)
    }
}

pub type EmbedFn = Arc<dyn Fn(Point2) -> Vec3 + Send + Sync>;

/// The embedding map of a built-in or user-provided surface.
#[derive(Clone)]
pub enum SurfaceKind {
    /// `(u, v, 0)`
    Plane,
    /// `(u sin v, u cos v, v)`
    Helicoid,
    /// `(3u + v, u − 2v, u³ + v³)`
    ShearedCubic,
    /// `(u, v, u² − v²)`
    Saddle,
    /// `(u, v, u² + v²)`
    Paraboloid,
    /// `((R + r sin u) cos v, (R + r sin u) sin v, r cos u)`
    Torus { major: f64, minor: f64 },
    /// Dupin cyclide with parameters `a, b, c, d`.
    DupinCyclide { a: f64, b: f64, c: f64, d: f64 },
    /// Arbitrary embedding; tangents come from fourth-order central differences.
    Custom(EmbedFn),
}

impl fmt::Debug for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceKind::Plane => write!(f, "Plane"),
            SurfaceKind::Helicoid => write!(f, "Helicoid"),
            SurfaceKind::ShearedCubic => write!(f, "ShearedCubic"),
            SurfaceKind::Saddle => write!(f, "Saddle"),
            SurfaceKind::Paraboloid => write!(f, "Paraboloid"),
            SurfaceKind::Torus { major, minor } => write!(f, "Torus({major}, {minor})"),
            SurfaceKind::DupinCyclide { a, b, c, d } => write!(f, "Dupin({a}, {b}, {c}, {d})"),
            SurfaceKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A regular parameterized surface over a rectangular parameter domain.
#[derive(Debug, Clone)]
pub struct ParametricSurface {
    pub kind: SurfaceKind,
    pub domain: ParamDomain,
}

impl ParametricSurface {
    pub fn new(kind: SurfaceKind, domain: ParamDomain) -> Self {
        ParametricSurface { kind, domain }
    }

    pub fn plane(half_width: f64) -> Self {
        Self::new(SurfaceKind::Plane, ParamDomain::square(half_width))
    }

    pub fn embed(&self, xi: Point2) -> Vec3 {
        let [u, v] = xi;
        match &self.kind {
            SurfaceKind::Plane => [u, v, 0.0],
            SurfaceKind::Helicoid => [u * v.sin(), u * v.cos(), v],
            SurfaceKind::ShearedCubic => [3.0 * u + v, u - 2.0 * v, u * u * u + v * v * v],
            SurfaceKind::Saddle => [u, v, u * u - v * v],
            SurfaceKind::Paraboloid => [u, v, u * u + v * v],
            SurfaceKind::Torus { major, minor } => {
                let rho = major + minor * u.sin();
                [rho * v.cos(), rho * v.sin(), minor * u.cos()]
            }
            SurfaceKind::DupinCyclide { a, b, c, d } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let den = a - c * cu * cv;
                [
                    (d * (c - a * cu * cv) + b * b * cu) / den,
                    b * su * (a - d * cv) / den,
                    b * sv * (c * cu - d) / den,
                ]
            }
            SurfaceKind::Custom(f) => f(xi),
        }
    }

    /// Tangent vectors `(∂_1 X, ∂_2 X)`.
    pub fn tangents(&self, xi: Point2) -> (Vec3, Vec3) {
        let [u, v] = xi;
        match &self.kind {
            SurfaceKind::Plane => ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            SurfaceKind::Helicoid => ([v.sin(), v.cos(), 0.0], [u * v.cos(), -u * v.sin(), 1.0]),
            SurfaceKind::ShearedCubic => ([3.0, 1.0, 3.0 * u * u], [1.0, -2.0, 3.0 * v * v]),
            SurfaceKind::Saddle => ([1.0, 0.0, 2.0 * u], [0.0, 1.0, -2.0 * v]),
            SurfaceKind::Paraboloid => ([1.0, 0.0, 2.0 * u], [0.0, 1.0, 2.0 * v]),
            SurfaceKind::Torus { major, minor } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let rho = major + minor * su;
                (
                    [minor * cu * cv, minor * cu * sv, -minor * su],
                    [-rho * sv, rho * cv, 0.0],
                )
            }
            SurfaceKind::DupinCyclide { a, b, c, d } => {
                let (a, b, c, d) = (*a, *b, *c, *d);
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let den = a - c * cu * cv;
                let den_u = c * su * cv;
                let den_v = c * cu * sv;
                let num = [
                    d * (c - a * cu * cv) + b * b * cu,
                    b * su * (a - d * cv),
                    b * sv * (c * cu - d),
                ];
                let num_u = [
                    d * a * su * cv - b * b * su,
                    b * cu * (a - d * cv),
                    -b * sv * c * su,
                ];
                let num_v = [d * a * cu * sv, b * su * d * sv, b * cv * (c * cu - d)];
                let q = |n: f64, dn: f64, dd: f64| (dn * den - n * dd) / (den * den);
                (
                    [
                        q(num[0], num_u[0], den_u),
                        q(num[1], num_u[1], den_u),
                        q(num[2], num_u[2], den_u),
                    ],
                    [
                        q(num[0], num_v[0], den_v),
                        q(num[1], num_v[1], den_v),
                        q(num[2], num_v[2], den_v),
                    ],
                )
            }
            SurfaceKind::Custom(_) => self.tangents_fd(xi),
        }
    }

    /// Fourth-order central differences of `embed` with step `1e-5 · extent`.
    pub fn tangents_fd(&self, xi: Point2) -> (Vec3, Vec3) {
        let step = 1e-5 * self.domain.extent();
        let diff = |dir: Point2| -> Vec3 {
            let at = |s: f64| self.embed([xi[0] + s * dir[0], xi[1] + s * dir[1]]);
            let (p1, m1) = (at(step), at(-step));
            let (p2, m2) = (at(2.0 * step), at(-2.0 * step));
            let mut out = [0.0; 3];
            for k in 0..3 {
                out[k] = (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * step);
            }
            out
        };
        (diff([1.0, 0.0]), diff([0.0, 1.0]))
    }
}

/// Induced metric and unit normal at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub det_g: f64,
    pub inv_g11: f64,
    pub inv_g12: f64,
    pub inv_g22: f64,
    pub normal: Vec3,
}

impl MetricData {
    pub fn sqrt_g(&self) -> f64 {
        self.det_g.sqrt()
    }
}

const DEGENERACY_TOL: f64 = 1e-14;

pub fn metric_at(surface: &ParametricSurface, xi: Point2) -> Result<MetricData> {
    let (xu, xv) = surface.tangents(xi);
    metric_from_tangents(xi, xu, xv)
}

fn metric_from_tangents(xi: Point2, xu: Vec3, xv: Vec3) -> Result<MetricData> {
    let n = cross3(xu, xv);
    let area = norm3(n);
    if !(area > DEGENERACY_TOL) {
        return Err(KfbiError::DegenerateParameterization {
            u: xi[0],
            v: xi[1],
            norm: area,
        });
    }
    let g11 = dot3(xu, xu);
    let g12 = dot3(xu, xv);
    let g22 = dot3(xv, xv);
    let det_g = g11 * g22 - g12 * g12;
    Ok(MetricData {
        g11,
        g12,
        g22,
        det_g,
        inv_g11: g22 / det_g,
        inv_g12: -g12 / det_g,
        inv_g22: g11 / det_g,
        normal: scale3(1.0 / area, n),
    })
}

/// Coefficients of the pulled-back operator `∂_i(a_ij ∂_j ·) − a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackCoefficients {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub a: f64,
    /// `√g`; multiplies the surface source `F`.
    pub source_scale: f64,
}

pub fn pullback_coefficients(
    surface: &ParametricSurface,
    xi: Point2,
    kappa: f64,
) -> Result<PullbackCoefficients> {
    let m = metric_at(surface, xi)?;
    let s = m.sqrt_g();
    Ok(PullbackCoefficients {
        a11: s * m.inv_g11,
        a12: s * m.inv_g12,
        a22: s * m.inv_g22,
        a: kappa * s,
        source_scale: s,
    })
}

/// Outer conormal at a curve point plus the parameter-plane flux coefficients
/// `b` such that `ν·∇_S u = b_1 ∂_1 u + b_2 ∂_2 u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conormal {
    pub nu: Vec3,
    pub flux: [f64; 2],
    /// Unit embedded tangent `e`.
    pub tangent: Vec3,
    /// Parameter-plane tangent scaled so that its image has unit length.
    pub param_tangent: Point2,
}

/// `ν = e × n` for the curve passing through `xi` with parameter-plane
/// direction `tangent`.
///
/// With `t` the parameter tangent normalized so `|t_i ∂_i X| = 1`, one has
/// `ν·∂_1X = √g t_2` and `ν·∂_2X = −√g t_1`, so `b_i = g^ij (ν·∂_j X)` reduces
/// to `b = A m` with `A = (a_ij)` and `m = (t_2, −t_1)`.
pub fn conormal_at(surface: &ParametricSurface, xi: Point2, tangent: Point2) -> Result<Conormal> {
    let (xu, xv) = surface.tangents(xi);
    let m = metric_from_tangents(xi, xu, xv)?;
    let embedded = add3(scale3(tangent[0], xu), scale3(tangent[1], xv));
    let len = norm3(embedded);
    if !(len > 0.0) {
        return Err(KfbiError::DegenerateCurve("zero tangent".into()));
    }
    let t = [tangent[0] / len, tangent[1] / len];
    let e = scale3(1.0 / len, embedded);
    let nu = cross3(e, m.normal);
    let nu_d1 = dot3(nu, xu);
    let nu_d2 = dot3(nu, xv);
    let flux = [
        m.inv_g11 * nu_d1 + m.inv_g12 * nu_d2,
        m.inv_g12 * nu_d1 + m.inv_g22 * nu_d2,
    ];
    Ok(Conormal {
        nu,
        flux,
        tangent: e,
        param_tangent: t,
    })
}

/// Coefficient field of a divergence-form operator on the parameter plane.
pub trait CoefficientField: Send + Sync {
    /// `(a11, a12, a22)` at `p`.
    fn tensor(&self, p: Point2) -> Result<[f64; 3]>;
    /// Reaction coefficient `a ≥ 0` at `p`.
    fn reaction(&self, p: Point2) -> Result<f64>;
    /// Factor multiplying the source term (`√g` for surface pullbacks).
    fn source_scale(&self, _p: Point2) -> Result<f64> {
        Ok(1.0)
    }
}

/// Pullback coefficients of `Δ_S − λ` for a given surface.
#[derive(Debug, Clone)]
pub struct SurfaceCoefficients {
    pub surface: ParametricSurface,
    pub lambda: f64,
}

impl CoefficientField for SurfaceCoefficients {
    fn tensor(&self, p: Point2) -> Result<[f64; 3]> {
        let c = pullback_coefficients(&self.surface, p, self.lambda)?;
        Ok([c.a11, c.a12, c.a22])
    }

    fn reaction(&self, p: Point2) -> Result<f64> {
        Ok(self.lambda * metric_at(&self.surface, p)?.sqrt_g())
    }

    fn source_scale(&self, p: Point2) -> Result<f64> {
        Ok(metric_at(&self.surface, p)?.sqrt_g())
    }
}

/// Spatially constant coefficients.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCoefficients {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub a: f64,
}

impl ConstantCoefficients {
    pub fn laplacian() -> Self {
        ConstantCoefficients {
            a11: 1.0,
            a12: 0.0,
            a22: 1.0,
            a: 0.0,
        }
    }
}

impl CoefficientField for ConstantCoefficients {
    fn tensor(&self, _p: Point2) -> Result<[f64; 3]> {
        Ok([self.a11, self.a12, self.a22])
    }

    fn reaction(&self, _p: Point2) -> Result<f64> {
        Ok(self.a)
    }
}

/// Coefficients given by closures; handy for manufactured tests.
pub struct FnCoefficients<T, R>
where
    T: Fn(Point2) -> [f64; 3] + Send + Sync,
    R: Fn(Point2) -> f64 + Send + Sync,
{
    pub tensor: T,
    pub reaction: R,
}

impl<T, R> CoefficientField for FnCoefficients<T, R>
where
    T: Fn(Point2) -> [f64; 3] + Send + Sync,
    R: Fn(Point2) -> f64 + Send + Sync,
{
    fn tensor(&self, p: Point2) -> Result<[f64; 3]> {
        Ok((self.tensor)(p))
    }

    fn reaction(&self, p: Point2) -> Result<f64> {
        Ok((self.reaction)(p))
    }
}

/// Divergence of the coefficient tensor, `(∂_1 a11 + ∂_2 a12, ∂_1 a12 + ∂_2 a22)`,
/// by second-order central differences with step `step`.
pub fn tensor_divergence(field: &dyn CoefficientField, p: Point2, step: f64) -> Result<[f64; 2]> {
    let e = field.tensor([p[0] + step, p[1]])?;
    let w = field.tensor([p[0] - step, p[1]])?;
    let n = field.tensor([p[0], p[1] + step])?;
    let s = field.tensor([p[0], p[1] - step])?;
    let inv = 0.5 / step;
    Ok([
        (e[0] - w[0]) * inv + (n[1] - s[1]) * inv,
        (e[1] - w[1]) * inv + (n[2] - s[2]) * inv,
    ])
}

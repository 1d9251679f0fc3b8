use crate::error::{KfbiError, Result};
use crate::geometry::{tensor_divergence, CoefficientField, Point2};
use crate::interface::{InterfaceGeometry, InterfacePoint};
use crate::solver::dense::{HouseholderQr, RANK_TOL};

/// Monomials `{1, X, Y, X², Y², XY}` at local coordinates `(X, Y)`.
#[inline]
pub fn basis(x: f64, y: f64) -> [f64; 6] {
    [1.0, x, y, x * x, y * y, x * y]
}

/// `∂/∂X` and `∂/∂Y` of [`basis`].
#[inline]
pub fn basis_grad(x: f64, y: f64) -> [[f64; 6]; 2] {
    [
        [0.0, 1.0, 0.0, 2.0 * x, 0.0, y],
        [0.0, 0.0, 1.0, 0.0, 2.0 * y, x],
    ]
}

/// Quadratic correction polynomial around one interface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyPatch {
    pub center: Point2,
    pub radius: f64,
    pub alpha: [f64; 6],
}

impl CauchyPatch {
    pub fn local(&self, p: Point2) -> (f64, f64) {
        (
            (p[0] - self.center[0]) / self.radius,
            (p[1] - self.center[1]) / self.radius,
        )
    }

    pub fn eval(&self, p: Point2) -> f64 {
        let (x, y) = self.local(p);
        basis(x, y)
            .iter()
            .zip(&self.alpha)
            .map(|(b, a)| b * a)
            .sum()
    }

    /// Parameter-plane gradient.
    pub fn grad(&self, p: Point2) -> Point2 {
        let (x, y) = self.local(p);
        let g = basis_grad(x, y);
        let dx: f64 = g[0].iter().zip(&self.alpha).map(|(b, a)| b * a).sum();
        let dy: f64 = g[1].iter().zip(&self.alpha).map(|(b, a)| b * a).sum();
        [dx / self.radius, dy / self.radius]
    }
}

/// Cauchy data of the correction function at the interface points.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpData {
    /// `[u]` at each interface point.
    pub phi: Vec<f64>,
    /// Jump of the conormal derivative at each interface point.
    pub psi: Vec<f64>,
    /// Source jump `[F]` at each interface point.
    pub fbar: Vec<f64>,
}

impl JumpData {
    pub fn zeros(m: usize) -> Self {
        JumpData {
            phi: vec![0.0; m],
            psi: vec![0.0; m],
            fbar: vec![0.0; m],
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Validates lengths against `m` interface points.
    pub fn validate(&self, m: usize) -> Result<()> {
        for v in [&self.phi, &self.psi, &self.fbar] {
            if v.len() != m {
                return Err(KfbiError::ShapeMismatch {
                    expected: m,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// Collocation matrix of one patch, factored once and reused for any data.
///
/// Rows: Dirichlet at `q_l, q_{l−1}, q_{l+1}`; conormal Neumann at `q_l`;
/// the difference of the Neumann conditions at `q_{l+1}` and `q_{l−1}`
/// (a tangential derivative of the flux); the PDE at `q_l`. Neumann rows are
/// multiplied by `r` and the PDE row by `r²`, which brings every row to unit
/// scale in the rescaled basis.
///
/// Imposing the flux at `q_l` itself keeps the patch faithful to rapidly
/// varying flux data: with only the two endpoint conditions, a density that
/// alternates in sign between neighbours would produce a flux jump of the
/// opposite sign at `q_l`.
#[derive(Debug, Clone)]
pub struct PatchSystem {
    pub index: usize,
    pub center: Point2,
    pub radius: f64,
    /// `α = inverse · rhs` with
    /// `rhs = [Φ_l, Φ_{l−1}, Φ_{l+1}, rΨ_l, rσ(Ψ_{l+1} − Ψ_{l−1}), r²√g f̄_l]`.
    pub inverse: [[f64; 6]; 6],
    pub condition: f64,
    /// `√g` at the centre, multiplying `f̄` in the PDE row.
    source_scale: f64,
    /// Scale `σ` of the flux-difference row.
    sigma: f64,
}

/// `r / |q_{l+1} − q_{l−1}|`, keeping the difference row at unit scale.
fn difference_scale(radius: f64, a: Point2, b: Point2) -> f64 {
    radius / (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Assembled (unscaled-data) 6×6 collocation matrix of patch `l`.
pub fn collocation_matrix(
    field: &dyn CoefficientField,
    iface: &InterfaceGeometry,
    l: usize,
    radius: f64,
    div_step: f64,
) -> Result<[[f64; 6]; 6]> {
    let m = iface.len();
    let q = iface.point(l).xi;
    let prev = iface.point((l + m - 1) % m);
    let next = iface.point((l + 1) % m);
    let loc = |p: Point2| ((p[0] - q[0]) / radius, (p[1] - q[1]) / radius);

    let mut a = [[0.0; 6]; 6];
    a[0] = basis(0.0, 0.0);
    let (x, y) = loc(prev.xi);
    a[1] = basis(x, y);
    let (x, y) = loc(next.xi);
    a[2] = basis(x, y);
    let neumann = |pt: &InterfacePoint| {
        let (x, y) = loc(pt.xi);
        let g = basis_grad(x, y);
        let b = pt.conormal.flux;
        let mut row = [0.0; 6];
        for k in 0..6 {
            row[k] = b[0] * g[0][k] + b[1] * g[1][k];
        }
        row
    };
    a[3] = neumann(iface.point(l));
    let (np, nn) = (neumann(prev), neumann(next));
    let sigma = difference_scale(radius, prev.xi, next.xi);
    for k in 0..6 {
        a[4][k] = sigma * (nn[k] - np[k]);
    }
    let t = field.tensor(q)?;
    let div = tensor_divergence(field, q, div_step)?;
    let react = field.reaction(q)?;
    a[5] = [
        -radius * radius * react,
        radius * div[0],
        radius * div[1],
        2.0 * t[0],
        2.0 * t[2],
        2.0 * t[1],
    ];
    Ok(a)
}

impl PatchSystem {
    pub fn build(
        field: &dyn CoefficientField,
        iface: &InterfaceGeometry,
        l: usize,
        radius: f64,
        div_step: f64,
    ) -> Result<Self> {
        let a = collocation_matrix(field, iface, l, radius, div_step)?;
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        let qr = HouseholderQr::new(&flat, 6, 6)?;
        let rank = qr.rank(RANK_TOL);
        if rank < 6 {
            return Err(KfbiError::RankDeficient { rank, expected: 6 });
        }
        let mut inverse = [[0.0; 6]; 6];
        for c in 0..6 {
            let mut e = [0.0; 6];
            e[c] = 1.0;
            let col = qr.solve(&e)?;
            for r in 0..6 {
                inverse[r][c] = col[r];
            }
        }
        let q = iface.point(l).xi;
        let m = iface.len();
        let sigma = difference_scale(
            radius,
            iface.point((l + m - 1) % m).xi,
            iface.point((l + 1) % m).xi,
        );
        Ok(PatchSystem {
            index: l,
            center: q,
            radius,
            inverse,
            condition: qr.condition_estimate(),
            source_scale: field.source_scale(q)?,
            sigma,
        })
    }

    /// Scaled right-hand side for the given jump data.
    pub fn rhs(&self, jumps: &JumpData) -> [f64; 6] {
        let m = jumps.len();
        let l = self.index;
        let (lp, ln) = ((l + m - 1) % m, (l + 1) % m);
        let r = self.radius;
        [
            jumps.phi[l],
            jumps.phi[lp],
            jumps.phi[ln],
            r * jumps.psi[l],
            r * self.sigma * (jumps.psi[ln] - jumps.psi[lp]),
            r * r * self.source_scale * jumps.fbar[l],
        ]
    }

    pub fn solve(&self, jumps: &JumpData) -> CauchyPatch {
        let b = self.rhs(jumps);
        let mut alpha = [0.0; 6];
        for r in 0..6 {
            alpha[r] = (0..6).map(|c| self.inverse[r][c] * b[c]).sum();
        }
        CauchyPatch {
            center: self.center,
            radius: self.radius,
            alpha,
        }
    }
}

/// Assembles and solves the local Cauchy collocation problem of patch `l` directly.
pub fn solve_local_cauchy(
    field: &dyn CoefficientField,
    iface: &InterfaceGeometry,
    l: usize,
    radius: f64,
    jumps: &JumpData,
) -> Result<(CauchyPatch, f64)> {
    jumps.validate(iface.len())?;
    // coefficient divergence by differences with the grid step (r = 3h)
    let sys = PatchSystem::build(field, iface, l, radius, radius / 3.0)?;
    Ok((sys.solve(jumps), sys.condition))
}

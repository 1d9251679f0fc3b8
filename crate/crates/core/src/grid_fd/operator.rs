use rayon::prelude::*;

use crate::error::{KfbiError, Result};
use crate::geometry::CoefficientField;
use crate::grid_fd::grid::{CartesianGrid, GridFunction};

/// Stencil offsets, indexed `k = (dy + 1) * 3 + (dx + 1)`.
pub const OFFSETS: [(i64, i64); 9] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (0, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
pub const CENTER: usize = 4;

/// Which mixed-derivative stencil a node uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedBranch {
    /// `a12` vanishes at the node and the sampled half points: plain five-point scheme.
    None,
    /// `a12 < 0`: extra entries at `(−1, 1)` and `(1, −1)`.
    Negative,
    /// `a12 > 0`: extra entries at `(−1, −1)` and `(1, 1)`.
    Positive,
}

const A12_ZERO: f64 = 1e-14;

/// Seven-point discretization of `∂_i(a_ij ∂_j u) − a u` on a Cartesian grid.
///
/// Rows exist for every node; boundary rows of non-periodic grids are zero
/// and boundary values are treated as known (zero ghost values in [`apply`]).
///
/// [`apply`]: SevenPointOperator::apply
#[derive(Debug, Clone)]
pub struct SevenPointOperator {
    pub grid: CartesianGrid,
    pub coeffs: Vec<[f64; 9]>,
    pub branch: Vec<MixedBranch>,
}

fn node_stencil(
    field: &dyn CoefficientField,
    grid: &CartesianGrid,
    x: f64,
    y: f64,
) -> Result<([f64; 9], MixedBranch)> {
    let h = grid.h;
    let at = |dx: f64, dy: f64| field.tensor([x + dx * h, y + dy * h]);
    let center = at(0.0, 0.0)?;
    let det = center[0] * center[2] - center[1] * center[1];
    if !(det > 0.0) || center[0] <= 0.0 {
        return Err(KfbiError::IndefiniteCoefficients { x, y, det });
    }
    let inv_h2 = 1.0 / (h * h);
    let mut c = [0.0; 9];
    c[3] = at(-0.5, 0.0)?[0] * inv_h2;
    c[5] = at(0.5, 0.0)?[0] * inv_h2;
    c[1] = at(0.0, -0.5)?[2] * inv_h2;
    c[7] = at(0.0, 0.5)?[2] * inv_h2;
    c[4] = -(c[1] + c[3] + c[5] + c[7]) - field.reaction([x, y])?;

    let a12 = center[1];
    let m = |dx: f64, dy: f64| -> Result<f64> { Ok(at(dx, dy)?[1]) };
    let branch = if a12.abs() >= A12_ZERO {
        if a12 < 0.0 {
            MixedBranch::Negative
        } else {
            MixedBranch::Positive
        }
    } else {
        // a12 vanishing at the node alone does not remove the mixed term:
        // its derivatives still contribute, so keep a (consistent) branch
        let mut vanishes = true;
        for (dx, dy) in [
            (0.5, 0.0),
            (-0.5, 0.0),
            (0.0, 0.5),
            (0.0, -0.5),
            (1.0, 0.5),
            (-1.0, -0.5),
            (0.5, 1.0),
            (-0.5, -1.0),
        ] {
            vanishes &= m(dx, dy)?.abs() < A12_ZERO;
        }
        if vanishes {
            MixedBranch::None
        } else {
            MixedBranch::Positive
        }
    };
    let s = 0.5 * inv_h2;
    match branch {
        MixedBranch::None => {}
        MixedBranch::Negative => {
            let a = m(-0.5, 1.0)?;
            let b = m(-1.0, 0.5)?;
            let cc = m(0.0, 0.5)?;
            let d = m(-0.5, 0.0)?;
            let e = m(0.0, -0.5)?;
            let f = m(0.5, 0.0)?;
            let g = m(0.5, -1.0)?;
            let hh = m(1.0, -0.5)?;
            c[6] = -(a + b) * s;
            c[7] += (a + cc) * s;
            c[3] += (b + d) * s;
            c[4] += -(cc + d + e + f) * s;
            c[5] += (hh + f) * s;
            c[1] += (e + g) * s;
            c[2] = -(hh + g) * s;
        }
        MixedBranch::Positive => {
            let a = m(0.5, 1.0)?;
            let b = m(-1.0, -0.5)?;
            let cc = m(0.0, 0.5)?;
            let d = m(-0.5, 0.0)?;
            let e = m(0.0, -0.5)?;
            let f = m(0.5, 0.0)?;
            let g = m(-0.5, -1.0)?;
            let hh = m(1.0, 0.5)?;
            c[7] += -(a + cc) * s;
            c[8] = (a + hh) * s;
            c[3] += -(b + d) * s;
            c[4] += (cc + d + e + f) * s;
            c[5] += -(hh + f) * s;
            c[0] = (b + g) * s;
            c[1] += -(e + g) * s;
        }
    }
    Ok((c, branch))
}

/// `−L_h` sign and dominance checks, plus the largest asymmetry of the
/// assembled interior matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMatrixReport {
    pub symmetric: bool,
    pub diag_sign_ok: bool,
    pub offdiag_sign_ok: bool,
    pub diag_dominant: bool,
    pub max_asymmetry: f64,
}

impl MMatrixReport {
    pub fn is_m_matrix(&self) -> bool {
        self.diag_sign_ok && self.offdiag_sign_ok && self.diag_dominant
    }
}

impl SevenPointOperator {
    pub fn build(grid: CartesianGrid, field: &dyn CoefficientField) -> Result<Self> {
        let rows: Vec<Result<([f64; 9], MixedBranch)>> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                if grid.is_boundary(idx) {
                    return Ok(([0.0; 9], MixedBranch::None));
                }
                let [x, y] = grid.node_point(idx);
                node_stencil(field, &grid, x, y)
            })
            .collect();
        let mut coeffs = Vec::with_capacity(grid.len());
        let mut branch = Vec::with_capacity(grid.len());
        for r in rows {
            let (c, b) = r?;
            coeffs.push(c);
            branch.push(b);
        }
        Ok(SevenPointOperator {
            grid,
            coeffs,
            branch,
        })
    }

    /// Stencil neighbour indices of `idx`; `None` for offsets that leave the grid.
    #[inline]
    pub fn neighbors(&self, idx: usize) -> [Option<usize>; 9] {
        let (i, j) = self.grid.ij(idx);
        let mut out = [None; 9];
        for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
            out[k] = self.grid.offset(i, j, dx, dy);
        }
        out
    }

    /// `(L_h u)` at interior nodes, with boundary values read as zero.
    /// Boundary entries of the result are zero.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.grid != self.grid {
            return Err(KfbiError::ShapeMismatch {
                expected: self.grid.len(),
                got: u.values.len(),
            });
        }
        let mut out = vec![0.0; self.grid.len()];
        self.apply_into(&u.values, &mut out);
        GridFunction::from_values(self.grid, out)
    }

    pub(crate) fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let grid = &self.grid;
        out.par_iter_mut().enumerate().for_each(|(idx, o)| {
            if grid.is_boundary(idx) {
                *o = 0.0;
                return;
            }
            *o = self.row_dot(idx, u);
        });
    }

    /// `Σ_k c_k u_k` for the row of `idx`, boundary values read as zero.
    #[inline]
    pub(crate) fn row_dot(&self, idx: usize, u: &[f64]) -> f64 {
        let grid = &self.grid;
        let c = &self.coeffs[idx];
        let (i, j) = grid.ij(idx);
        let mut acc = 0.0;
        for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
            if c[k] == 0.0 {
                continue;
            }
            if let Some(n) = grid.offset(i, j, dx, dy) {
                if !grid.is_boundary(n) {
                    acc += c[k] * u[n];
                }
            }
        }
        acc
    }

    /// Contribution of known boundary values `g` to interior rows; solving
    /// `L_h u = f − boundary_contribution(g)` imposes `u = g` on `∂Ω_h`.
    pub fn boundary_contribution(&self, g: &GridFunction) -> GridFunction {
        let grid = &self.grid;
        let mut out = vec![0.0; grid.len()];
        for idx in 0..grid.len() {
            if grid.is_boundary(idx) {
                continue;
            }
            let c = &self.coeffs[idx];
            let (i, j) = grid.ij(idx);
            for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
                if let Some(n) = grid.offset(i, j, dx, dy) {
                    if grid.is_boundary(n) {
                        out[idx] += c[k] * g.values[n];
                    }
                }
            }
        }
        GridFunction {
            grid: *grid,
            values: out,
        }
    }

    /// Dense matrix over interior nodes in [`CartesianGrid::interior`] order.
    pub fn to_dense(&self) -> (Vec<usize>, Vec<Vec<f64>>) {
        let interior = self.grid.interior();
        let mut pos = vec![usize::MAX; self.grid.len()];
        for (r, &idx) in interior.iter().enumerate() {
            pos[idx] = r;
        }
        let n = interior.len();
        let mut a = vec![vec![0.0; n]; n];
        for (r, &idx) in interior.iter().enumerate() {
            let nb = self.neighbors(idx);
            for k in 0..9 {
                if let Some(m) = nb[k] {
                    if pos[m] != usize::MAX {
                        a[r][pos[m]] += self.coeffs[idx][k];
                    }
                }
            }
        }
        (interior, a)
    }

    pub fn mmatrix_diagnostics(&self) -> MMatrixReport {
        let grid = &self.grid;
        let mut diag_sign_ok = true;
        let mut offdiag_sign_ok = true;
        let mut diag_dominant = true;
        let mut max_asym: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in grid.interior() {
            let c = &self.coeffs[idx];
            let nb = self.neighbors(idx);
            scale = scale.max(c[CENTER].abs());
            // entries of −L_h
            let diag = -c[CENTER];
            if diag <= 0.0 {
                diag_sign_ok = false;
            }
            let mut off = 0.0;
            for k in 0..9 {
                if k == CENTER {
                    continue;
                }
                if -c[k] > 0.0 {
                    offdiag_sign_ok = false;
                }
                off += c[k].abs();
                // transposed partner: row nb[k], offset 8 − k
                if let Some(n) = nb[k] {
                    if !grid.is_boundary(n) && n != idx {
                        let partner = self.coeffs[n][8 - k];
                        max_asym = max_asym.max((c[k] - partner).abs());
                    }
                }
            }
            if diag < off * (1.0 - 1e-12) {
                diag_dominant = false;
            }
        }
        MMatrixReport {
            symmetric: max_asym <= 1e-12 * scale.max(1.0),
            diag_sign_ok,
            offdiag_sign_ok,
            diag_dominant,
            max_asymmetry: max_asym,
        }
    }

    /// Fully periodic operator with vanishing row sums (constant nullspace).
    pub fn is_singular_periodic(&self) -> bool {
        if !self.grid.is_fully_periodic() {
            return false;
        }
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for c in &self.coeffs {
            scale = scale.max(c[CENTER].abs());
            worst = worst.max(c.iter().sum::<f64>().abs());
        }
        worst <= 1e-12 * scale
    }
}

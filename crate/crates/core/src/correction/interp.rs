use crate::correction::field::{CorrectionField, RADIUS_FACTOR};
use crate::correction::patch::{basis, basis_grad};
use crate::error::{KfbiError, Result};
use crate::grid_fd::{CartesianGrid, GridFunction};
use crate::interface::{InterfaceGeometry, NodeClassification, Side};
use crate::solver::dense::HouseholderQr;

/// Least-squares quadratic interpolation weights from a square node block
/// around the node nearest an interface point.
///
/// Opposite-side samples are corrected with the local polynomial of the
/// patch centred at the same interface point, so a single smooth extension
/// is used for the whole block.
#[derive(Debug, Clone)]
pub struct InterpolationStencil {
    /// Interface point index, which is also the patch used for corrections.
    pub patch: usize,
    pub nodes: Vec<usize>,
    /// Patch basis `φ_k((x − q)/r)` at each block node.
    pub patch_basis: Vec<[f64; 6]>,
    /// Weights for the value at the point.
    pub value: Vec<f64>,
    /// Weights for the conormal derivative `b·∇u` at the point.
    pub flux: Vec<f64>,
}

impl InterpolationStencil {
    /// Block of `(2·half_width + 1)²` nodes; `half_width = 1` is the 3×3 block.
    pub fn new(
        grid: &CartesianGrid,
        iface: &InterfaceGeometry,
        l: usize,
        half_width: i64,
    ) -> Result<Self> {
        let point = iface.point(l);
        let (ci, cj) = grid.nearest(point.xi);
        let xc = [grid.x0 + ci as f64 * grid.h, grid.y0 + cj as f64 * grid.h];
        let h = grid.h;
        let side = (2 * half_width + 1) as usize;
        let count = side * side;
        let radius = RADIUS_FACTOR * h;
        let mut nodes = Vec::with_capacity(count);
        let mut patch_basis = Vec::with_capacity(count);
        let mut design = Vec::with_capacity(count * 6);
        for dj in -half_width..=half_width {
            for di in -half_width..=half_width {
                let n = grid
                    .wrap_index(ci + di, cj + dj)
                    .ok_or(KfbiError::InsufficientNodes { point: l })?;
                nodes.push(n);
                // unwrapped coordinates, so blocks straddling a periodic seam stay contiguous
                let p = [xc[0] + di as f64 * h, xc[1] + dj as f64 * h];
                patch_basis.push(basis(
                    (p[0] - point.xi[0]) / radius,
                    (p[1] - point.xi[1]) / radius,
                ));
                design.extend_from_slice(&basis(di as f64, dj as f64));
            }
        }
        let qr = HouseholderQr::new(&design, count, 6)?;
        let (x, y) = ((point.xi[0] - xc[0]) / h, (point.xi[1] - xc[1]) / h);
        let bq = basis(x, y);
        let gq = basis_grad(x, y);
        let b = point.conormal.flux;
        let mut value = vec![0.0; count];
        let mut flux = vec![0.0; count];
        let mut e = vec![0.0; count];
        for i in 0..count {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[i] = 1.0;
            // column i of the pseudo-inverse
            let col = qr.solve(&e)?;
            for k in 0..6 {
                value[i] += bq[k] * col[k];
                flux[i] += (b[0] * gq[0][k] + b[1] * gq[1][k]) / h * col[k];
            }
        }
        Ok(InterpolationStencil {
            patch: l,
            nodes,
            patch_basis,
            value,
            flux,
        })
    }
}

/// One-sided trace and conormal derivative at an interface point: node values
/// from the opposite side are shifted by `±C` so all samples belong to the
/// smooth extension of `side`.
pub fn corrected_interpolate(
    u: &GridFunction,
    field: &CorrectionField,
    stencil: &InterpolationStencil,
    cls: &NodeClassification,
    side: Side,
) -> Result<(f64, f64)> {
    let alpha = &field
        .patches
        .get(stencil.patch)
        .ok_or(KfbiError::ShapeMismatch {
            expected: stencil.patch + 1,
            got: field.patches.len(),
        })?
        .alpha;
    let mut val = 0.0;
    let mut flux = 0.0;
    for (k, &n) in stencil.nodes.iter().enumerate() {
        let mut v = u.values[n];
        if cls.side[n] != side {
            let c: f64 = (0..6).map(|i| alpha[i] * stencil.patch_basis[k][i]).sum();
            v += match side {
                Side::Plus => c,
                Side::Minus => -c,
            };
        }
        val += stencil.value[k] * v;
        flux += stencil.flux[k] * v;
    }
    Ok((val, flux))
}

use rayon::prelude::*;

use crate::correction::patch::{basis, CauchyPatch, JumpData, PatchSystem};
use crate::error::{KfbiError, Result};
use crate::geometry::CoefficientField;
use crate::grid_fd::{CartesianGrid, GridFunction, SevenPointOperator};
use crate::interface::{InterfaceGeometry, NodeClassification, Side};

/// Patch radius in grid spacings.
pub const RADIUS_FACTOR: f64 = 3.0;

/// Grid node that needs a correction value, with its patch and basis row.
#[derive(Debug, Clone, Copy)]
struct NodeEntry {
    node: usize,
    patch: usize,
    basis: [f64; 6],
}

/// Factored collocation systems for every interface point plus the
/// nearest-centre assignment of the nodes that need correction values.
#[derive(Debug, Clone)]
pub struct CorrectionPlan {
    pub grid: CartesianGrid,
    pub systems: Vec<PatchSystem>,
    entries: Vec<NodeEntry>,
    /// `slot[node]` is the index into `entries`, or `usize::MAX`.
    slot: Vec<usize>,
}

/// Index of the interface point nearest to `p` (ties go to the lower index).
pub fn nearest_center(iface: &InterfaceGeometry, p: [f64; 2]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (l, q) in iface.points.points.iter().enumerate() {
        let d = (q.xi[0] - p[0]).hypot(q.xi[1] - p[1]);
        if d < best.1 {
            best = (l, d);
        }
    }
    best
}

impl CorrectionPlan {
    /// `nodes` lists every grid node whose correction value will be read.
    pub fn new(
        field: &dyn CoefficientField,
        iface: &InterfaceGeometry,
        grid: CartesianGrid,
        nodes: &[usize],
    ) -> Result<Self> {
        let radius = RADIUS_FACTOR * grid.h;
        let systems = (0..iface.len())
            .into_par_iter()
            .map(|l| PatchSystem::build(field, iface, l, radius, grid.h))
            .collect::<Result<Vec<_>>>()?;
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let entries = sorted
            .par_iter()
            .map(|&node| {
                let p = grid.node_point(node);
                let (patch, dist) = nearest_center(iface, p);
                if dist > radius {
                    return Err(KfbiError::MissingPatch { node });
                }
                let q = iface.point(patch).xi;
                Ok(NodeEntry {
                    node,
                    patch,
                    basis: basis((p[0] - q[0]) / radius, (p[1] - q[1]) / radius),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut slot = vec![usize::MAX; grid.len()];
        for (k, e) in entries.iter().enumerate() {
            slot[e.node] = k;
        }
        Ok(CorrectionPlan {
            grid,
            systems,
            entries,
            slot,
        })
    }

    pub fn max_condition(&self) -> f64 {
        self.systems.iter().map(|s| s.condition).fold(0.0, f64::max)
    }

    /// Patch index assigned to `node`, if it is covered.
    pub fn assignment(&self, node: usize) -> Option<usize> {
        match self.slot[node] {
            usize::MAX => None,
            k => Some(self.entries[k].patch),
        }
    }

    pub fn covered_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.node)
    }

    pub fn field(&self, jumps: &JumpData) -> Result<CorrectionField> {
        jumps.validate(self.systems.len())?;
        let patches: Vec<CauchyPatch> = self.systems.iter().map(|s| s.solve(jumps)).collect();
        let mut values = vec![0.0; self.grid.len()];
        for e in &self.entries {
            let a = &patches[e.patch].alpha;
            values[e.node] = (0..6).map(|k| a[k] * e.basis[k]).sum();
        }
        Ok(CorrectionField {
            patches,
            values,
            slot: self.slot.clone(),
        })
    }
}

/// Piecewise-polynomial correction function `C_h = u⁺ − u⁻` evaluated at the
/// planned nodes.
#[derive(Debug, Clone)]
pub struct CorrectionField {
    pub patches: Vec<CauchyPatch>,
    values: Vec<f64>,
    slot: Vec<usize>,
}

impl CorrectionField {
    pub fn value(&self, node: usize) -> Result<f64> {
        if self.slot[node] == usize::MAX {
            return Err(KfbiError::MissingPatch { node });
        }
        Ok(self.values[node])
    }
}

/// Right-hand-side correction `D`: zero at regular nodes, `−Σ c·C` over the
/// opposite-side stencil members of irregular `+` nodes and `+Σ c·C` for
/// irregular `−` nodes.
pub fn rhs_correction(
    op: &SevenPointOperator,
    cls: &NodeClassification,
    field: &CorrectionField,
) -> Result<GridFunction> {
    let mut d = GridFunction::zeros(op.grid);
    for (&idx, cut) in cls.irregular.iter().zip(&cls.stencil_cut) {
        let mut s = 0.0;
        for &(k, n) in cut {
            s += op.coeffs[idx][k] * field.value(n)?;
        }
        d.values[idx] = match cls.side[idx] {
            Side::Plus => -s,
            Side::Minus => s,
        };
    }
    Ok(d)
}

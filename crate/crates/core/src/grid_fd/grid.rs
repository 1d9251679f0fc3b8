use crate::error::{KfbiError, Result};
use crate::geometry::{ParamDomain, Point2};

/// Uniform Cartesian grid over a square parameter domain.
///
/// Non-periodic directions carry `n + 1` nodes `0..=n` (the outer ones are
/// boundary nodes); periodic directions carry `n` nodes `0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub n: usize,
    pub periodic_x: bool,
    pub periodic_y: bool,
}

impl CartesianGrid {
    pub fn new(domain: &ParamDomain, n: usize) -> Result<Self> {
        let wx = domain.u1 - domain.u0;
        let wy = domain.v1 - domain.v0;
        if n < 2 {
            return Err(KfbiError::InvalidGrid(format!(
                "need at least 2 subdivisions, got {n}"
            )));
        }
        if !(wx > 0.0) || ((wx - wy) / wx).abs() > 1e-12 {
            return Err(KfbiError::InvalidGrid(format!(
                "parameter domain must be a square, got {wx} x {wy}"
            )));
        }
        Ok(CartesianGrid {
            x0: domain.u0,
            y0: domain.v0,
            h: wx / n as f64,
            n,
            periodic_x: domain.periodic_u,
            periodic_y: domain.periodic_v,
        })
    }

    pub fn nx(&self) -> usize {
        if self.periodic_x {
            self.n
        } else {
            self.n + 1
        }
    }

    pub fn ny(&self) -> usize {
        if self.periodic_y {
            self.n
        } else {
            self.n + 1
        }
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx(), idx / self.nx())
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Point2 {
        [self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h]
    }

    pub fn node_point(&self, idx: usize) -> Point2 {
        let (i, j) = self.ij(idx);
        self.point(i, j)
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.ij(idx);
        (!self.periodic_x && (i == 0 || i == self.n))
            || (!self.periodic_y && (j == 0 || j == self.n))
    }

    /// Index of the node offset by `(di, dj)`, wrapping in periodic directions.
    /// `None` if the offset leaves the grid.
    pub fn offset(&self, i: usize, j: usize, di: i64, dj: i64) -> Option<usize> {
        let wrap = |k: usize, d: i64, count: usize, periodic: bool| -> Option<usize> {
            let t = k as i64 + d;
            if periodic {
                Some(t.rem_euclid(count as i64) as usize)
            } else if t < 0 || t >= count as i64 {
                None
            } else {
                Some(t as usize)
            }
        };
        let ii = wrap(i, di, self.nx(), self.periodic_x)?;
        let jj = wrap(j, dj, self.ny(), self.periodic_y)?;
        Some(self.idx(ii, jj))
    }

    /// Interior nodes in lexicographic order (x fastest).
    pub fn interior(&self) -> Vec<usize> {
        let (xs, xe) = if self.periodic_x {
            (0, self.n)
        } else {
            (1, self.n)
        };
        let (ys, ye) = if self.periodic_y {
            (0, self.n)
        } else {
            (1, self.n)
        };
        let mut out = Vec::with_capacity((xe - xs) * (ye - ys));
        for j in ys..ye {
            for i in xs..xe {
                out.push(self.idx(i, j));
            }
        }
        out
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.periodic_x && self.periodic_y
    }

    /// Grid with half the subdivisions over the same domain.
    pub fn coarsen(&self) -> Option<CartesianGrid> {
        if !self.n.is_multiple_of(2) || self.n < 4 {
            return None;
        }
        Some(CartesianGrid {
            h: 2.0 * self.h,
            n: self.n / 2,
            ..*self
        })
    }

    /// Nearest node to `p` as unwrapped integer coordinates.
    pub fn nearest(&self, p: Point2) -> (i64, i64) {
        (
            ((p[0] - self.x0) / self.h).round() as i64,
            ((p[1] - self.y0) / self.h).round() as i64,
        )
    }

    /// Index for possibly out-of-range integer coordinates.
    pub fn wrap_index(&self, i: i64, j: i64) -> Option<usize> {
        self.offset(0, 0, i, j)
    }
}

/// Node values on a [`CartesianGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: CartesianGrid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: CartesianGrid) -> Self {
        GridFunction {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: CartesianGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(KfbiError::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: CartesianGrid, f: impl Fn(Point2) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node_point(k))).collect();
        GridFunction { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

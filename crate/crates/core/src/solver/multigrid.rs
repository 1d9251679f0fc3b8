use std::time::Instant;

use crate::error::{KfbiError, Result};
use crate::geometry::CoefficientField;
use crate::grid_fd::{CartesianGrid, GridFunction, SevenPointOperator, CENTER, OFFSETS};
use crate::solver::dense::LuFactor;
use crate::solver::SolveStats;

/// Relaxation used on every level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoother {
    /// Lexicographic point Gauss–Seidel.
    GaussSeidel,
    /// Line Gauss–Seidel along x-lines, then along y-lines.
    AlternatingLine,
    /// Point Gauss–Seidel unless the fine-grid diffusion anisotropy exceeds
    /// [`AUTO_ANISOTROPY`], in which case alternating lines.
    Auto,
}

/// Ratio of x- to y-diffusion (either way) above which `Auto` picks line smoothing.
pub const AUTO_ANISOTROPY: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultigridConfig {
    pub pre_smooth: usize,
    pub post_smooth: usize,
    pub tol: f64,
    pub max_cycles: usize,
    /// Coarsening stops once `N` would drop below this.
    pub coarse_n: usize,
    pub fmg: bool,
    pub smoother: Smoother,
}

impl Default for MultigridConfig {
    fn default() -> Self {
        MultigridConfig {
            pre_smooth: 2,
            post_smooth: 2,
            tol: 1e-10,
            max_cycles: 60,
            coarse_n: 8,
            fmg: true,
            smoother: Smoother::Auto,
        }
    }
}

/// Interior row with neighbour indices into a vector of length `len + 1`;
/// index `len` is a sentinel that always holds zero. Slots follow
/// [`OFFSETS`]; the centre slot is unused.
#[derive(Debug, Clone, Copy)]
struct Row {
    node: u32,
    diag: f64,
    nbr: [u32; 9],
    c: [f64; 9],
}

/// A line of rows for line relaxation, with the slot of the in-line
/// predecessor and successor.
#[derive(Debug, Clone)]
struct Line {
    rows: Vec<u32>,
    cyclic: bool,
    prev_slot: usize,
    next_slot: usize,
}

#[derive(Debug, Clone)]
struct Level {
    grid: CartesianGrid,
    rows: Vec<Row>,
    x_lines: Vec<Line>,
    y_lines: Vec<Line>,
}

/// Solves the (optionally cyclic) tridiagonal system
/// `lo_i x_{i−1} + d_i x_i + up_i x_{i+1} = r_i` in place of `r`.
fn solve_tridiagonal(
    lo: &[f64],
    d: &[f64],
    up: &[f64],
    r: &mut [f64],
    cyclic: bool,
    work: &mut Vec<f64>,
) {
    let n = d.len();
    let thomas = |dd: &[f64], rr: &mut [f64], cp: &mut Vec<f64>| {
        cp.clear();
        cp.resize(n, 0.0);
        let mut denom = dd[0];
        cp[0] = up[0] / denom;
        rr[0] /= denom;
        for i in 1..n {
            denom = dd[i] - lo[i] * cp[i - 1];
            cp[i] = up[i] / denom;
            rr[i] = (rr[i] - lo[i] * rr[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            rr[i] -= cp[i] * rr[i + 1];
        }
    };
    if !cyclic || n < 3 {
        thomas(d, r, work);
        return;
    }
    // Sherman–Morrison for the corner entries lo_0 and up_{n−1}
    let gamma = -d[0];
    let mut dd = d.to_vec();
    dd[0] -= gamma;
    dd[n - 1] -= lo[0] * up[n - 1] / gamma;
    let mut cp = Vec::new();
    thomas(&dd, r, &mut cp);
    let mut z = vec![0.0; n];
    z[0] = gamma;
    z[n - 1] = up[n - 1];
    thomas(&dd, &mut z, &mut cp);
    let vy = r[0] + lo[0] / gamma * r[n - 1];
    let vz = z[0] + lo[0] / gamma * z[n - 1];
    let f = vy / (1.0 + vz);
    for i in 0..n {
        r[i] -= f * z[i];
    }
}

impl Level {
    fn new(op: &SevenPointOperator) -> Self {
        let grid = op.grid;
        let sentinel = grid.len() as u32;
        let interior = grid.interior();
        let rows: Vec<Row> = interior
            .iter()
            .map(|&idx| {
                let (i, j) = grid.ij(idx);
                let cf = &op.coeffs[idx];
                let mut nbr = [sentinel; 9];
                let mut c = [0.0; 9];
                for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
                    if k == CENTER || cf[k] == 0.0 {
                        continue;
                    }
                    if let Some(n) = grid.offset(i, j, dx, dy) {
                        if !grid.is_boundary(n) {
                            nbr[k] = n as u32;
                            c[k] = cf[k];
                        }
                    }
                }
                Row {
                    node: idx as u32,
                    diag: cf[CENTER],
                    nbr,
                    c,
                }
            })
            .collect();
        let mut pos = vec![u32::MAX; grid.len()];
        for (r, &idx) in interior.iter().enumerate() {
            pos[idx] = r as u32;
        }
        let (is, ie) = if grid.periodic_x {
            (0, grid.n)
        } else {
            (1, grid.n)
        };
        let (js, je) = if grid.periodic_y {
            (0, grid.n)
        } else {
            (1, grid.n)
        };
        let x_lines = (js..je)
            .map(|j| Line {
                rows: (is..ie).map(|i| pos[grid.idx(i, j)]).collect(),
                cyclic: grid.periodic_x,
                prev_slot: 3,
                next_slot: 5,
            })
            .collect();
        let y_lines = (is..ie)
            .map(|i| Line {
                rows: (js..je).map(|j| pos[grid.idx(i, j)]).collect(),
                cyclic: grid.periodic_y,
                prev_slot: 1,
                next_slot: 7,
            })
            .collect();
        Level {
            grid,
            rows,
            x_lines,
            y_lines,
        }
    }

    fn vec(&self) -> Vec<f64> {
        vec![0.0; self.grid.len() + 1]
    }

    #[inline]
    fn off_diag(row: &Row, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..9 {
            s += row.c[k] * u[row.nbr[k] as usize];
        }
        s
    }

    /// Largest ratio between x- and y-direction diffusion weights.
    fn anisotropy(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let ax = r.c[3] + r.c[5];
                let ay = r.c[1] + r.c[7];
                if ax <= 0.0 || ay <= 0.0 {
                    f64::INFINITY
                } else {
                    (ax / ay).max(ay / ax)
                }
            })
            .fold(1.0, f64::max)
    }

    fn gauss_seidel(&self, u: &mut [f64], f: &[f64], sweeps: usize) {
        for _ in 0..sweeps {
            for row in &self.rows {
                let n = row.node as usize;
                u[n] = (f[n] - Self::off_diag(row, u)) / row.diag;
            }
        }
    }

    fn line_sweep(&self, lines: &[Line], u: &mut [f64], f: &[f64]) {
        let mut lo = Vec::new();
        let mut d = Vec::new();
        let mut up = Vec::new();
        let mut r = Vec::new();
        let mut work = Vec::new();
        for line in lines {
            lo.clear();
            d.clear();
            up.clear();
            r.clear();
            for &ri in &line.rows {
                let row = &self.rows[ri as usize];
                let n = row.node as usize;
                let mut s = f[n];
                for k in 0..9 {
                    if k != line.prev_slot && k != line.next_slot {
                        s -= row.c[k] * u[row.nbr[k] as usize];
                    }
                }
                lo.push(row.c[line.prev_slot]);
                up.push(row.c[line.next_slot]);
                d.push(row.diag);
                r.push(s);
            }
            if !line.cyclic {
                // couplings to boundary nodes are already zero; drop the wrap slots
                lo[0] = 0.0;
                *up.last_mut().unwrap() = 0.0;
            }
            solve_tridiagonal(&lo, &d, &up, &mut r, line.cyclic, &mut work);
            for (&ri, v) in line.rows.iter().zip(&r) {
                u[self.rows[ri as usize].node as usize] = *v;
            }
        }
    }

    fn smooth(&self, u: &mut [f64], f: &[f64], sweeps: usize, smoother: Smoother) {
        match smoother {
            Smoother::AlternatingLine => {
                for _ in 0..sweeps {
                    self.line_sweep(&self.x_lines, u, f);
                    self.line_sweep(&self.y_lines, u, f);
                }
            }
            _ => self.gauss_seidel(u, f, sweeps),
        }
    }

    fn residual(&self, u: &[f64], f: &[f64], r: &mut [f64]) {
        for row in &self.rows {
            let n = row.node as usize;
            r[n] = f[n] - row.diag * u[n] - Self::off_diag(row, u);
        }
    }

    fn norm(&self, v: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| v[r.node as usize].powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Full-weighting restriction of interior values.
fn restrict(fine: &Level, coarse: &Level, r: &[f64], out: &mut [f64]) {
    const W: [f64; 9] = [1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0];
    let fg = &fine.grid;
    let sentinel = fg.len();
    for row in &coarse.rows {
        let cn = row.node as usize;
        let (ci, cj) = coarse.grid.ij(cn);
        let mut s = 0.0;
        for (k, &(dx, dy)) in OFFSETS.iter().enumerate() {
            let n = fg.offset(2 * ci, 2 * cj, dx, dy).unwrap_or(sentinel);
            if n != sentinel && !fg.is_boundary(n) {
                s += W[k] * r[n];
            }
        }
        out[cn] = s / 16.0;
    }
}

/// Bilinear prolongation, added into `u`.
fn prolong_add(coarse: &Level, fine: &Level, e: &[f64], u: &mut [f64]) {
    let fg = &fine.grid;
    for row in &coarse.rows {
        let cn = row.node as usize;
        let v = e[cn];
        if v == 0.0 {
            continue;
        }
        let (ci, cj) = coarse.grid.ij(cn);
        for &(dx, dy) in OFFSETS.iter() {
            if let Some(n) = fg.offset(2 * ci, 2 * cj, dx, dy) {
                let w = (1.0 - 0.5 * dx.abs() as f64) * (1.0 - 0.5 * dy.abs() as f64);
                u[n] += w * v;
            }
        }
    }
    for idx in 0..fg.len() {
        if fg.is_boundary(idx) {
            u[idx] = 0.0;
        }
    }
}

/// Geometric multigrid for the seven-point system `L_h u = f` with
/// homogeneous boundary values, rediscretized on every level.
pub struct MultigridHierarchy {
    pub config: MultigridConfig,
    levels: Vec<Level>,
    coarse_lu: LuFactor,
    smoother: Smoother,
}

impl std::fmt::Debug for MultigridHierarchy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultigridHierarchy")
            .field("config", &self.config)
            .field("smoother", &self.smoother)
            .field(
                "levels",
                &self.levels.iter().map(|l| l.grid.n).collect::<Vec<_>>(),
            )
            .finish()
    }
}

const MAX_COARSE_UNKNOWNS: usize = 4096;

impl MultigridHierarchy {
    pub fn build(
        grid: CartesianGrid,
        field: &dyn CoefficientField,
        config: MultigridConfig,
    ) -> Result<Self> {
        let fine = SevenPointOperator::build(grid, field)?;
        Self::from_operator(&fine, field, config)
    }

    /// Uses `fine` as the finest level and rebuilds coarser levels from `field`.
    pub fn from_operator(
        fine: &SevenPointOperator,
        field: &dyn CoefficientField,
        config: MultigridConfig,
    ) -> Result<Self> {
        if fine.is_singular_periodic() {
            return Err(KfbiError::SingularOperator(
                "periodic operator without reaction term has a constant nullspace".into(),
            ));
        }
        let mut levels = vec![Level::new(fine)];
        let mut coarsest = fine.clone();
        let mut grid = fine.grid;
        while grid.n / 2 >= config.coarse_n {
            let Some(c) = grid.coarsen() else { break };
            grid = c;
            coarsest = SevenPointOperator::build(grid, field)?;
            levels.push(Level::new(&coarsest));
        }
        let (interior, dense) = coarsest.to_dense();
        if interior.len() > MAX_COARSE_UNKNOWNS {
            return Err(KfbiError::InvalidGrid(format!(
                "grid size {} does not coarsen below {} unknowns",
                fine.grid.n, MAX_COARSE_UNKNOWNS
            )));
        }
        let flat: Vec<f64> = dense.into_iter().flatten().collect();
        let coarse_lu = LuFactor::new(&flat, interior.len())?;
        let smoother = match config.smoother {
            Smoother::Auto if levels[0].anisotropy() > AUTO_ANISOTROPY => Smoother::AlternatingLine,
            Smoother::Auto => Smoother::GaussSeidel,
            s => s,
        };
        Ok(MultigridHierarchy {
            config,
            levels,
            coarse_lu,
            smoother,
        })
    }

    pub fn grid(&self) -> CartesianGrid {
        self.levels[0].grid
    }

    /// Smoother in use after resolving [`Smoother::Auto`].
    pub fn smoother(&self) -> Smoother {
        self.smoother
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    fn coarse_solve(&self, u: &mut [f64], f: &[f64]) {
        let lvl = self.levels.last().unwrap();
        let b: Vec<f64> = lvl.rows.iter().map(|r| f[r.node as usize]).collect();
        let x = self.coarse_lu.solve(&b);
        for (row, v) in lvl.rows.iter().zip(x) {
            u[row.node as usize] = v;
        }
    }

    fn v_cycle(&self, l: usize, u: &mut [f64], f: &[f64]) {
        if l + 1 == self.levels.len() {
            self.coarse_solve(u, f);
            return;
        }
        let lvl = &self.levels[l];
        let next = &self.levels[l + 1];
        lvl.smooth(u, f, self.config.pre_smooth, self.smoother);
        let mut r = lvl.vec();
        lvl.residual(u, f, &mut r);
        let mut fc = next.vec();
        restrict(lvl, next, &r, &mut fc);
        let mut ec = next.vec();
        self.v_cycle(l + 1, &mut ec, &fc);
        prolong_add(next, lvl, &ec, u);
        lvl.smooth(u, f, self.config.post_smooth, self.smoother);
    }

    fn fmg(&self, u: &mut [f64], f: &[f64]) {
        let nlev = self.levels.len();
        let mut rhs: Vec<Vec<f64>> = vec![f.to_vec()];
        for l in 1..nlev {
            let mut fc = self.levels[l].vec();
            restrict(&self.levels[l - 1], &self.levels[l], &rhs[l - 1], &mut fc);
            rhs.push(fc);
        }
        let mut cur = self.levels[nlev - 1].vec();
        self.coarse_solve(&mut cur, &rhs[nlev - 1]);
        for l in (0..nlev - 1).rev() {
            let mut next = self.levels[l].vec();
            prolong_add(&self.levels[l + 1], &self.levels[l], &cur, &mut next);
            self.v_cycle(l, &mut next, &rhs[l]);
            cur = next;
        }
        u.copy_from_slice(&cur);
    }

    /// Solves `L_h u = rhs` on interior nodes to relative residual `tol`.
    pub fn solve(&self, rhs: &GridFunction) -> Result<(GridFunction, SolveStats)> {
        self.solve_with_tol(rhs, self.config.tol)
    }

    pub fn solve_with_tol(
        &self,
        rhs: &GridFunction,
        tol: f64,
    ) -> Result<(GridFunction, SolveStats)> {
        let start = Instant::now();
        let fine = &self.levels[0];
        let grid = fine.grid;
        if rhs.grid != grid {
            return Err(KfbiError::ShapeMismatch {
                expected: grid.len(),
                got: rhs.values.len(),
            });
        }
        let mut f = fine.vec();
        for row in &fine.rows {
            f[row.node as usize] = rhs.values[row.node as usize];
        }
        let fnorm = fine.norm(&f);
        let mut u = fine.vec();
        if fnorm == 0.0 {
            u.pop();
            return Ok((
                GridFunction::from_values(grid, u)?,
                SolveStats {
                    iterations: 0,
                    final_residual: 0.0,
                    wall_time: start.elapsed().as_secs_f64(),
                },
            ));
        }
        if self.config.fmg {
            self.fmg(&mut u, &f);
        }
        let mut r = fine.vec();
        fine.residual(&u, &f, &mut r);
        let mut rel = fine.norm(&r) / fnorm;
        let mut cycles = 0;
        while rel > tol {
            if cycles >= self.config.max_cycles {
                return Err(KfbiError::MultigridNotConverged {
                    cycles,
                    residual: rel,
                });
            }
            self.v_cycle(0, &mut u, &f);
            cycles += 1;
            fine.residual(&u, &f, &mut r);
            rel = fine.norm(&r) / fnorm;
            if !rel.is_finite() {
                return Err(KfbiError::MultigridNotConverged {
                    cycles,
                    residual: rel,
                });
            }
        }
        u.pop();
        for idx in 0..grid.len() {
            if grid.is_boundary(idx) {
                u[idx] = 0.0;
            }
        }
        Ok((
            GridFunction::from_values(grid, u)?,
            SolveStats {
                iterations: cycles,
                final_residual: rel,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ))
    }

    /// Average residual reduction per V-cycle from a random start with zero rhs.
    pub fn convergence_factor(&self, cycles: usize) -> f64 {
        let fine = &self.levels[0];
        let mut state = 0x853c49e6748fea9b_u64;
        let mut u = fine.vec();
        for row in &fine.rows {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            u[row.node as usize] = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
        let f = fine.vec();
        let mut r = fine.vec();
        // let the smooth start decay before measuring
        self.v_cycle(0, &mut u, &f);
        fine.residual(&u, &f, &mut r);
        let r0 = fine.norm(&r);
        for _ in 0..cycles {
            self.v_cycle(0, &mut u, &f);
        }
        fine.residual(&u, &f, &mut r);
        (fine.norm(&r) / r0).powf(1.0 / cycles as f64)
    }
}

/// Convenience wrapper over [`MultigridHierarchy::solve_with_tol`].
pub fn multigrid_solve(
    hier: &MultigridHierarchy,
    rhs: &GridFunction,
    tol: f64,
) -> Result<(GridFunction, SolveStats)> {
    hier.solve_with_tol(rhs, tol)
}

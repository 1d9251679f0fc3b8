use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::grid_fd::GridFunction;
use crate::interface::{NodeClassification, Side};

/// One grid level of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub m: usize,
    pub gmres_iterations: usize,
    pub cpu_seconds: f64,
    pub max_error: f64,
    /// `log₂(e_{N/2}/e_N)`; absent on the coarsest row.
    pub observed_order: Option<f64>,
    /// Error tag and message when the row aborted.
    pub failure: Option<String>,
}

/// Fills `observed_order` from consecutive rows whose sizes double.
pub fn fill_orders(rows: &mut [ConvergenceRow]) {
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        rows[k].observed_order =
            if cur.n == 2 * prev.n && prev.failure.is_none() && cur.failure.is_none() {
                Some((prev.max_error / cur.max_error).log2())
            } else {
                None
            };
    }
}

/// Max norm of `u_h − exact` over non-boundary nodes, restricted to `side`
/// when given.
pub fn error_norm(
    u_h: &GridFunction,
    exact: &[f64],
    cls: &NodeClassification,
    side: Option<Side>,
) -> f64 {
    let grid = u_h.grid;
    let mut e: f64 = 0.0;
    for k in 0..grid.len() {
        if grid.is_boundary(k) || side.is_some_and(|s| cls.side[k] != s) {
            continue;
        }
        e = e.max((u_h.values[k] - exact[k]).abs());
    }
    e
}

pub const TABLE_HEADER: &str = "N,M,iters,cpu_s,max_err,order";

pub fn format_table(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from(TABLE_HEADER);
    s.push('\n');
    for r in rows {
        let order = r
            .observed_order
            .map(|o| format!("{o:.4}"))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{:.4},{:.6e},{}",
            r.n, r.m, r.gmres_iterations, r.cpu_seconds, r.max_error, order
        );
    }
    s
}

pub fn emit_table(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    std::fs::write(path, format_table(rows))?;
    Ok(())
}

/// Plain-text structured-grid dump: a short header, then one grid row per
/// line (`j` outer, `i` inner).
pub fn dump_field(u: &GridFunction, path: &Path) -> Result<()> {
    let g = u.grid;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# kfbi grid field")?;
    writeln!(out, "n {}", g.n)?;
    writeln!(
        out,
        "rect {} {} {} {}",
        g.x0,
        g.x0 + g.n as f64 * g.h,
        g.y0,
        g.y0 + g.n as f64 * g.h
    )?;
    writeln!(out, "periodic {} {}", g.periodic_x, g.periodic_y)?;
    writeln!(out, "shape {} {}", g.nx(), g.ny())?;
    for j in 0..g.ny() {
        let line: Vec<String> = (0..g.nx())
            .map(|i| format!("{:.16e}", u.values[g.idx(i, j)]))
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

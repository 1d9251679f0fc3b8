use std::time::Instant;

use crate::error::{KfbiError, Result};
use crate::solver::SolveStats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unrestarted GMRES from a zero initial guess. `apply` must be linear.
///
/// Arnoldi uses modified Gram–Schmidt with a second pass whenever the new
/// vector keeps a component above `1e-8` along the existing basis.
pub fn gmres<F>(mut apply: F, rhs: &[f64], config: GmresConfig) -> Result<(Vec<f64>, SolveStats)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let start = Instant::now();
    let n = rhs.len();
    let beta = norm(rhs);
    if beta == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                final_residual: 0.0,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }
    let max_iter = config.max_iter.min(n.max(1));
    let mut basis: Vec<Vec<f64>> = vec![rhs.iter().map(|v| v / beta).collect()];
    // Hessenberg columns, already rotated
    let mut hcols: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut rel = 1.0;
    let mut k = 0;
    while k < max_iter {
        let mut w = apply(&basis[k])?;
        if w.len() != n {
            return Err(KfbiError::ShapeMismatch {
                expected: n,
                got: w.len(),
            });
        }
        let mut h = vec![0.0; k + 2];
        for (j, v) in basis.iter().enumerate() {
            let c = dot(&w, v);
            h[j] = c;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
        }
        let mut wn = norm(&w);
        let loss =
            basis.iter().map(|v| dot(&w, v).abs()).fold(0.0, f64::max) / wn.max(f64::MIN_POSITIVE);
        if loss > 1e-8 {
            for (j, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                h[j] += c;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
            wn = norm(&w);
        }
        h[k + 1] = wn;
        for j in 0..k {
            let t = cs[j] * h[j] + sn[j] * h[j + 1];
            h[j + 1] = -sn[j] * h[j] + cs[j] * h[j + 1];
            h[j] = t;
        }
        let r = h[k].hypot(h[k + 1]);
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (h[k] / r, h[k + 1] / r)
        };
        h[k] = r;
        h[k + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        g.push(-s * g[k]);
        g[k] *= c;
        hcols.push(h);
        k += 1;
        rel = g[k].abs() / beta;
        if rel <= config.tol || wn == 0.0 {
            break;
        }
        basis.push(w.iter().map(|v| v / wn).collect());
    }
    if rel > config.tol {
        return Err(KfbiError::GmresNotConverged {
            iterations: k,
            residual: rel,
        });
    }
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= hcols[j][i] * y[j];
        }
        y[i] = s / hcols[i][i];
    }
    let mut x = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        for (xi, vi) in x.iter_mut().zip(&basis[j]) {
            *xi += yj * vi;
        }
    }
    Ok((
        x,
        SolveStats {
            iterations: k,
            final_residual: rel,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![1.0, -2.0, 0.5];
        let (x, stats) = gmres(|v| Ok(v.to_vec()), &b, GmresConfig::default()).unwrap();
        assert_eq!(stats.iterations, 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let (x, _) = gmres(
            |v| Ok(vec![2.0 * v[0], 3.0 * v[1]]),
            &[2.0, 3.0],
            GmresConfig::default(),
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-8 && (x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn nonsymmetric_second_kind_system() {
        // (I/2 + K) with a smooth non-symmetric K
        let n = 60;
        let k =
            |i: usize, j: usize| 0.3 * ((i as f64 - 2.0 * j as f64) / n as f64).cos() / n as f64;
        let apply = |v: &[f64]| -> Result<Vec<f64>> {
            Ok((0..n)
                .map(|i| 0.5 * v[i] + (0..n).map(|j| k(i, j) * v[j]).sum::<f64>())
                .collect())
        };
        let xe: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = apply(&xe).unwrap();
        let (x, stats) = gmres(apply, &b, GmresConfig::default()).unwrap();
        assert!(stats.iterations < 10);
        for (a, e) in x.iter().zip(&xe) {
            assert!((a - e).abs() < 1e-7);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let n = 50;
        // shift operator: Krylov space needs n steps
        let apply =
            |v: &[f64]| -> Result<Vec<f64>> { Ok((0..n).map(|i| v[(i + 1) % n]).collect()) };
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let cfg = GmresConfig {
            tol: 1e-8,
            max_iter: 10,
        };
        assert!(matches!(
            gmres(apply, &b, cfg),
            Err(KfbiError::GmresNotConverged { iterations: 10, .. })
        ));
    }
}

use crate::error::{KfbiError, Result};

/// Householder QR of a dense `m × n` matrix (`m ≥ n`), stored row-major.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    m: usize,
    n: usize,
    /// `R` in the upper triangle, Householder vectors below it.
    qr: Vec<f64>,
    /// Leading entries of the Householder vectors.
    v0: Vec<f64>,
    r_diag: Vec<f64>,
}

impl HouseholderQr {
    pub fn new(a: &[f64], m: usize, n: usize) -> Result<Self> {
        if a.len() != m * n || m < n {
            return Err(KfbiError::ShapeMismatch {
                expected: m * n,
                got: a.len(),
            });
        }
        let mut qr = a.to_vec();
        let mut v0 = vec![0.0; n];
        let mut r_diag = vec![0.0; n];
        for k in 0..n {
            let norm = (k..m).map(|i| qr[i * n + k].powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                r_diag[k] = 0.0;
                v0[k] = 0.0;
                continue;
            }
            let alpha = if qr[k * n + k] > 0.0 { -norm } else { norm };
            // v = x − α e_1, stored with v_k separately
            let vk = qr[k * n + k] - alpha;
            let vnorm2 = vk * vk + (k + 1..m).map(|i| qr[i * n + k].powi(2)).sum::<f64>();
            v0[k] = vk;
            r_diag[k] = alpha;
            if vnorm2 > 0.0 {
                for j in k + 1..n {
                    let mut dot = vk * qr[k * n + j];
                    for i in k + 1..m {
                        dot += qr[i * n + k] * qr[i * n + j];
                    }
                    let f = 2.0 * dot / vnorm2;
                    qr[k * n + j] -= f * vk;
                    for i in k + 1..m {
                        qr[i * n + j] -= f * qr[i * n + k];
                    }
                }
            }
            qr[k * n + k] = alpha;
        }
        Ok(HouseholderQr {
            m,
            n,
            qr,
            v0,
            r_diag,
        })
    }

    pub fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    /// `max |R_ii| / min |R_ii|`.
    pub fn condition_estimate(&self) -> f64 {
        let (lo, hi) = self
            .r_diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
                (lo.min(r.abs()), hi.max(r.abs()))
            });
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Numerical rank with relative threshold `tol` on `|R_ii|`.
    pub fn rank(&self, tol: f64) -> usize {
        let hi = self.r_diag.iter().fold(0.0f64, |h, r| h.max(r.abs()));
        self.r_diag.iter().filter(|r| r.abs() > tol * hi).count()
    }

    /// Least-squares solution of `A x ≈ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = (self.m, self.n);
        if b.len() != m {
            return Err(KfbiError::ShapeMismatch {
                expected: m,
                got: b.len(),
            });
        }
        let mut y = b.to_vec();
        for k in 0..n {
            let vk = self.v0[k];
            let vnorm2 = vk * vk + (k + 1..m).map(|i| self.qr[i * n + k].powi(2)).sum::<f64>();
            if vnorm2 == 0.0 {
                continue;
            }
            let mut dot = vk * y[k];
            for i in k + 1..m {
                dot += self.qr[i * n + k] * y[i];
            }
            let f = 2.0 * dot / vnorm2;
            y[k] -= f * vk;
            for i in k + 1..m {
                y[i] -= f * self.qr[i * n + k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..n {
                s -= self.qr[k * n + j] * x[j];
            }
            if self.r_diag[k] == 0.0 {
                return Err(KfbiError::RankDeficient {
                    rank: self.rank(0.0),
                    expected: n,
                });
            }
            x[k] = s / self.r_diag[k];
        }
        Ok(x)
    }
}

/// Relative `|R_ii|` threshold below which a small system counts as rank deficient.
pub const RANK_TOL: f64 = 1e-13;

/// Solves a 6 × 6 system by Householder QR, returning the solution and the
/// `R`-diagonal condition estimate.
pub fn qr_solve_small(a: &[[f64; 6]; 6], b: &[f64; 6]) -> Result<([f64; 6], f64)> {
    let flat: Vec<f64> = a.iter().flatten().copied().collect();
    let qr = HouseholderQr::new(&flat, 6, 6)?;
    let rank = qr.rank(RANK_TOL);
    if rank < 6 {
        return Err(KfbiError::RankDeficient { rank, expected: 6 });
    }
    let x = qr.solve(b)?;
    let mut out = [0.0; 6];
    out.copy_from_slice(&x);
    Ok((out, qr.condition_estimate()))
}

/// LU factorization with partial pivoting of a dense `n × n` matrix.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &[f64], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(KfbiError::ShapeMismatch {
                expected: n * n,
                got: a.len(),
            });
        }
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
                .unwrap();
            if lu[p * n + k].abs() <= 1e-14 * scale {
                return Err(KfbiError::SingularOperator(format!(
                    "zero pivot in column {k}"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(LuFactor { n, lu, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

//! Ordinary least squares via Householder QR.
//!
//! The unit-root regressions need coefficient t-ratios, so the fit reports
//! standard errors from the `sigma^2 (X'X)^-1` diagonal, computed from the
//! triangular factor rather than by forming the normal equations.

use crate::error::{Error, Result};

/// Dense row-major matrix, just large enough for regression designs.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows in design matrix".into()));
        }
        Ok(Self { rows: nrows, cols: ncols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `A x` for a length-`cols` vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// A completed least-squares fit.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual variance, RSS / (m - k).
    pub sigma2: f64,
    /// Gaussian log-likelihood at the ML variance RSS / m.
    pub log_likelihood: f64,
}

impl OlsFit {
    /// Akaike information criterion, `-2 llf + 2 k`.
    pub fn aic(&self) -> f64 {
        -2.0 * self.log_likelihood + 2.0 * self.coefficients.len() as f64
    }
}

/// Least-squares fit of `response` on the columns of `design`.
///
/// Requires at least as many rows as columns and full column rank; rank
/// deficiency is detected from the triangular factor's diagonal.
pub fn ols(design: &Matrix, response: &[f64]) -> Result<OlsFit> {
    let m = design.rows();
    let k = design.cols();
    if response.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "design has {m} rows but response has {} entries",
            response.len()
        )));
    }
    if k == 0 || m < k {
        return Err(Error::DimensionMismatch(format!(
            "design must be tall: {m} rows x {k} cols"
        )));
    }

    // Householder QR on a working copy, transforming y alongside.
    let mut a = design.clone();
    let mut y = response.to_vec();
    let scale = (0..k)
        .map(|j| (0..m).map(|i| a.get(i, j).abs()).fold(0.0f64, f64::max))
        .fold(0.0f64, f64::max)
        .max(1.0);

    for j in 0..k {
        let mut norm2 = 0.0;
        for i in j..m {
            let v = a.get(i, j);
            norm2 += v * v;
        }
        let norm = norm2.sqrt();
        if norm <= 1e-12 * scale {
            return Err(Error::RankDeficient { column: j });
        }
        let ajj = a.get(j, j);
        let alpha = if ajj >= 0.0 { -norm } else { norm };
        // Householder vector v: v_j = a_jj - alpha, v_i = a_ij below.
        let vj = ajj - alpha;
        let beta = 1.0 / (vj * alpha); // equals -2 / v'v given ||x|| = |alpha|
        a.set(j, j, alpha);

        // Apply H = I + beta * v v' to the remaining columns and to y.
        for col in (j + 1)..k {
            let mut dot = vj * a.get(j, col);
            for i in (j + 1)..m {
                dot += a.get(i, j) * a.get(i, col);
            }
            let factor = beta * dot;
            a.set(j, col, a.get(j, col) + factor * vj);
            for i in (j + 1)..m {
                a.set(i, col, a.get(i, col) + factor * a.get(i, j));
            }
        }
        let mut dot = vj * y[j];
        for i in (j + 1)..m {
            dot += a.get(i, j) * y[i];
        }
        let factor = beta * dot;
        y[j] += factor * vj;
        for i in (j + 1)..m {
            y[i] += factor * a.get(i, j);
        }
        // Keep v below the diagonal until the column loop moves on; entries
        // under the diagonal are no longer read once column j is finished.
    }

    // Rank check on the diagonal of R.
    for j in 0..k {
        if a.get(j, j).abs() <= 1e-12 * scale {
            return Err(Error::RankDeficient { column: j });
        }
    }

    // Back substitution: R beta = (Q'y)[..k].
    let mut coefficients = vec![0.0; k];
    for j in (0..k).rev() {
        let mut v = y[j];
        for col in (j + 1)..k {
            v -= a.get(j, col) * coefficients[col];
        }
        coefficients[j] = v / a.get(j, j);
    }

    let fitted = design.mul_vec(&coefficients);
    let residuals: Vec<f64> = response.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let dof = (m - k).max(1);
    let sigma2 = rss / dof as f64;

    // R^-1 by back substitution; diag of (X'X)^-1 = row sums of squares.
    let mut rinv = vec![vec![0.0; k]; k];
    for col in 0..k {
        for row in (0..=col).rev() {
            let mut v = if row == col { 1.0 } else { 0.0 };
            for p in (row + 1)..=col {
                v -= a.get(row, p) * rinv[p][col];
            }
            rinv[row][col] = v / a.get(row, row);
        }
    }
    let standard_errors: Vec<f64> = (0..k)
        .map(|i| {
            let d: f64 = (i..k).map(|j| rinv[i][j] * rinv[i][j]).sum();
            (sigma2 * d).sqrt()
        })
        .collect();

    let n = m as f64;
    let sigma2_ml = (rss / n).max(f64::MIN_POSITIVE);
    let log_likelihood =
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + sigma2_ml.ln() + 1.0);

    Ok(OlsFit { coefficients, standard_errors, residuals, sigma2, log_likelihood })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: solve the normal equations X'X b = X'y by
    /// Gauss-Jordan elimination with partial pivoting.
    pub(crate) fn normal_equations_oracle(design: &Matrix, response: &[f64]) -> Vec<f64> {
        let m = design.rows();
        let k = design.cols();
        let mut xtx = vec![vec![0.0f64; k + 1]; k];
        for a in 0..k {
            for b in 0..k {
                let mut s = 0.0;
                for i in 0..m {
                    s += design.get(i, a) * design.get(i, b);
                }
                xtx[a][b] = s;
            }
            let mut s = 0.0;
            for i in 0..m {
                s += design.get(i, a) * response[i];
            }
            xtx[a][k] = s;
        }
        for col in 0..k {
            let piv = (col..k).max_by(|&a, &b| {
                xtx[a][col].abs().partial_cmp(&xtx[b][col].abs()).unwrap()
            }).unwrap();
            xtx.swap(col, piv);
            let d = xtx[col][col];
            for j in col..=k {
                xtx[col][j] /= d;
            }
            for row in 0..k {
                if row != col {
                    let f = xtx[row][col];
                    for j in col..=k {
                        xtx[row][j] -= f * xtx[col][j];
                    }
                }
            }
        }
        (0..k).map(|i| xtx[i][k]).collect()
    }

    #[test]
    fn intercept_only_recovers_mean() {
        let design = Matrix::from_fn(3, 1, |_, _| 1.0);
        let fit = ols(&design, &[1.0, 2.0, 3.0]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_line_fits_with_zero_residuals() {
        let design = Matrix::from_fn(10, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y: Vec<f64> = (0..10).map(|x| 2.0 * x as f64 + 1.0).collect();
        let fit = ols(&design, &y).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-10);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-10);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn matches_normal_equations_oracle_on_random_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let design = Matrix::from_fn(100, 3, |_, _| rng.gen_range(-5.0..5.0));
        let y: Vec<f64> = (0..100).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let fit = ols(&design, &y).unwrap();
        let oracle = normal_equations_oracle(&design, &y);
        for (a, b) in fit.coefficients.iter().zip(&oracle) {
            assert!(((a - b) / b.abs().max(1.0)).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn residuals_orthogonal_to_design_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let design = Matrix::from_fn(60, 4, |i, j| {
            if j == 0 { 1.0 } else { rng.gen_range(-3.0..3.0) * (i as f64 + 1.0).ln() }
        });
        let y: Vec<f64> = (0..60).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let fit = ols(&design, &y).unwrap();
        for j in 0..4 {
            let dot: f64 = (0..60).map(|i| design.get(i, j) * fit.residuals[i]).sum();
            let col_norm: f64 =
                (0..60).map(|i| design.get(i, j).powi(2)).sum::<f64>().sqrt();
            let res_norm: f64 = fit.residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
            assert!(dot.abs() < 1e-6 * col_norm * res_norm.max(1.0));
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        // Third column is the sum of the first two.
        let design = Matrix::from_fn(8, 3, |i, j| match j {
            0 => 1.0,
            1 => i as f64,
            _ => 1.0 + i as f64,
        });
        let y = vec![0.0; 8];
        assert!(matches!(ols(&design, &y), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn dimension_mismatch_detected() {
        let design = Matrix::from_fn(4, 2, |_, _| 1.0);
        assert!(ols(&design, &[1.0, 2.0]).is_err());
        let wide = Matrix::from_fn(2, 4, |_, _| 1.0);
        assert!(ols(&wide, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn standard_errors_match_closed_form_simple_regression() {
        // For y = a + b x, se(b) = sigma / sqrt(sum (x - xbar)^2).
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [1.1, 2.9, 5.2, 6.8, 9.1];
        let design = Matrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
        let fit = ols(&design, &y).unwrap();
        let sxx: f64 = x.iter().map(|v| (v - 2.0) * (v - 2.0)).sum();
        let expected_se_b = (fit.sigma2 / sxx).sqrt();
        assert!((fit.standard_errors[1] - expected_se_b).abs() < 1e-12);
    }
}

//! Nonnegative least squares, `min ‖A α − b‖` subject to `α ≥ 0`, by the
//! Lawson–Hanson active-set method. Sized for a handful of columns.

use nalgebra::{DMatrix, DVector};

/// Solution and residual norm `‖A α − b‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct NnlsSolution {
    pub coefficients: DVector<f64>,
    pub residual: f64,
}

/// Solves the problem for `a` with at least one column.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let n = a.ncols();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let tol = 1e-13 * scale * (a.nrows().max(n) as f64);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];

    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z = solve_subset(a, b, &idx);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            // Step towards z until the first coefficient hits zero.
            let mut alpha = f64::INFINITY;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[i] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z[k] - x[i]);
            }
            for &i in &idx {
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual = (a * &x - b).norm();
    NnlsSolution {
        coefficients: x,
        residual,
    }
}

/// Unconstrained least squares on the selected columns.
fn solve_subset(a: &DMatrix<f64>, b: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
    sub.svd(true, true)
        .solve(b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(idx.len()))
}

//! Small least-squares fits used by audits and diagnostics.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_abs_residual: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y ≈ intercept + slope x`. Needs two distinct `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (ss_res, max_res) = x.iter().zip(y).fold((0.0, 0.0f64), |(ss, mr), (a, b)| {
        let r = b - (intercept + slope * a);
        (ss + r * r, mr.max(r.abs()))
    });
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        max_abs_residual: max_res,
    })
}

/// Least-squares polynomial coefficients `c[0] + c[1] x + ... + c[deg] x^deg`
/// via normal equations; fine for the low degrees used here.
pub fn poly_fit(x: &[f64], y: &[f64], degree: usize) -> Option<Vec<f64>> {
    assert_eq!(x.len(), y.len());
    let m = degree + 1;
    if x.len() < m {
        return None;
    }
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&xi, &yi) in x.iter().zip(y) {
        let mut pows = vec![1.0; 2 * m];
        for p in 1..2 * m {
            pows[p] = pows[p - 1] * xi;
        }
        for r in 0..m {
            for c in 0..m {
                a[r][c] += pows[r + c];
            }
            a[r][m] += pows[r] * yi;
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..m {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..=m {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..m).map(|r| a[r][m] / a[r][r]).collect())
}

pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

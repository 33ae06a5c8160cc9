//! Dense complex linear solves for the handful of tiny systems the curve
//! normalisation needs.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solve `m · x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve(mut m: Vec<Vec<Complex64>>, mut rhs: Vec<Complex64>, what: &'static str) -> Result<Vec<Complex64>> {
    let n = rhs.len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, z| acc.max(z.norm()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        if m[pivot][col].norm() <= 1e-14 * scale {
            return Err(Error::Singular(what));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= factor * v;
            }
            let r = rhs[col];
            rhs[row] -= factor * r;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

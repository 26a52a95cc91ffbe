//! Dense linear solves by Gaussian elimination with partial pivoting.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Solve A X = B for X, where A is n x n and B is n x d. Consumes copies of
/// both. Fails if a pivot column is numerically zero.
pub fn solve_dense(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::shape(format!("solve: A is {}x{}", a.rows(), a.cols())));
    }
    if b.rows() != n {
        return Err(Error::shape(format!(
            "solve: A is {n}x{n} but B has {} rows",
            b.rows()
        )));
    }
    let d = b.cols();
    let mut m = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        // Partial pivot: largest |entry| on or below the diagonal.
        let mut pivot_row = col;
        let mut pivot_val = m.get(col, col).abs();
        for r in col + 1..n {
            let v = m.get(r, col).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < 1e-300 {
            return Err(Error::numerical(format!(
                "singular matrix: no usable pivot in column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m.get(col, j);
                m.set(col, j, m.get(pivot_row, j));
                m.set(pivot_row, j, tmp);
            }
            for j in 0..d {
                let tmp = x.get(col, j);
                x.set(col, j, x.get(pivot_row, j));
                x.set(pivot_row, j, tmp);
            }
        }
        let inv = 1.0 / m.get(col, col);
        for r in col + 1..n {
            let factor = m.get(r, col) * inv;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.get(r, j) - factor * m.get(col, j);
                m.set(r, j, v);
            }
            for j in 0..d {
                let v = x.get(r, j) - factor * x.get(col, j);
                x.set(r, j, v);
            }
        }
    }
    // Back substitution.
    for col in (0..n).rev() {
        let inv = 1.0 / m.get(col, col);
        for j in 0..d {
            let mut acc = x.get(col, j);
            for k in col + 1..n {
                acc -= m.get(col, k) * x.get(k, j);
            }
            x.set(col, j, acc * inv);
        }
    }
    Ok(x)
}

//! Dense symmetric eigensolver (cyclic Jacobi rotations), Laplacian
//! eigenvector positional encodings, and graph Fourier coefficients.
//!
//! Desk-scale only: decompositions are guarded to n <= 5000.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::normalize::normalized_laplacian;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector of `eigenvalues[k]`; columns orthonormal.
    pub vectors: DenseMatrix,
    pub source: String,
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Sweeps run until the off-diagonal Frobenius norm falls below 1e-12
/// (relative to the matrix norm). Rejects asymmetric input (tolerance 1e-10).
pub fn dense_eigh(m: &DenseMatrix) -> Result<EigenDecomposition> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::shape(format!("eigh needs square input, got {}x{}", n, m.cols())));
    }
    if n > 5000 {
        return Err(Error::invalid(format!("eigh is guarded to n <= 5000, got {n}")));
    }
    let mut fro = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if (m.get(i, j) - m.get(j, i)).abs() > 1e-10 {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric at ({i},{j}): {} vs {}",
                    m.get(i, j),
                    m.get(j, i)
                )));
            }
            fro += m.get(i, j) * m.get(i, j);
        }
    }
    fro = fro.sqrt();
    let tol = 1e-12 * fro.max(1.0);

    let mut a = m.clone();
    let mut v = DenseMatrix::eye(n);
    let mut converged = false;
    let mut _sweeps = 0usize;
    for _ in 0..MAX_SWEEPS {
        _sweeps += 1;
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() < tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() < tol / (n as f64) {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                // Stable rotation: tan of the smaller angle zeroing a_pq.
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        // Final check after the last sweep.
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() >= tol {
            return Err(Error::numerical(format!(
                "jacobi sweeps did not converge: off-norm {:.3e} after {MAX_SWEEPS} sweeps",
                off.sqrt()
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_col, v.get(row, old_col));
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        vectors,
        source: "dense_eigh".into(),
    })
}

/// Flip each column so its largest-magnitude entry is positive (ties broken by
/// the lowest row index). Keeps golden files stable across runs.
fn fix_signs(vectors: &mut DenseMatrix) {
    let (n, k) = (vectors.rows(), vectors.cols());
    for col in 0..k {
        let mut best_row = 0usize;
        let mut best_mag = -1.0f64;
        for row in 0..n {
            let mag = vectors.get(row, col).abs();
            if mag > best_mag {
                best_mag = mag;
                best_row = row;
            }
        }
        if vectors.get(best_row, col) < 0.0 {
            for row in 0..n {
                vectors.set(row, col, -vectors.get(row, col));
            }
        }
    }
}

fn laplacian_eigh(g: &Graph) -> Result<EigenDecomposition> {
    let lap = normalized_laplacian(g, false)?;
    let mut dec = dense_eigh(&lap.to_dense())?;
    dec.source = "normalized_laplacian".into();
    Ok(dec)
}

/// The k eigenvectors of the normalized Laplacian with smallest eigenvalues,
/// sign-fixed, as an n x k matrix (positional-encodings baseline).
pub fn laplacian_eigenvectors(g: &Graph, k: usize) -> Result<DenseMatrix> {
    if k > g.n() {
        return Err(Error::invalid(format!(
            "asked for {k} eigenvectors of a {}-node graph",
            g.n()
        )));
    }
    let dec = laplacian_eigh(g)?;
    let n = g.n();
    let mut out = DenseMatrix::zeros(n, k);
    for col in 0..k {
        for row in 0..n {
            out.set(row, col, dec.vectors.get(row, col));
        }
    }
    fix_signs(&mut out);
    Ok(out)
}

/// Graph Fourier magnitudes per channel: |U^T x| with rows ordered by
/// ascending Laplacian eigenvalue. Returns the eigenvalues alongside.
pub fn graph_fourier_coefficients(g: &Graph, x: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if x.rows() != g.n() {
        return Err(Error::shape(format!(
            "features have {} rows, graph has {} nodes",
            x.rows(),
            g.n()
        )));
    }
    let dec = laplacian_eigh(g)?;
    let mut coeffs = dec.vectors.transpose().matmul(x)?;
    for v in coeffs.data_mut() {
        *v = v.abs();
    }
    Ok((dec.eigenvalues, coeffs))
}

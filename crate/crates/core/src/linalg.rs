//! Small dense linear-algebra helpers on row-major slices.

use nalgebra::DMatrix;

pub(crate) fn to_dmatrix(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn determinant(n: usize, m: &[f64]) -> f64 {
    to_dmatrix(n, n, m).determinant()
}

/// Inverse of an `n x n` matrix, or `None` when `|det|` is below
/// `1e-13 * max|m_ij|^n`.
pub(crate) fn inverse(n: usize, m: &[f64]) -> Result<Vec<f64>, f64> {
    let a = to_dmatrix(n, n, m);
    let det = a.determinant();
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if !det.is_finite() || det.abs() < 1e-13 * scale.powi(n as i32) || scale == 0.0 {
        return Err(det.abs());
    }
    let inv = a.try_inverse().ok_or(det.abs())?;
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = inv[(r, c)];
        }
    }
    Ok(out)
}

/// Eigenvalues of a symmetric matrix (symmetrized first), ascending.
pub(crate) fn symmetric_eigenvalues(n: usize, m: &[f64]) -> Vec<f64> {
    let a = to_dmatrix(n, n, m);
    let sym = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the matching
/// column eigenvectors, row-major.
pub(crate) fn symmetric_eigen(n: usize, m: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = to_dmatrix(n, n, m);
    let sym = (&a + a.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let mut vecs = vec![0.0; n * n];
    for r in 0..n {
        for (c, &k) in order.iter().enumerate() {
            vecs[r * n + c] = e.eigenvectors[(r, k)];
        }
    }
    (order.iter().map(|&k| e.eigenvalues[k]).collect(), vecs)
}

pub(crate) fn singular_values(rows: usize, cols: usize, m: &[f64]) -> Vec<f64> {
    if rows == 0 || cols == 0 {
        return vec![];
    }
    to_dmatrix(rows, cols, m)
        .singular_values()
        .iter()
        .copied()
        .collect()
}

/// Count of values above `rel * max` and above `abs_floor`.
pub(crate) fn count_above(values: &[f64], rel: f64, abs_floor: f64) -> usize {
    let top = values.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let cut = (rel * top).max(abs_floor);
    values.iter().filter(|x| x.abs() > cut).count()
}

/// Lower Cholesky factor `L` with `m = L L^T`, or `None` if not positive definite.
pub(crate) fn cholesky(n: usize, m: &[f64]) -> Option<Vec<f64>> {
    let c = to_dmatrix(n, n, m).cholesky()?;
    let l = c.l();
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for k in 0..n {
            out[r * n + k] = l[(r, k)];
        }
    }
    Some(out)
}

//! Small dense linear-algebra helpers shared by the set and geometry code.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which a column is treated as dependent.
pub const RANK_TOL: f64 = 1e-12;

/// Orthonormal basis for the column space of `m`.
///
/// Uses Householder QR with column pivoting; trailing pivots whose magnitude is at most
/// `RANK_TOL` times the largest pivot are dropped, so the result has exactly `rank(m)`
/// columns. A zero matrix yields an `n x 0` basis.
pub fn orthonormal_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let q = qr.q();
    let k = r.nrows().min(r.ncols());
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return DMatrix::zeros(n, 0);
    }
    let rank = (0..k)
        .take_while(|&i| r[(i, i)].abs() > RANK_TOL * scale)
        .count();
    q.columns(0, rank).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of the orthonormal
/// columns of `q`.
pub fn orthogonal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let residual = DMatrix::identity(n, n) - q * q.transpose();
    let mut basis = orthonormal_basis(&residual);
    let expected = n - q.ncols();
    if basis.ncols() > expected {
        basis = basis.columns(0, expected).into_owned();
    }
    basis
}

/// Largest entry of `|QᵀQ − I|`.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let d = q.ncols();
    let gram = q.transpose() * q - DMatrix::<f64>::identity(d, d);
    gram.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Applies the orthogonal projector `Q Qᵀ` to `x`.
pub fn project_onto_columns(q: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return DVector::zeros(x.len());
    }
    q * (q.transpose() * x)
}

/// Builds a matrix from row-major nested rows.
pub fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

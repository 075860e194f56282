//! Dense linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

/// Relative threshold on `|R_jj| / ||X_j||` below which a design column is
/// treated as linearly dependent on the columns before it.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("design column {column} is linearly dependent on the preceding columns")]
    RankDeficient { column: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Multi-response least-squares solution `Y ≈ X·B` computed from a
/// Householder QR factorisation of `X`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// `m × k` coefficients, one column per response.
    pub coef: DMatrix<f64>,
    /// `T × k` residuals.
    pub residuals: DMatrix<f64>,
    /// `(X'X)^{-1}` recovered as `R^{-1} R^{-T}`.
    pub xtx_inv: DMatrix<f64>,
}

pub fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<LeastSquares, LinalgError> {
    let (n, m) = x.shape();
    if y.nrows() != n {
        return Err(LinalgError::Dimension(format!("design has {n} rows but response has {}", y.nrows())));
    }
    if n < m {
        return Err(LinalgError::Dimension(format!("{n} observations cannot identify {m} coefficients")));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..m {
        let col_norm = x.column(j).norm();
        if col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norm {
            return Err(LinalgError::RankDeficient { column: j });
        }
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, m).into_owned();
    let coef = r.solve_upper_triangular(&rhs).ok_or(LinalgError::Singular)?;
    let residuals = y - x * &coef;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(m, m)).ok_or(LinalgError::Singular)?;
    let xtx_inv = &r_inv * r_inv.transpose();
    Ok(LeastSquares { coef, residuals, xtx_inv })
}

pub fn cholesky(a: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, LinalgError> {
    Cholesky::new(symmetrize(a)).ok_or(LinalgError::NotPositiveDefinite)
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    Ok(symmetrize(&cholesky(a)?.inverse()))
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// A matrix `L` with `L Lᵀ = A` for a symmetric positive semidefinite `A`.
///
/// Falls back to a clamped eigen-decomposition when Cholesky fails, so that
/// singular covariances (including the zero matrix) still yield a factor.
pub fn psd_factor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = symmetrize(a);
    if let Some(ch) = Cholesky::new(sym.clone()) {
        return ch.l();
    }
    let eig = sym.symmetric_eigen();
    let mut l = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        l.column_mut(j).scale_mut(s);
    }
    l
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetrize(a).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Companion matrix of a VAR with lag matrices `phi[0] … phi[p-1]`.
pub fn companion(phi: &[DMatrix<f64>]) -> DMatrix<f64> {
    assert!(!phi.is_empty(), "companion matrix needs at least one lag");
    let k = phi[0].nrows();
    let p = phi.len();
    let mut c = DMatrix::zeros(k * p, k * p);
    for (l, a) in phi.iter().enumerate() {
        c.view_mut((0, l * k), (k, k)).copy_from(a);
    }
    for i in k..k * p {
        c[(i, i - k)] = 1.0;
    }
    c
}

/// Moduli of the eigenvalues of a square matrix, sorted descending.
pub fn eigen_moduli(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut m: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    m.sort_by(|x, y| y.total_cmp(x));
    m
}

pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    eigen_moduli(a).first().copied().unwrap_or(0.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample correlation; zero when either series has no variance.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

pub fn dvec(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

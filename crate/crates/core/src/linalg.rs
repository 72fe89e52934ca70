//! Dense least-squares and factorization helpers over [`Scalar`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Least-squares solution for one design and one or more right-hand sides.
#[derive(Debug, Clone)]
pub struct LeastSquares<T: Scalar> {
    /// `ncols(x) × ncols(y)`.
    pub coef: DMatrix<T>,
    /// `nrows(x) × ncols(y)`.
    pub residuals: DMatrix<T>,
    /// Upper-triangular factor of the design, kept for the coefficient covariance.
    r: DMatrix<T>,
}

impl<T: Scalar> LeastSquares<T> {
    /// Residual sum of squares for each right-hand side.
    pub fn ssr(&self) -> Vec<T> {
        self.residuals
            .column_iter()
            .map(|c| c.iter().fold(T::zero(), |acc, &e| acc + e * e))
            .collect()
    }

    /// `(X'X)^{-1}` recovered from the triangular factor.
    pub fn xtx_inverse(&self) -> DMatrix<T> {
        let m = self.r.nrows();
        let rinv = self
            .r
            .solve_upper_triangular(&DMatrix::identity(m, m))
            .expect("triangular factor checked for rank");
        &rinv * rinv.transpose()
    }
}

/// Householder-QR least squares of `y` on `x`.
///
/// A column whose component orthogonal to the preceding columns is smaller
/// than [`Scalar::rank_tolerance`] times its norm is reported as collinear,
/// using `names` when supplied and `col<j>` otherwise.
pub fn least_squares<T: Scalar>(
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    names: Option<&[String]>,
) -> Result<LeastSquares<T>> {
    let (n, m) = x.shape();
    if y.nrows() != n {
        return Err(Error::InvalidParameter(format!(
            "design has {n} rows but response has {}",
            y.nrows()
        )));
    }
    if n <= m {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {m} regressors"
        )));
    }
    let norms: Vec<T> = x.column_iter().map(|c| c.norm()).collect();
    let qr = x.clone().qr();
    let r = qr.r();
    let tol = T::rank_tolerance();
    let collinear: Vec<String> = (0..m)
        .filter(|&j| norms[j] == T::zero() || r[(j, j)].abs() <= tol * norms[j])
        .map(|j| match names {
            Some(names) if j < names.len() => names[j].clone(),
            _ => format!("col{j}"),
        })
        .collect();
    if !collinear.is_empty() {
        return Err(Error::RankDeficient(collinear));
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let top = qty.rows(0, m).into_owned();
    let coef = r
        .solve_upper_triangular(&top)
        .ok_or_else(|| Error::RankDeficient(vec!["<singular triangular factor>".into()]))?;
    let residuals = y - x * &coef;
    Ok(LeastSquares { coef, residuals, r })
}

/// Lower Cholesky factor, or `None` when the matrix is not positive definite.
pub fn lower_cholesky<T: Scalar>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    let c = m.clone().cholesky()?;
    let l = c.l();
    if l.diagonal().iter().all(|d| *d > T::zero()) {
        Some(l)
    } else {
        None
    }
}

/// Largest eigenvalue modulus of a square (generally non-symmetric) matrix.
pub fn spectral_radius<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.complex_eigenvalues()
        .iter()
        .map(|c| (c.re * c.re + c.im * c.im).sqrt())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> T {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or_else(|| T::lit(f64::MAX)), |a, b| if b < a { b } else { a })
}

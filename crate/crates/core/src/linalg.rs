//! Complex dense linear algebra shared by the detectors and solvers.

use nalgebra::{Cholesky, DMatrix, DVector, QR};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{PsedError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Condition-number ceiling above which a factorization is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Draws one circularly-symmetric complex Gaussian sample with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(scale * re, scale * im)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    let mut v = CVector::zeros(len);
    for i in 0..len {
        v[i] = complex_gaussian(rng, variance);
    }
    v
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVector, b: &CVector) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Submatrix made of the listed columns, in the listed order.
pub fn select_columns(h: &CMatrix, cols: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(h.nrows(), cols.len());
    for (k, &j) in cols.iter().enumerate() {
        out.set_column(k, &h.column(j));
    }
    out
}

/// Inverts a square matrix by LU with partial pivoting.
///
/// Fails when a pivot vanishes or the 1-norm condition estimate
/// `‖G‖₁·‖G⁻¹‖₁` exceeds [`CONDITION_LIMIT`].
pub fn invert(g: &CMatrix, context: &str) -> Result<CMatrix> {
    if !g.is_square() {
        return Err(PsedError::Dimension(format!(
            "{context}: cannot invert a {}x{} matrix",
            g.nrows(),
            g.ncols()
        )));
    }
    let inv = g
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| PsedError::singular(context))?;
    let cond = norm1(g) * norm1(&inv);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(PsedError::singular(format!("{context} (condition estimate {cond:.3e})")));
    }
    Ok(inv)
}

/// Least-squares solution of `A x ≈ b` through a Householder QR of `A`.
///
/// `A` must be tall with full column rank; rank deficiency is detected from the
/// spread of `|R_ii|`.
pub fn qr_least_squares(a: &CMatrix, b: &CVector, context: &str) -> Result<CVector> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(PsedError::Dimension(format!(
            "{context}: matrix has {m} rows, right-hand side has {}",
            b.len()
        )));
    }
    if n == 0 {
        return Ok(CVector::zeros(0));
    }
    if n > m {
        return Err(PsedError::singular(format!(
            "{context} ({n} columns exceed {m} rows)"
        )));
    }
    let qr = QR::new(a.clone());
    let r = qr.r();
    let diag: Vec<f64> = (0..n).map(|i| r[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if dmin == 0.0 || !(dmax / dmin).is_finite() || dmax / dmin > CONDITION_LIMIT {
        return Err(PsedError::singular(context));
    }
    let mut z = b.clone();
    qr.q_tr_mul(&mut z);
    let z = z.rows(0, n).into_owned();
    r.solve_upper_triangular(&z)
        .ok_or_else(|| PsedError::singular(context))
}

/// Solves a Hermitian positive-definite system `G x = c` by Cholesky.
pub fn hpd_solve(g: &CMatrix, c: &CVector, context: &str) -> Result<CVector> {
    let chol = Cholesky::new(g.clone()).ok_or_else(|| PsedError::singular(context))?;
    let l = chol.l_dirty();
    let n = g.nrows();
    let mut dmax = 0.0f64;
    let mut dmin = f64::INFINITY;
    for i in 0..n {
        let d = l[(i, i)].re;
        dmax = dmax.max(d);
        dmin = dmin.min(d);
    }
    // The squared ratio of Cholesky diagonals is a lower bound on cond(G).
    if n > 0 && (dmin <= 0.0 || (dmax / dmin).powi(2) > CONDITION_LIMIT) {
        return Err(PsedError::singular(context));
    }
    Ok(chol.solve(c))
}

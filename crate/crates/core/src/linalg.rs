//! Dense linear algebra helpers: a jittered Cholesky solver for the
//! symmetric positive-definite systems every estimator reduces to, and a
//! numerical rank.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-10;
const JITTER_LIMIT: f64 = 1e-4;

/// Cholesky factor of a symmetric positive-definite matrix, possibly after
/// adding a small ridge `δ I`.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

impl SpdFactor {
    /// Factorizes `a`. When the plain factorization fails, retries with
    /// `a + δI` for `δ = 1e-10·tr(a)/p`, growing ×10 while `δ ≤ 1e-4·tr(a)/p`.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let p = a.nrows();
        if p == 0 || a.ncols() != p {
            return Err(Error::SingularMatrix);
        }
        if let Some(chol) = checked_cholesky(a.clone()) {
            return Ok(Self { chol, jitter: 0.0 });
        }
        let scale = a.trace() / p as f64;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        let mut level = JITTER_START;
        while level <= JITTER_LIMIT * (1.0 + 1e-9) {
            let delta = level * scale;
            let mut shifted = a.clone();
            for i in 0..p {
                shifted[(i, i)] += delta;
            }
            if let Some(chol) = checked_cholesky(shifted) {
                return Ok(Self {
                    chol,
                    jitter: delta,
                });
            }
            level *= 10.0;
        }
        Err(Error::SingularMatrix)
    }

    /// Ridge added to the diagonal before the factorization succeeded.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

/// Rejects factorizations whose pivots have collapsed to rounding level.
fn checked_cholesky(a: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let p = a.nrows();
    let max_diag = a.diagonal().iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()));
    if !max_diag.is_finite() || max_diag == 0.0 {
        return None;
    }
    let floor = p as f64 * f64::EPSILON * max_diag;
    let chol = a.cholesky()?;
    let l = chol.l_dirty();
    if (0..p).all(|i| l[(i, i)] * l[(i, i)] > floor) {
        Some(chol)
    } else {
        None
    }
}

/// Solves `a z = b` for symmetric positive-definite `a`.
pub fn solve_spd(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch {
            what: "right-hand side rows",
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(SpdFactor::new(a)?.solve(b))
}

pub fn solve_spd_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            what: "right-hand side rows",
            expected: a.nrows(),
            found: b.len(),
        });
    }
    Ok(SpdFactor::new(a)?.solve_vec(b))
}

/// Number of singular values above `max(rows, cols)·σ_max·1e-12`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = m.nrows().max(m.ncols()) as f64 * smax * 1e-12;
    sv.iter().filter(|&&s| s > tol).count()
}

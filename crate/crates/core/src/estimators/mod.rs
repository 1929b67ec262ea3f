//! The four estimators: OLS, restricted OLS, LASSO and restricted LASSO.
//!
//! The penalized estimators minimize
//!
//! ```text
//! ‖y − Xβ‖² + λ Σ_j |β_j|            (optionally subject to Rβ = r)
//! ```
//!
//! by iterated local quadratic approximation (see [`lqa`]). Restricted
//! solutions are obtained from the corresponding unrestricted solve `β_u`
//! with system matrix `A` through the Lagrange correction
//!
//! ```text
//! μ = (R A⁻¹ Rᵀ)⁻¹ (r − R β_u),     β = β_u + A⁻¹ Rᵀ μ
//! ```
//!
//! so `μ` is the multiplier of the normal equations `A β = Xᵀy + Rᵀμ`.

pub mod lqa;

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, SpdFactor};
use crate::model::{Coefficients, Dataset, FitResult, RestrictionSet};

pub use lqa::{
    fit_lasso_lqa, fit_restricted_lasso, lqa_penalty_matrix, LqaState, PenaltyMatrix,
};

/// Cross products `XᵀX` and `Xᵀy`.
#[derive(Debug, Clone)]
pub(crate) struct Gram {
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
}

impl Gram {
    pub fn new(dataset: &Dataset) -> Self {
        let x = dataset.x();
        Self {
            xtx: x.tr_mul(x),
            xty: x.tr_mul(dataset.y()),
        }
    }
}

/// `‖y − Xβ‖² + λ Σ|β_j|`, summing the penalty over coefficients whose
/// `penalize_mask` entry is true (all of them when the mask is `None`).
pub fn objective_value(
    dataset: &Dataset,
    beta: &DVector<f64>,
    lambda: f64,
    penalize_mask: Option<&[bool]>,
) -> f64 {
    let resid = dataset.y() - dataset.x() * beta;
    let l1: f64 = beta
        .iter()
        .enumerate()
        .filter(|(j, _)| penalize_mask.is_none_or(|m| m[*j]))
        .map(|(_, b)| b.abs())
        .sum();
    resid.norm_squared() + lambda * l1
}

pub(crate) fn check_full_rank(dataset: &Dataset) -> Result<()> {
    if linalg::numerical_rank(dataset.x()) < dataset.p() {
        Err(Error::SingularMatrix)
    } else {
        Ok(())
    }
}

pub(crate) fn check_restriction_shape(dataset: &Dataset, restrictions: &RestrictionSet) -> Result<()> {
    if restrictions.p() != dataset.p() {
        return Err(Error::ShapeMismatch {
            expected: dataset.p(),
            found: restrictions.p(),
        });
    }
    Ok(())
}

/// Projects the unrestricted solution `beta_u` of `A β = b` onto `Rβ = r`,
/// where `factor` holds the Cholesky factor of `A`. Returns `(β, μ)`.
pub(crate) fn lagrange_correction(
    factor: &SpdFactor,
    beta_u: DVector<f64>,
    rmat: &DMatrix<f64>,
    rvec: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let a_inv_rt = factor.solve(&rmat.transpose());
    let mut schur = rmat * &a_inv_rt;
    schur = (&schur + schur.transpose()) * 0.5;
    let schur = SpdFactor::new(&schur)?;

    let mut mu = schur.solve_vec(&(rvec - rmat * &beta_u));
    let mut beta = beta_u + &a_inv_rt * &mu;

    // A couple of refinement sweeps keep ‖Rβ − r‖ at rounding level even when
    // A carries very large penalty weights.
    let target = 1e-13 * (1.0 + rvec.amax());
    for _ in 0..3 {
        let gap = rvec - rmat * &beta;
        if gap.amax() <= target {
            break;
        }
        let dmu = schur.solve_vec(&gap);
        beta += &a_inv_rt * &dmu;
        mu += dmu;
    }
    Ok((beta, mu))
}

fn nonzero_set(beta: &DVector<f64>) -> BTreeSet<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// Ordinary least squares `(XᵀX)⁻¹Xᵀy`. Requires `X` of full column rank.
pub fn fit_ols(dataset: &Dataset) -> Result<FitResult> {
    check_full_rank(dataset)?;
    let gram = Gram::new(dataset);
    let beta = SpdFactor::new(&gram.xtx)?.solve_vec(&gram.xty);
    Ok(FitResult {
        selected: nonzero_set(&beta),
        objective: objective_value(dataset, &beta, 0.0, None),
        coefficients: Coefficients::new(beta),
        multipliers: None,
        lambda: 0.0,
        iterations: 1,
        converged: true,
        infeasible_drops: Vec::new(),
    })
}

/// Least squares subject to `Rβ = r`:
/// `β̂_r = β̂ − (XᵀX)⁻¹Rᵀ[R(XᵀX)⁻¹Rᵀ]⁻¹(Rβ̂ − r)`.
pub fn fit_restricted_ols(dataset: &Dataset, restrictions: &RestrictionSet) -> Result<FitResult> {
    check_restriction_shape(dataset, restrictions)?;
    check_full_rank(dataset)?;
    let gram = Gram::new(dataset);
    let factor = SpdFactor::new(&gram.xtx)?;
    let beta_ols = factor.solve_vec(&gram.xty);
    let (beta, mu) =
        lagrange_correction(&factor, beta_ols, restrictions.rmat(), restrictions.rvec())?;
    Ok(FitResult {
        selected: nonzero_set(&beta),
        objective: objective_value(dataset, &beta, 0.0, None),
        coefficients: Coefficients::new(beta),
        multipliers: Some(mu),
        lambda: 0.0,
        iterations: 1,
        converged: true,
        infeasible_drops: Vec::new(),
    })
}

//! LASSO and restricted LASSO by iterated local quadratic approximation.
//!
//! Around an expansion point β⁽⁰⁾ with nonzero entries, `|β_j|` is majorized
//! by `β_j² / (2|β_j⁽⁰⁾|) + |β_j⁽⁰⁾| / 2`. Minimizing the resulting surrogate
//! of `‖y − Xβ‖² + λ Σ|β_j|` is a ridge-type solve
//!
//! ```text
//! (XᵀX + D) β = Xᵀy,     D = diag(λ / (2 |β_j⁽⁰⁾|))
//! ```
//!
//! which is repeated with the new β as expansion point until the iterates
//! stop moving. Coefficients that shrink below `zero_eps` are pinned to zero
//! and leave the system for good. Under restrictions each solve is followed
//! by the Lagrange correction onto `Rβ = r`; coefficients that appear in a
//! restriction are never removed from the system.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::{check_restriction_shape, lagrange_correction, objective_value, Gram};
use crate::error::Result;
use crate::linalg::{self, SpdFactor};
use crate::model::{Coefficients, Dataset, FitConfig, FitResult, RestrictionSet};

/// Ridge used for the initializer when `XᵀX` is singular, relative to
/// `tr(XᵀX)/p`.
const INIT_RIDGE: f64 = 1e-6;

/// Iteration state: the expansion point and the coefficients still in the system.
#[derive(Debug, Clone, PartialEq)]
pub struct LqaState {
    pub beta_current: DVector<f64>,
    pub active: Vec<bool>,
    pub iteration: usize,
}

impl LqaState {
    pub fn new(beta_current: DVector<f64>) -> Self {
        let p = beta_current.len();
        Self {
            beta_current,
            active: vec![true; p],
            iteration: 0,
        }
    }

    fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&j| self.active[j]).collect()
    }
}

/// Diagonal penalty Hessian of the quadratic surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyMatrix {
    pub diag: DVector<f64>,
}

/// `(λ/2) / |β_j|` for active penalized coefficients, zero elsewhere.
///
/// Active coefficients that a restriction keeps in the system may sit below
/// `zero_eps`; their magnitude is floored at `zero_eps`.
pub fn lqa_penalty_matrix(state: &LqaState, config: &FitConfig) -> PenaltyMatrix {
    let half = 0.5 * config.lambda;
    let diag = DVector::from_fn(state.beta_current.len(), |j, _| {
        if half > 0.0 && state.active[j] && config.is_penalized(j) {
            half / state.beta_current[j].abs().max(config.zero_eps)
        } else {
            0.0
        }
    });
    PenaltyMatrix { diag }
}

/// A dataset prepared for repeated penalized fits: cross products and the
/// λ-independent starting point are computed once.
#[derive(Debug, Clone)]
pub(crate) struct LqaProblem<'a> {
    dataset: &'a Dataset,
    restrictions: Option<&'a RestrictionSet>,
    gram: Gram,
    init: DVector<f64>,
}

impl<'a> LqaProblem<'a> {
    pub fn new(dataset: &'a Dataset, restrictions: Option<&'a RestrictionSet>) -> Result<Self> {
        if let Some(r) = restrictions {
            check_restriction_shape(dataset, r)?;
        }
        let gram = Gram::new(dataset);
        let p = dataset.p();
        let factor = if linalg::numerical_rank(dataset.x()) == p {
            SpdFactor::new(&gram.xtx)?
        } else {
            let delta = INIT_RIDGE * gram.xtx.trace() / p as f64;
            SpdFactor::new(&(&gram.xtx + DMatrix::<f64>::identity(p, p) * delta))?
        };
        let mut init = factor.solve_vec(&gram.xty);
        if let Some(r) = restrictions {
            init = lagrange_correction(&factor, init, r.rmat(), r.rvec())?.0;
        }
        Ok(Self {
            dataset,
            restrictions,
            gram,
            init,
        })
    }

    pub fn fit(&self, config: &FitConfig) -> Result<FitResult> {
        let p = self.dataset.p();
        config.validate(p)?;

        if self.restrictions.is_none() {
            if let Some(fit) = self.zero_penalized_solution(config) {
                return Ok(fit);
            }
        }

        let penalizing = config.lambda > 0.0;
        let droppable: Vec<bool> = (0..p)
            .map(|j| {
                penalizing
                    && config.is_penalized(j)
                    && self.restrictions.is_none_or(|r| !r.involves(j))
            })
            .collect();

        let mut state = LqaState::new(self.init.clone());
        let mut multipliers = None;
        let mut converged = false;

        while state.iteration < config.max_iter {
            state.iteration += 1;
            drop_small(&mut state, &droppable, config.zero_eps);
            let idx = state.active_indices();
            if idx.is_empty() {
                converged = true;
                break;
            }

            let penalty = lqa_penalty_matrix(&state, config);
            let mut a = self.gram.xtx.select_rows(&idx).select_columns(&idx);
            for (k, &j) in idx.iter().enumerate() {
                a[(k, k)] += penalty.diag[j];
            }
            let factor = SpdFactor::new(&a)?;
            let mut beta_a = factor.solve_vec(&self.gram.xty.select_rows(&idx));
            if let Some(r) = self.restrictions {
                let rmat = r.rmat().select_columns(&idx);
                let (b, mu) = lagrange_correction(&factor, beta_a, &rmat, r.rvec())?;
                beta_a = b;
                multipliers = Some(mu);
            }

            let mut next = DVector::zeros(p);
            for (k, &j) in idx.iter().enumerate() {
                next[j] = beta_a[k];
            }
            let delta = (&next - &state.beta_current).amax();
            state.beta_current = next;
            if delta < config.tol {
                converged = true;
                break;
            }
        }

        // Apply the drop rule once more so no droppable coefficient is left
        // dangling just above zero.
        drop_small(&mut state, &droppable, config.zero_eps);

        let mut selected = BTreeSet::new();
        let mut infeasible_drops = Vec::new();
        for j in 0..p {
            if !state.active[j] {
                continue;
            }
            let b = state.beta_current[j];
            if penalizing && config.is_penalized(j) && b.abs() < config.zero_eps {
                infeasible_drops.push(j);
            } else if b != 0.0 {
                selected.insert(j);
            }
        }

        let objective = objective_value(
            self.dataset,
            &state.beta_current,
            config.lambda,
            config.penalize_mask.as_deref(),
        );
        Ok(FitResult {
            coefficients: Coefficients::new(state.beta_current),
            selected,
            multipliers,
            lambda: config.lambda,
            iterations: state.iteration,
            converged,
            objective,
            infeasible_drops,
        })
    }

    /// Returns the fit with every penalized coefficient at zero when that
    /// point already satisfies the optimality conditions
    /// `2 |x_jᵀ (y − X_U β_U)| ≤ λ` for all penalized `j`, where `β_U` is the
    /// least-squares fit on the unpenalized columns.
    fn zero_penalized_solution(&self, config: &FitConfig) -> Option<FitResult> {
        if config.lambda <= 0.0 {
            return None;
        }
        let p = self.dataset.p();
        let free: Vec<usize> = (0..p).filter(|&j| !config.is_penalized(j)).collect();
        let mut beta = DVector::zeros(p);
        if !free.is_empty() {
            let a = self.gram.xtx.select_rows(&free).select_columns(&free);
            let b_free = SpdFactor::new(&a)
                .ok()?
                .solve_vec(&self.gram.xty.select_rows(&free));
            for (k, &j) in free.iter().enumerate() {
                beta[j] = b_free[k];
            }
        }
        let grad = &self.gram.xty - &self.gram.xtx * &beta;
        let worst = (0..p)
            .filter(|&j| config.is_penalized(j))
            .map(|j| grad[j].abs())
            .fold(0.0_f64, f64::max);
        if 2.0 * worst > config.lambda {
            return None;
        }
        let selected = free.iter().copied().filter(|&j| beta[j] != 0.0).collect();
        let objective =
            objective_value(self.dataset, &beta, config.lambda, config.penalize_mask.as_deref());
        Some(FitResult {
            coefficients: Coefficients::new(beta),
            selected,
            multipliers: None,
            lambda: config.lambda,
            iterations: 0,
            converged: true,
            objective,
            infeasible_drops: Vec::new(),
        })
    }
}

fn drop_small(state: &mut LqaState, droppable: &[bool], zero_eps: f64) {
    for (j, &ok) in droppable.iter().enumerate() {
        if ok && state.active[j] && state.beta_current[j].abs() < zero_eps {
            state.active[j] = false;
            state.beta_current[j] = 0.0;
        }
    }
}

/// LASSO by iterated LQA, started from the OLS fit.
pub fn fit_lasso_lqa(dataset: &Dataset, config: &FitConfig) -> Result<FitResult> {
    LqaProblem::new(dataset, None)?.fit(config)
}

/// Restricted LASSO by iterated LQA with a Lagrange correction after every
/// solve, started from the restricted OLS fit.
pub fn fit_restricted_lasso(
    dataset: &Dataset,
    restrictions: &RestrictionSet,
    config: &FitConfig,
) -> Result<FitResult> {
    LqaProblem::new(dataset, Some(restrictions))?.fit(config)
}

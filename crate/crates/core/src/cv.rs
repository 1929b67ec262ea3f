//! Regularization grids and k-fold cross-validation for choosing λ.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::lqa::LqaProblem;
use crate::model::{Dataset, FitConfig, RestrictionSet};

/// Ratio `λ_min / λ_max` of a generated grid.
pub const GRID_RATIO: f64 = 1e-4;
pub const DEFAULT_GRID_POINTS: usize = 50;
pub const DEFAULT_FOLDS: usize = 5;

/// Strictly decreasing, positive regularization values.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidConfig("lambda grid needs at least 2 values".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidConfig("lambda grid values must be finite and positive".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("lambda grid must be strictly decreasing".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for LambdaGrid {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Log-spaced grid from `λ_max = 2‖Xᵀy‖_∞`, the smallest λ whose LASSO
/// solution is all zeros, down to `1e-4·λ_max`.
pub fn lambda_grid(dataset: &Dataset, n_points: usize) -> Result<LambdaGrid> {
    if n_points < 2 {
        return Err(Error::InvalidConfig("lambda grid needs at least 2 points".into()));
    }
    let lambda_max = 2.0 * dataset.x().tr_mul(dataset.y()).amax();
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::DegenerateResponse);
    }
    let last = n_points - 1;
    let values = (0..n_points)
        .map(|i| match i {
            0 => lambda_max,
            i if i == last => lambda_max * GRID_RATIO,
            i => lambda_max * GRID_RATIO.powf(i as f64 / last as f64),
        })
        .collect();
    LambdaGrid::new(values)
}

/// Splits `0..n` into `k` disjoint folds after a seeded shuffle. Fold sizes
/// differ by at most one; the first `n % k` folds carry the extra row.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMethod {
    Lasso,
    #[serde(rename = "rlasso")]
    RestrictedLasso,
}

/// How the winning λ is read off the CV curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// λ with the smallest mean error.
    MinError,
    /// Largest λ whose mean error is within one standard error of the minimum.
    #[default]
    OneStandardError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub rule: SelectionRule,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            seed: 0,
            rule: SelectionRule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvPoint {
    pub lambda: f64,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    /// λ picked under `rule`.
    pub best_lambda: f64,
    /// λ with the minimum mean error (largest λ on ties).
    pub lambda_min: f64,
    pub rule: SelectionRule,
    pub curve: Vec<CvPoint>,
    pub folds: usize,
    pub seed: u64,
}

/// k-fold cross-validation of the LASSO or restricted LASSO over `lambdas`.
///
/// Each fold's training fit uses `config` with λ replaced by the candidate;
/// the loss is the mean squared prediction error on the held-out rows.
pub fn cross_validate(
    dataset: &Dataset,
    method: CvMethod,
    restrictions: Option<&RestrictionSet>,
    lambdas: &[f64],
    options: &CvOptions,
    config: &FitConfig,
) -> Result<CvReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidConfig("no lambda candidates".into()));
    }
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidConfig("lambda candidates must be finite and non-negative".into()));
    }
    let restrictions = match method {
        CvMethod::Lasso => None,
        CvMethod::RestrictedLasso => Some(restrictions.ok_or_else(|| {
            Error::InvalidConfig("restricted cross-validation requires restrictions".into())
        })?),
    };
    config.validate(dataset.p())?;

    let n = dataset.n();
    let folds = kfold_split(n, options.folds, options.seed)?;
    for (f, held_out) in folds.iter().enumerate() {
        let rows = n - held_out.len();
        if rows < 2 {
            return Err(Error::FoldTooSmall { fold: f + 1, rows });
        }
    }

    // errors[fold][lambda]
    let errors: Vec<Vec<f64>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, held_out)| fold_errors(dataset, restrictions, held_out, f, lambdas, config))
        .collect::<Result<_>>()?;

    let k = folds.len() as f64;
    let curve: Vec<CvPoint> = lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let mean = errors.iter().map(|e| e[i]).sum::<f64>() / k;
            let var = errors.iter().map(|e| (e[i] - mean).powi(2)).sum::<f64>() / (k - 1.0);
            CvPoint {
                lambda,
                mean_error: mean,
                std_error: (var / k).sqrt(),
            }
        })
        .collect();

    let min_point = curve
        .iter()
        .copied()
        .reduce(|best, c| {
            if c.mean_error < best.mean_error
                || (c.mean_error == best.mean_error && c.lambda > best.lambda)
            {
                c
            } else {
                best
            }
        })
        .expect("non-empty curve");

    let best_lambda = match options.rule {
        SelectionRule::MinError => min_point.lambda,
        SelectionRule::OneStandardError => {
            let bound = min_point.mean_error + min_point.std_error;
            curve
                .iter()
                .filter(|c| c.mean_error <= bound)
                .map(|c| c.lambda)
                .fold(min_point.lambda, f64::max)
        }
    };

    Ok(CvReport {
        best_lambda,
        lambda_min: min_point.lambda,
        rule: options.rule,
        curve,
        folds: folds.len(),
        seed: options.seed,
    })
}

fn fold_errors(
    dataset: &Dataset,
    restrictions: Option<&RestrictionSet>,
    held_out: &[usize],
    fold: usize,
    lambdas: &[f64],
    config: &FitConfig,
) -> Result<Vec<f64>> {
    let mut is_test = vec![false; dataset.n()];
    for &i in held_out {
        is_test[i] = true;
    }
    let train_rows: Vec<usize> = (0..dataset.n()).filter(|&i| !is_test[i]).collect();
    let wrap = |lambda: f64, e: Error| Error::CvFit {
        lambda,
        fold: fold + 1,
        source: Box::new(e),
    };

    let train = dataset.select_rows(&train_rows)?;
    let test = dataset.select_rows(held_out)?;
    let problem =
        LqaProblem::new(&train, restrictions).map_err(|e| wrap(lambdas[0], e))?;

    lambdas
        .iter()
        .map(|&lambda| {
            let cfg = FitConfig {
                lambda,
                ..config.clone()
            };
            let fit = problem.fit(&cfg).map_err(|e| wrap(lambda, e))?;
            let resid = test.y() - test.x() * fit.beta();
            Ok(resid.norm_squared() / test.n() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn grid_lambda_max_identity_design() {
        let d = Dataset::unnamed(DMatrix::identity(2, 2), DVector::from_vec(vec![3.0, -1.0]))
            .unwrap();
        let g = lambda_grid(&d, 2).unwrap();
        assert_eq!(g.values(), &[6.0, 6.0 * 1e-4]);
        let g = lambda_grid(&d, 50).unwrap();
        assert_eq!(g.values().len(), 50);
        assert_eq!(g.values()[0], 6.0);
    }

    #[test]
    fn grid_degenerate_response() {
        let d = Dataset::unnamed(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert_eq!(lambda_grid(&d, 10).unwrap_err(), Error::DegenerateResponse);
    }

    #[test]
    fn grid_rejects_non_decreasing() {
        assert!(LambdaGrid::new(vec![1.0, 1.0]).is_err());
        assert!(LambdaGrid::new(vec![1.0]).is_err());
        assert!(LambdaGrid::new(vec![2.0, 1.0]).is_ok());
    }

    #[test]
    fn kfold_exact_division() {
        let folds = kfold_split(10, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_remainder() {
        let folds = kfold_split(7, 3, 1).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
    }

    #[test]
    fn kfold_deterministic_and_range_checked() {
        assert_eq!(kfold_split(20, 4, 9).unwrap(), kfold_split(20, 4, 9).unwrap());
        assert_eq!(kfold_split(3, 4, 0).unwrap_err(), Error::KOutOfRange { k: 4, n: 3 });
        assert_eq!(kfold_split(3, 1, 0).unwrap_err(), Error::KOutOfRange { k: 1, n: 3 });
    }

    #[test]
    fn rlasso_without_restrictions_is_rejected() {
        let d = Dataset::unnamed(DMatrix::<f64>::identity(4, 2).map(|v| v + 0.1), DVector::from_element(4, 1.0))
            .unwrap();
        let err = cross_validate(
            &d,
            CvMethod::RestrictedLasso,
            None,
            &[1.0],
            &CvOptions::default(),
            &FitConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}

//! The research-and-development expenditure data set and the four-method
//! comparison run on it.

use nalgebra::DVector;
use rlasso_core::{
    cross_validate, fit_lasso_lqa, fit_ols, fit_restricted_lasso, fit_restricted_ols,
    lambda_grid, parse_restriction_file, CvMethod, CvOptions, Dataset, FitConfig, FitResult,
    Method, RestrictionSet, Result, SelectionRule,
};

use crate::data::parse_csv;

/// Total national R&D expenditure as a percent of GNP. `Y` is the United
/// States; `X1..X4` are France, West Germany, Japan and the Soviet Union.
pub const RND_CSV: &str = "\
Y,X1,X2,X3,X4
2.3,1.9,2.2,1.9,3.7
2.2,1.8,2.2,2.0,3.8
2.2,1.8,2.4,2.1,3.6
2.3,1.8,2.4,2.2,3.8
2.4,2.0,2.5,2.3,3.8
2.5,2.1,2.6,2.4,3.7
2.6,2.1,2.6,2.6,3.8
2.6,2.2,2.6,2.6,4.0
2.7,2.3,2.8,2.8,3.7
2.7,2.3,2.7,2.8,3.8
";

/// Observation years of [`RND_CSV`], row by row.
pub const RND_YEARS: [u16; 10] = [1972, 1975, 1979, 1980, 1981, 1982, 1983, 1984, 1985, 1986];

/// Restrictions over (intercept, X1, X2, X3, X4).
pub const RND_RESTRICTIONS: &str = "\
b1 + b2 + b3 + b4 + b5 = 1.2170
b2 + 3 b3 + b4 + 2 b5 = 1.0904
";

/// Prior guess from which the restriction right-hand sides were derived.
/// Reported for reference; the estimators only use the restrictions.
pub const RND_PRIOR: [f64; 5] = [0.6, 0.7, 0.0, 0.6, -0.5];

/// Predictor set the LASSO path is searched for.
pub const PATH_TARGET: [usize; 2] = [1, 3];

pub const DEFAULT_SEED: u64 = 1986;

pub fn rnd_dataset() -> Dataset {
    parse_csv(RND_CSV, "Y", true).expect("embedded data is valid")
}

pub fn rnd_restrictions() -> RestrictionSet {
    parse_restriction_file(RND_RESTRICTIONS, 5).expect("embedded restrictions are valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleOptions {
    pub seed: u64,
    pub folds: usize,
    pub grid_points: usize,
    pub rule: SelectionRule,
    pub penalize_intercept: bool,
}

impl Default for ExampleOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            folds: rlasso_core::cv::DEFAULT_FOLDS,
            grid_points: rlasso_core::cv::DEFAULT_GRID_POINTS,
            rule: SelectionRule::default(),
            penalize_intercept: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub method: Method,
    /// CV-chosen λ for the penalized methods.
    pub lambda: Option<f64>,
    pub coefficients: DVector<f64>,
    /// Selected predictors, numbered 1..4 (the intercept is not a predictor).
    pub selected: Vec<usize>,
    /// Mean squared leave-one-out prediction error at the same λ.
    pub loo_mse: f64,
    pub restriction_residual: Option<f64>,
}

impl MethodReport {
    /// `(i,j,...)` rendering of the selected predictors.
    pub fn selected_label(&self) -> String {
        predictor_label(&self.selected)
    }
}

pub fn predictor_label(set: &[usize]) -> String {
    let parts: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

/// Selected predictors at each λ of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathReport {
    pub lambdas: Vec<f64>,
    pub selections: Vec<Vec<usize>>,
}

impl PathReport {
    /// λ values whose selected predictor set equals `target` exactly.
    pub fn matching(&self, target: &[usize]) -> Vec<f64> {
        self.lambdas
            .iter()
            .zip(&self.selections)
            .filter(|(_, s)| s.as_slice() == target)
            .map(|(&l, _)| l)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleReport {
    pub options: ExampleOptions,
    pub data: Dataset,
    pub restrictions: RestrictionSet,
    pub methods: Vec<MethodReport>,
    pub lasso_path: PathReport,
    pub restricted_lasso_path: PathReport,
}

/// Selected columns other than the intercept, which are the predictor numbers.
fn predictors(fit: &FitResult) -> Vec<usize> {
    fit.selected.iter().copied().filter(|&j| j > 0).collect()
}

fn fit_method(
    method: Method,
    data: &Dataset,
    restrictions: &RestrictionSet,
    config: &FitConfig,
) -> Result<FitResult> {
    match method {
        Method::Ols => fit_ols(data),
        Method::RestrictedOls => fit_restricted_ols(data, restrictions),
        Method::Lasso => fit_lasso_lqa(data, config),
        Method::RestrictedLasso => fit_restricted_lasso(data, restrictions, config),
    }
}

fn leave_one_out_mse(
    method: Method,
    data: &Dataset,
    restrictions: &RestrictionSet,
    config: &FitConfig,
) -> Result<f64> {
    let n = data.n();
    let mut total = 0.0;
    for i in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let train = data.select_rows(&rows)?;
        let fit = fit_method(method, &train, restrictions, config)?;
        let pred = data.x().row(i).dot(&fit.beta().transpose());
        total += (data.y()[i] - pred).powi(2);
    }
    Ok(total / n as f64)
}

fn path(
    data: &Dataset,
    restrictions: Option<&RestrictionSet>,
    lambdas: &[f64],
    base: &FitConfig,
) -> Result<PathReport> {
    let selections = lambdas
        .iter()
        .map(|&lambda| {
            let cfg = FitConfig { lambda, ..base.clone() };
            let fit = match restrictions {
                Some(r) => fit_restricted_lasso(data, r, &cfg)?,
                None => fit_lasso_lqa(data, &cfg)?,
            };
            Ok(predictors(&fit))
        })
        .collect::<Result<_>>()?;
    Ok(PathReport {
        lambdas: lambdas.to_vec(),
        selections,
    })
}

/// Fits OLS, restricted OLS, LASSO and restricted LASSO to the embedded data,
/// choosing λ by k-fold CV, and traces both penalized paths over the grid.
pub fn run_example(options: &ExampleOptions) -> Result<ExampleReport> {
    let data = rnd_dataset();
    let restrictions = rnd_restrictions();
    let mut base = FitConfig::default();
    if !options.penalize_intercept {
        let mut mask = vec![true; data.p()];
        mask[0] = false;
        base.penalize_mask = Some(mask);
    }
    let grid = lambda_grid(&data, options.grid_points)?;
    let cv_options = CvOptions {
        folds: options.folds,
        seed: options.seed,
        rule: options.rule,
    };

    let methods = Method::ALL
        .iter()
        .map(|&method| {
            let lambda = match method {
                Method::Ols | Method::RestrictedOls => None,
                Method::Lasso | Method::RestrictedLasso => {
                    let (cv_method, r) = if method == Method::Lasso {
                        (CvMethod::Lasso, None)
                    } else {
                        (CvMethod::RestrictedLasso, Some(&restrictions))
                    };
                    let report =
                        cross_validate(&data, cv_method, r, grid.values(), &cv_options, &base)?;
                    Some(report.best_lambda)
                }
            };
            let config = FitConfig {
                lambda: lambda.unwrap_or(0.0),
                ..base.clone()
            };
            let fit = fit_method(method, &data, &restrictions, &config)?;
            let restricted = matches!(method, Method::RestrictedOls | Method::RestrictedLasso);
            Ok(MethodReport {
                method,
                lambda,
                selected: predictors(&fit),
                loo_mse: leave_one_out_mse(method, &data, &restrictions, &config)?,
                restriction_residual: restricted.then(|| restrictions.residual(fit.beta())),
                coefficients: fit.coefficients.into_inner(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExampleReport {
        lasso_path: path(&data, None, grid.values(), &base)?,
        restricted_lasso_path: path(&data, Some(&restrictions), grid.values(), &base)?,
        options: options.clone(),
        data,
        restrictions,
        methods,
    })
}

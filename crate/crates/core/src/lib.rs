//! Parameter estimation and variable selection for linear models under exact
//! linear equality restrictions `Rβ = r`.
//!
//! Four estimators are provided: OLS, restricted OLS, the LASSO and the
//! restricted LASSO, the latter two solved by iterated local quadratic
//! approximation. Around them sit k-fold cross-validation for λ, a small
//! parser for restrictions written as equations, and a reproducible
//! Monte-Carlo harness comparing the four methods.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use rlasso_core::{fit_restricted_lasso, parse_restriction_file, Dataset, FitConfig};
//!
//! let x = DMatrix::from_row_slice(4, 3, &[
//!     1.0, 0.2, 0.1,
//!     0.3, 1.0, 0.4,
//!     0.0, 0.5, 1.0,
//!     1.0, 1.0, 0.0,
//! ]);
//! let y = DVector::from_vec(vec![1.2, 1.1, 0.4, 2.1]);
//! let data = Dataset::unnamed(x, y).unwrap();
//! let restrictions = parse_restriction_file("b1 + b2 = 2", 3).unwrap();
//! let fit = fit_restricted_lasso(&data, &restrictions, &FitConfig::with_lambda(0.5)).unwrap();
//! assert!(restrictions.residual(fit.beta()) < 1e-8);
//! ```

pub mod cv;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod model;
pub mod restriction_parser;
pub mod rng;
pub mod simulation;

pub use cv::{
    cross_validate, kfold_split, lambda_grid, CvMethod, CvOptions, CvPoint, CvReport, LambdaGrid,
    SelectionRule,
};
pub use error::{Error, Result};
pub use estimators::{
    fit_lasso_lqa, fit_ols, fit_restricted_lasso, fit_restricted_ols, lqa_penalty_matrix,
    objective_value, LqaState, PenaltyMatrix,
};
pub use linalg::{solve_spd, solve_spd_vec, SpdFactor};
pub use model::{
    validate_dataset, validate_restrictions, Coefficients, Dataset, FitConfig, FitResult,
    RestrictionSet,
};
pub use restriction_parser::{parse_restriction, parse_restriction_file, render_restrictions};
pub use simulation::{
    classify_selection, replication_mse, run_experiment, run_replication, Method, MetricsRow,
    ScenarioKind, SimScenario,
};

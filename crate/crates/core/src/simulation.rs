//! Monte-Carlo comparison of OLS, restricted OLS, LASSO and restricted LASSO.
//!
//! Data follow `y = Xβ + ε` with standard normal predictors, normal or t₃
//! errors and optional contamination by N(100, 1) outliers. Each replication
//! fits all four estimators (λ by cross-validation for the penalized ones)
//! and scores them on variable selection and coefficient error.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cv::{self, CvMethod, CvOptions, SelectionRule};
use crate::error::{Error, Result};
use crate::estimators::{fit_lasso_lqa, fit_ols, fit_restricted_lasso, fit_restricted_ols};
use crate::model::{Coefficients, Dataset, FitConfig, RestrictionSet};
use crate::rng::{self, Purpose};

/// Coefficients of the simulated model.
pub const STUDY_BETA: [f64; 6] = [0.0, 1.0, 3.0, 1.0, 5.0, 0.0];

/// `β₂ = β₄` and `β₃ + 2β₄ + β₅ = 10`.
pub fn study_restrictions() -> RestrictionSet {
    RestrictionSet::from_rows(
        &[
            vec![0.0, 1.0, 0.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 2.0, 1.0, 0.0],
        ],
        &[0.0, 10.0],
        6,
    )
    .expect("study restrictions are valid")
}

const OUTLIER_MEAN: f64 = 100.0;
pub const DEFAULT_TAU: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDist {
    Normal,
    T3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Contamination {
    None,
    YDirection,
    XDirection,
}

/// Which predictor cells of a contaminated row receive the N(100, 1) draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XOutlierCells {
    /// One uniformly chosen predictor per contaminated row.
    #[default]
    SingleCell,
    /// Every predictor of the row.
    WholeRow,
}

/// Outlier direction passed to [`inject_outliers`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierDirection {
    Y,
    X(XOutlierCells),
}

/// The four named settings of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Normal,
    T3,
    OutlierY,
    OutlierX,
}

impl ScenarioKind {
    pub fn error_dist(self) -> ErrorDist {
        match self {
            ScenarioKind::T3 => ErrorDist::T3,
            _ => ErrorDist::Normal,
        }
    }

    pub fn contamination(self) -> Contamination {
        match self {
            ScenarioKind::OutlierY => Contamination::YDirection,
            ScenarioKind::OutlierX => Contamination::XDirection,
            _ => Contamination::None,
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "normal" => Ok(Self::Normal),
            "t3" => Ok(Self::T3),
            "outlier-y" => Ok(Self::OutlierY),
            "outlier-x" => Ok(Self::OutlierX),
            other => Err(format!(
                "unknown scenario {other:?} (expected normal, t3, outlier-y or outlier-x)"
            )),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Normal => "normal",
            Self::T3 => "t3",
            Self::OutlierY => "outlier-y",
            Self::OutlierX => "outlier-x",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "OLS")]
    Ols,
    #[serde(rename = "Res-OLS")]
    RestrictedOls,
    #[serde(rename = "LASSO")]
    Lasso,
    #[serde(rename = "Res-LASSO")]
    RestrictedLasso,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Ols,
        Method::RestrictedOls,
        Method::Lasso,
        Method::RestrictedLasso,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ols => "OLS",
            Method::RestrictedOls => "Res-OLS",
            Method::Lasso => "LASSO",
            Method::RestrictedLasso => "Res-LASSO",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub n: usize,
    pub beta_true: Vec<f64>,
    pub error_dist: ErrorDist,
    pub contamination: Contamination,
    pub contamination_fraction: f64,
    pub x_outlier_cells: XOutlierCells,
    pub restrictions: RestrictionSet,
    pub n_reps: usize,
    pub seed: u64,
    pub cv_folds: usize,
    pub grid_points: usize,
    pub cv_rule: SelectionRule,
    /// Magnitude below which an estimated coefficient counts as zero.
    pub tau: f64,
    /// Multiplies the generated errors; `0.0` gives noiseless data.
    pub noise_scale: f64,
    /// Iteration controls for the penalized fits; λ is set by CV.
    pub fit: FitConfig,
}

impl SimScenario {
    /// The study's setting with 200 replications and 10% contamination.
    pub fn standard(kind: ScenarioKind, n: usize, seed: u64) -> Self {
        Self {
            n,
            beta_true: STUDY_BETA.to_vec(),
            error_dist: kind.error_dist(),
            contamination: kind.contamination(),
            contamination_fraction: 0.1,
            x_outlier_cells: XOutlierCells::default(),
            restrictions: study_restrictions(),
            n_reps: 200,
            seed,
            cv_folds: cv::DEFAULT_FOLDS,
            grid_points: cv::DEFAULT_GRID_POINTS,
            cv_rule: SelectionRule::default(),
            tau: DEFAULT_TAU,
            noise_scale: 1.0,
            fit: FitConfig::default(),
        }
    }

    pub fn p(&self) -> usize {
        self.beta_true.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if self.restrictions.p() != p {
            return Err(Error::ShapeMismatch {
                expected: p,
                found: self.restrictions.p(),
            });
        }
        if self.n < p + self.restrictions.m() {
            return Err(Error::InvalidConfig(format!(
                "n = {} is below p + m = {}",
                self.n,
                p + self.restrictions.m()
            )));
        }
        if !(0.0..1.0).contains(&self.contamination_fraction) {
            return Err(Error::InvalidConfig("contamination fraction must lie in [0, 1)".into()));
        }
        if self.n_reps == 0 {
            return Err(Error::InvalidConfig("at least one replication is required".into()));
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::InvalidConfig("tau must be positive".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::InvalidConfig("noise scale must be finite and non-negative".into()));
        }
        let truth = DVector::from_column_slice(&self.beta_true);
        if self.restrictions.residual(&truth) > 1e-12 {
            return Err(Error::InvalidConfig(
                "true coefficients violate the restrictions".into(),
            ));
        }
        Ok(())
    }
}

/// n×p matrix of independent N(0, 1) draws.
pub fn gen_design_with<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> DMatrix<f64> {
    // Row-major fill so a row's draws are contiguous in the stream.
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = rng.sample(StandardNormal);
        }
    }
    x
}

pub fn gen_design(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    gen_design_with(&mut ChaCha8Rng::seed_from_u64(seed), n, p)
}

/// i.i.d. errors; t₃ draws are built as `Z / √(V/3)` with `V ~ χ²₃`.
pub fn gen_errors_with<R: Rng + ?Sized>(rng: &mut R, n: usize, dist: ErrorDist) -> DVector<f64> {
    match dist {
        ErrorDist::Normal => DVector::from_fn(n, |_, _| rng.sample(StandardNormal)),
        ErrorDist::T3 => {
            let chi = ChiSquared::new(3.0).expect("3 degrees of freedom");
            DVector::from_fn(n, |_, _| {
                let z: f64 = rng.sample(StandardNormal);
                let v: f64 = chi.sample(rng);
                z / (v / 3.0).sqrt()
            })
        }
    }
}

pub fn gen_errors(n: usize, dist: ErrorDist, seed: u64) -> DVector<f64> {
    gen_errors_with(&mut ChaCha8Rng::seed_from_u64(seed), n, dist)
}

/// Number of contaminated rows, `⌈fraction·n⌉`.
pub fn outlier_count(n: usize, fraction: f64) -> usize {
    let raw = fraction * n as f64;
    // 0.1 · 30 is 3.0000000000000004 in binary floating point.
    let count = (raw - 1e-9 * raw.max(1.0)).ceil();
    (count.max(0.0) as usize).min(n)
}

/// Replaces `⌈fraction·n⌉` uniformly chosen rows by N(100, 1) outliers:
/// their response for [`OutlierDirection::Y`], their predictors for
/// [`OutlierDirection::X`]. The response is not regenerated after predictor
/// contamination.
pub fn inject_outliers_with<R: Rng + ?Sized>(
    rng: &mut R,
    dataset: &Dataset,
    direction: OutlierDirection,
    fraction: f64,
) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig("outlier fraction must lie in (0, 1)".into()));
    }
    let n = dataset.n();
    let p = dataset.p();
    let rows = index::sample(rng, n, outlier_count(n, fraction)).into_vec();
    let mut x = dataset.x().clone();
    let mut y = dataset.y().clone();
    for &i in &rows {
        match direction {
            OutlierDirection::Y => y[i] = OUTLIER_MEAN + rng.sample::<f64, _>(StandardNormal),
            OutlierDirection::X(XOutlierCells::WholeRow) => {
                for j in 0..p {
                    x[(i, j)] = OUTLIER_MEAN + rng.sample::<f64, _>(StandardNormal);
                }
            }
            OutlierDirection::X(XOutlierCells::SingleCell) => {
                let j = rng.random_range(0..p);
                x[(i, j)] = OUTLIER_MEAN + rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    Dataset::new(x, y, dataset.names().to_vec())
}

pub fn inject_outliers(
    dataset: &Dataset,
    direction: OutlierDirection,
    fraction: f64,
    seed: u64,
) -> Result<Dataset> {
    inject_outliers_with(&mut ChaCha8Rng::seed_from_u64(seed), dataset, direction, fraction)
}

/// Selection outcome of one estimate against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Selection {
    /// True zeros estimated as zero.
    pub correct_zeros: usize,
    /// True nonzeros estimated as zero.
    pub incorrect_zeros: usize,
    /// Estimated-zero set equals the true-zero set.
    pub exactly_fitted: bool,
}

/// A coefficient counts as estimated zero when `|β̂_j| < tau`.
pub fn classify_selection(beta_hat: &[f64], beta_true: &[f64], tau: f64) -> Selection {
    assert_eq!(beta_hat.len(), beta_true.len(), "coefficient length mismatch");
    let mut correct_zeros = 0;
    let mut incorrect_zeros = 0;
    let mut exactly_fitted = true;
    for (&b, &t) in beta_hat.iter().zip(beta_true) {
        let est_zero = b.abs() < tau;
        let true_zero = t == 0.0;
        match (true_zero, est_zero) {
            (true, true) => correct_zeros += 1,
            (false, true) => incorrect_zeros += 1,
            _ => {}
        }
        if est_zero != true_zero {
            exactly_fitted = false;
        }
    }
    Selection {
        correct_zeros,
        incorrect_zeros,
        exactly_fitted,
    }
}

/// `‖β̂ − β‖² / p`.
pub fn replication_mse(beta_hat: &[f64], beta_true: &[f64]) -> f64 {
    assert_eq!(beta_hat.len(), beta_true.len(), "coefficient length mismatch");
    let sum: f64 = beta_hat
        .iter()
        .zip(beta_true)
        .map(|(b, t)| (b - t) * (b - t))
        .sum();
    sum / beta_true.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodEstimate {
    pub coefficients: Coefficients,
    /// CV-chosen λ for the penalized methods.
    pub lambda: Option<f64>,
    pub selection: Selection,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub estimate: Result<MethodEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub rep_index: usize,
    /// One outcome per method, in [`Method::ALL`] order.
    pub outcomes: Vec<MethodOutcome>,
}

impl ReplicationResult {
    pub fn outcome(&self, method: Method) -> &MethodOutcome {
        self.outcomes
            .iter()
            .find(|o| o.method == method)
            .expect("every method is fitted")
    }
}

/// The simulated data of replication `rep_index`.
pub fn replication_data(scenario: &SimScenario, rep_index: usize) -> Result<Dataset> {
    let rep = rep_index as u64;
    let p = scenario.p();
    let x = gen_design_with(&mut rng::stream(scenario.seed, rep, Purpose::Design), scenario.n, p);
    let eps = gen_errors_with(
        &mut rng::stream(scenario.seed, rep, Purpose::Errors),
        scenario.n,
        scenario.error_dist,
    );
    let y = &x * DVector::from_column_slice(&scenario.beta_true) + eps * scenario.noise_scale;
    let data = Dataset::unnamed(x, y)?;
    let direction = match scenario.contamination {
        Contamination::None => return Ok(data),
        Contamination::YDirection => OutlierDirection::Y,
        Contamination::XDirection => OutlierDirection::X(scenario.x_outlier_cells),
    };
    if scenario.contamination_fraction == 0.0 {
        return Ok(data);
    }
    inject_outliers_with(
        &mut rng::stream(scenario.seed, rep, Purpose::Outliers),
        &data,
        direction,
        scenario.contamination_fraction,
    )
}

/// Generates one dataset and fits all four methods. Estimator failures are
/// stored per method.
pub fn run_replication(scenario: &SimScenario, rep_index: usize) -> Result<ReplicationResult> {
    scenario.validate()?;
    let data = replication_data(scenario, rep_index)?;
    let rep = rep_index as u64;
    let restrictions = &scenario.restrictions;

    let outcomes = Method::ALL
        .iter()
        .map(|&method| {
            let fitted = match method {
                Method::Ols => fit_ols(&data).map(|f| (f, None)),
                Method::RestrictedOls => fit_restricted_ols(&data, restrictions).map(|f| (f, None)),
                Method::Lasso => {
                    let fold_seed =
                        rng::stream(scenario.seed, rep, Purpose::LassoFolds).next_u64();
                    cv_fit(scenario, &data, CvMethod::Lasso, fold_seed)
                }
                Method::RestrictedLasso => {
                    let fold_seed =
                        rng::stream(scenario.seed, rep, Purpose::RestrictedLassoFolds).next_u64();
                    cv_fit(scenario, &data, CvMethod::RestrictedLasso, fold_seed)
                }
            };
            let estimate = fitted.map(|(fit, lambda)| {
                let beta = fit.beta().as_slice();
                MethodEstimate {
                    selection: classify_selection(beta, &scenario.beta_true, scenario.tau),
                    mse: replication_mse(beta, &scenario.beta_true),
                    lambda,
                    coefficients: fit.coefficients,
                }
            });
            MethodOutcome { method, estimate }
        })
        .collect();
    Ok(ReplicationResult {
        rep_index,
        outcomes,
    })
}

fn cv_fit(
    scenario: &SimScenario,
    data: &Dataset,
    method: CvMethod,
    fold_seed: u64,
) -> Result<(crate::model::FitResult, Option<f64>)> {
    let restrictions = (method == CvMethod::RestrictedLasso).then_some(&scenario.restrictions);
    let grid = cv::lambda_grid(data, scenario.grid_points)?;
    let options = CvOptions {
        folds: scenario.cv_folds,
        seed: fold_seed,
        rule: scenario.cv_rule,
    };
    let report = cv::cross_validate(data, method, restrictions, grid.values(), &options, &scenario.fit)?;
    let config = FitConfig {
        lambda: report.best_lambda,
        ..scenario.fit.clone()
    };
    let fit = match restrictions {
        Some(r) => fit_restricted_lasso(data, r, &config)?,
        None => fit_lasso_lqa(data, &config)?,
    };
    Ok((fit, Some(report.best_lambda)))
}

/// Runs every replication. Replications execute in parallel; the result is
/// ordered by replication index.
pub fn run_replications(scenario: &SimScenario) -> Result<Vec<ReplicationResult>> {
    scenario.validate()?;
    (0..scenario.n_reps)
        .into_par_iter()
        .map(|rep| run_replication(scenario, rep))
        .collect()
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub method: Method,
    pub n: usize,
    pub correctly_fitted_rate: f64,
    pub avg_correct_zeros: f64,
    pub avg_incorrect_zeros: f64,
    pub mean_mse: f64,
    pub median_mse: f64,
}

/// Aggregates replications per method. Replications where a method failed
/// are left out of that method's averages.
pub fn summarize(scenario: &SimScenario, reps: &[ReplicationResult]) -> Vec<MetricsRow> {
    Method::ALL
        .iter()
        .map(|&method| {
            let estimates: Vec<&MethodEstimate> = reps
                .iter()
                .filter_map(|r| r.outcome(method).estimate.as_ref().ok())
                .collect();
            let count = estimates.len() as f64;
            let mean = |f: &dyn Fn(&MethodEstimate) -> f64| {
                estimates.iter().map(|e| f(e)).sum::<f64>() / count
            };
            let mut mses: Vec<f64> = estimates.iter().map(|e| e.mse).collect();
            mses.sort_by(f64::total_cmp);
            MetricsRow {
                method,
                n: scenario.n,
                correctly_fitted_rate: mean(&|e| f64::from(u8::from(e.selection.exactly_fitted))),
                avg_correct_zeros: mean(&|e| e.selection.correct_zeros as f64),
                avg_incorrect_zeros: mean(&|e| e.selection.incorrect_zeros as f64),
                mean_mse: mean(&|e| e.mse),
                median_mse: median_sorted(&mses),
            }
        })
        .collect()
}

fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Runs the scenario and returns one metrics row per method.
pub fn run_experiment(scenario: &SimScenario) -> Result<Vec<MetricsRow>> {
    let reps = run_replications(scenario)?;
    Ok(summarize(scenario, &reps))
}

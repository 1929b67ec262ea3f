//! Domain types shared by every estimator: the data, the restrictions
//! `R β = r`, fit configuration and fit results.
//!
//! Indices are 0-based everywhere in this crate. User-facing output (the CLI,
//! restriction files) is 1-based.

use std::collections::{BTreeSet, HashSet};
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Design matrix `x` (n×p, no implicit intercept) and response `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, names: Vec<String>) -> Result<Self> {
        validate_dataset(&x, &y, &names)?;
        Ok(Self { x, y, names })
    }

    /// Builds a dataset with column names `x1..xp`.
    pub fn unnamed(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(x, y, names)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Returns the dataset restricted to `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("row selection"));
        }
        let x = self.x.select_rows(rows);
        let y = self.y.select_rows(rows);
        Ok(Self {
            x,
            y,
            names: self.names.clone(),
        })
    }

    /// Replaces the response, keeping the design.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.names.clone())
    }
}

/// Checks the dataset invariants: matching shapes, finite entries and
/// distinct column names.
pub fn validate_dataset(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Empty("design matrix"));
    }
    if x.ncols() == 0 {
        return Err(Error::Empty("design matrix columns"));
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if names.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            what: "column names",
            expected: x.ncols(),
            found: names.len(),
        });
    }
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if !x[(i, j)].is_finite() {
                return Err(Error::NonFiniteEntry {
                    what: "design matrix",
                    row: i + 1,
                    col: j + 1,
                });
            }
        }
        if !y[i].is_finite() {
            return Err(Error::NonFiniteEntry {
                what: "response",
                row: i + 1,
                col: 1,
            });
        }
    }
    let mut seen = HashSet::new();
    for (j, name) in names.iter().enumerate() {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName {
                name: name.clone(),
                col: j + 1,
            });
        }
    }
    Ok(())
}

/// A coefficient vector β.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients(DVector<f64>);

impl Coefficients {
    pub fn new(beta: DVector<f64>) -> Self {
        Self(beta)
    }

    pub fn zeros(p: usize) -> Self {
        Self(DVector::zeros(p))
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for Coefficients {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl From<Vec<f64>> for Coefficients {
    fn from(v: Vec<f64>) -> Self {
        Self(DVector::from_vec(v))
    }
}

/// Linear equality restrictions `R β = r` with `R` of full row rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionSet {
    rmat: DMatrix<f64>,
    rvec: DVector<f64>,
}

impl RestrictionSet {
    pub fn new(rmat: DMatrix<f64>, rvec: DVector<f64>, p: usize) -> Result<Self> {
        validate_restrictions(&rmat, &rvec, p)?;
        Ok(Self { rmat, rvec })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<f64>], rhs: &[f64], p: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("restriction set"));
        }
        if let Some(bad) = rows.iter().find(|row| row.len() != p) {
            return Err(Error::ShapeMismatch {
                expected: p,
                found: bad.len(),
            });
        }
        let rmat = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(rmat, DVector::from_column_slice(rhs), p)
    }

    pub fn rmat(&self) -> &DMatrix<f64> {
        &self.rmat
    }

    pub fn rvec(&self) -> &DVector<f64> {
        &self.rvec
    }

    /// Number of restrictions `m`.
    pub fn m(&self) -> usize {
        self.rmat.nrows()
    }

    pub fn p(&self) -> usize {
        self.rmat.ncols()
    }

    /// `‖R β − r‖_∞`.
    pub fn residual(&self, beta: &DVector<f64>) -> f64 {
        (&self.rmat * beta - &self.rvec).amax()
    }

    /// True when coefficient `j` appears in at least one restriction.
    pub fn involves(&self, j: usize) -> bool {
        self.rmat.column(j).iter().any(|&v| v != 0.0)
    }
}

/// Checks that `R` is m×p with `1 ≤ m ≤ p`, `r` has length m and
/// `R` has numerical rank m.
pub fn validate_restrictions(rmat: &DMatrix<f64>, rvec: &DVector<f64>, p: usize) -> Result<()> {
    let m = rmat.nrows();
    if m == 0 {
        return Err(Error::Empty("restriction set"));
    }
    if rmat.ncols() != p {
        return Err(Error::ShapeMismatch {
            expected: p,
            found: rmat.ncols(),
        });
    }
    if rvec.len() != m {
        return Err(Error::DimensionMismatch {
            what: "restriction right-hand side",
            expected: m,
            found: rvec.len(),
        });
    }
    if m > p {
        return Err(Error::TooManyRows { rows: m, p });
    }
    for i in 0..m {
        for j in 0..p {
            if !rmat[(i, j)].is_finite() {
                return Err(Error::NonFiniteEntry {
                    what: "restriction matrix",
                    row: i + 1,
                    col: j + 1,
                });
            }
        }
        if !rvec[i].is_finite() {
            return Err(Error::NonFiniteEntry {
                what: "restriction right-hand side",
                row: i + 1,
                col: 1,
            });
        }
    }
    let rank = linalg::numerical_rank(rmat);
    if rank < m {
        return Err(Error::RankDeficient { rank, rows: m });
    }
    Ok(())
}

/// Tuning for the penalized estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Regularization weight λ of `‖y − Xβ‖² + λ Σ|β_j|`.
    pub lambda: f64,
    /// Magnitude below which a penalized coefficient is pinned to zero.
    pub zero_eps: f64,
    /// Stop when `‖β⁽ᵏ⁺¹⁾ − β⁽ᵏ⁾‖_∞ < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// `Some(mask)`: only coefficients with `mask[j] == true` are penalized.
    /// `None` penalizes every coefficient.
    pub penalize_mask: Option<Vec<bool>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            zero_eps: 1e-8,
            tol: 1e-8,
            max_iter: 100,
            penalize_mask: None,
        }
    }
}

impl FitConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn is_penalized(&self, j: usize) -> bool {
        self.penalize_mask.as_ref().is_none_or(|mask| mask[j])
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if self.zero_eps.is_nan() || self.zero_eps <= 0.0 {
            return Err(Error::InvalidConfig("zero_eps must be positive".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if let Some(mask) = &self.penalize_mask {
            if mask.len() != p {
                return Err(Error::DimensionMismatch {
                    what: "penalize mask",
                    expected: p,
                    found: mask.len(),
                });
            }
        }
        Ok(())
    }
}

/// Output of every estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Final coefficients. Dropped coordinates are exactly zero.
    pub coefficients: Coefficients,
    /// 0-based indices of coefficients counted as nonzero.
    pub selected: BTreeSet<usize>,
    /// Lagrange multipliers of the last restricted solve.
    pub multipliers: Option<DVector<f64>>,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖y − Xβ‖² + λ Σ_{penalized} |β_j|` at the returned coefficients.
    pub objective: f64,
    /// Restricted coefficients the penalty drove below `zero_eps` that were
    /// kept in the system because a restriction involves them.
    pub infeasible_drops: Vec<usize>,
}

impl FitResult {
    pub fn beta(&self) -> &DVector<f64> {
        &self.coefficients
    }

    /// Selected indices shifted to 1-based numbering.
    pub fn selected_one_based(&self) -> Vec<usize> {
        self.selected.iter().map(|j| j + 1).collect()
    }
}

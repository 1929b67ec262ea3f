use thiserror::Error;

/// Errors produced by validation, estimation, cross-validation and parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry in {what} at row {row}, column {col}")]
    NonFiniteEntry {
        what: &'static str,
        row: usize,
        col: usize,
    },

    #[error("duplicate column name {name:?} at column {col}")]
    DuplicateName { name: String, col: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("restriction matrix is rank deficient: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("restriction matrix has {found} columns but the model has {expected} coefficients")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("{rows} restrictions exceed the {p} coefficients")]
    TooManyRows { rows: usize, p: usize },

    #[error("matrix is numerically singular (model not identifiable)")]
    SingularMatrix,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("response is orthogonal to every column; lambda grid is undefined")]
    DegenerateResponse,

    #[error("fold count {k} out of range for {n} observations")]
    KOutOfRange { k: usize, n: usize },

    #[error("training set of fold {fold} has {rows} rows; at least 2 are required")]
    FoldTooSmall { fold: usize, rows: usize },

    #[error("fit failed at lambda {lambda} on fold {fold}: {source}")]
    CvFit {
        lambda: f64,
        fold: usize,
        source: Box<Error>,
    },

    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },

    #[error("variable b{index} out of range for {p} coefficients")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("equation has no variable term")]
    EmptyEquation,

    #[error("line {line}: {source}")]
    Line { line: usize, source: Box<Error> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

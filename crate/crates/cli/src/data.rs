//! CSV ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rlasso_core::Dataset;
use thiserror::Error;

/// Name given to the prepended column of ones.
pub const INTERCEPT_NAME: &str = "b1_intercept";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("input is empty")]
    EmptyFile,
    #[error("input has a header but no data rows")]
    NoRows,
    #[error("target column {0:?} not found in header")]
    MissingTarget(String),
    #[error("non-numeric cell {value:?} at row {row}, column {col} ({name})")]
    NonNumeric {
        row: usize,
        col: usize,
        name: String,
        value: String,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] rlasso_core::Error),
}

/// Loads a CSV file. See [`parse_csv`].
pub fn load_csv(path: &Path, target: &str, intercept: bool) -> Result<Dataset, DataError> {
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(io_err)?;
    parse_csv(&text, target, intercept)
}

/// Parses CSV text whose first record is a header. `target` becomes the
/// response and every other column a predictor, in header order. With
/// `intercept` a ones column named [`INTERCEPT_NAME`] is prepended.
///
/// Row numbers in errors count data rows from 1; column numbers count
/// header fields from 1.
pub fn parse_csv(text: &str, target: &str, intercept: bool) -> Result<Dataset, DataError> {
    if text.trim().is_empty() {
        return Err(DataError::EmptyFile);
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let target_col = header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| DataError::MissingTarget(target.to_owned()))?;

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for (c, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                row: r + 1,
                col: c + 1,
                name: header[c].clone(),
                value: cell.to_owned(),
            })?;
            if c == target_col {
                y.push(value);
            } else {
                x.push(value);
            }
        }
    }
    let n = y.len();
    if n == 0 {
        return Err(DataError::NoRows);
    }

    let mut names: Vec<String> = Vec::with_capacity(header.len());
    if intercept {
        names.push(INTERCEPT_NAME.to_owned());
    }
    names.extend(
        header
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != target_col)
            .map(|(_, h)| h.clone()),
    );
    let p = names.len();
    let k = header.len() - 1;
    let offset = usize::from(intercept);
    let xm = DMatrix::from_fn(n, p, |i, j| match j.checked_sub(offset) {
        None => 1.0,
        Some(j) => x[i * k + j],
    });
    Ok(Dataset::new(xm, DVector::from_vec(y), names)?)
}

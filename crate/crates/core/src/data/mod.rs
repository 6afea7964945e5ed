//! Getting data into shape: CSV ingestion, missing-value handling,
//! standardization, seeded train/validation splits, and a synthetic cohort
//! generator with known ground truth.

mod csv_io;
mod impute;
mod split;
mod standardize;
mod synthetic;

pub use csv_io::{load_csv, load_csv_path, parse_event, write_dataset_csv, RawTable};
pub use impute::{impute, ImputeStrategy};
pub use split::{split, split_indices};
pub use standardize::{standardize, Standardization};
pub use synthetic::{
    generate_synthetic, Baseline, GeneratorSpec, RiskForm, SyntheticCohort, COHORT_ACTIVE, COHORT_SIZE,
    COHORT_VARIABLES,
};

use thiserror::Error;

use crate::dataset::DatasetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot parse `{value}` as a number (row {row}, column `{column}`)")]
    UnparsableNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("invalid event indicator `{value}` at row {row} (expected 1/0, true/false, yes/no)")]
    InvalidEventValue { row: usize, value: String },
    #[error("duplicate column `{0}` in header")]
    DuplicateColumn(String),
    #[error("every row was deleted during imputation")]
    AllRowsDeleted,
    #[error("column `{0}` has no observed values")]
    ColumnAllMissing(String),
    #[error("table still has missing values (row {row}, column `{column}`); impute first")]
    MissingValue { row: usize, column: String },
    #[error("split leaves an empty partition (n = {n}, fraction = {fraction})")]
    EmptyPartition { n: usize, fraction: f64 },
    #[error("invalid split fraction {0}; must lie in (0, 1)")]
    InvalidFraction(f64),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    DimensionMismatch(#[from] crate::dataset::DimensionMismatch),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for DataError {
    fn from(e: csv::Error) -> Self {
        DataError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for DataError {
    fn from(e: std::io::Error) -> Self {
        DataError::Io(e.to_string())
    }
}

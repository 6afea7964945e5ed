//! Censored survival observations and the risk-model abstraction shared by
//! every model in the crate.

use std::collections::HashSet;

use ndarray::{Array2, ArrayView1, Axis};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("column lengths differ: {what} has length {found}, expected {expected}")]
    LengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {column} at row {row}")]
    NonFiniteValue { row: usize, column: String },
    #[error("negative follow-up time {value} at row {row}")]
    NegativeTime { row: usize, value: f64 },
    #[error("no events observed: every subject is censored")]
    NoEvents,
    #[error("duplicate variable name `{0}`")]
    DuplicateVariableName(String),
    #[error("dataset must contain at least one subject")]
    Empty,
}

/// Shape error raised when a covariate row does not match a model's input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("dimension mismatch: expected {expected}, found {found}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub found: usize,
}

impl DimensionMismatch {
    pub fn check(expected: usize, found: usize) -> Result<(), Self> {
        if expected == found {
            Ok(())
        } else {
            Err(Self { expected, found })
        }
    }
}

/// Unvalidated columns, as assembled by a loader or a test.
#[derive(Debug, Clone, Default)]
pub struct RawDataset {
    pub times: Vec<f64>,
    pub events: Vec<bool>,
    pub rows: Vec<Vec<f64>>,
    pub variable_names: Vec<String>,
}

/// Follow-up times (days), event indicators and a dense covariate matrix.
///
/// Immutable once constructed; every accessor hands out borrowed views.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Array2<f64>,
    variable_names: Vec<String>,
}

/// Row view into a [`SurvivalDataset`].
#[derive(Debug, Clone, Copy)]
pub struct Subject<'a> {
    pub time: f64,
    pub event: bool,
    pub covariate_row: ArrayView1<'a, f64>,
}

/// Check a candidate dataset. Requires at least one observed event.
pub fn validate_dataset(raw: RawDataset) -> Result<SurvivalDataset, DatasetError> {
    let n = raw.times.len();
    if n == 0 {
        return Err(DatasetError::Empty);
    }
    if raw.events.len() != n {
        return Err(DatasetError::LengthMismatch {
            what: "events".into(),
            expected: n,
            found: raw.events.len(),
        });
    }
    if raw.rows.len() != n {
        return Err(DatasetError::LengthMismatch {
            what: "covariate rows".into(),
            expected: n,
            found: raw.rows.len(),
        });
    }
    let p = raw.variable_names.len();
    let mut flat = Vec::with_capacity(n * p);
    for (i, row) in raw.rows.iter().enumerate() {
        if row.len() != p {
            return Err(DatasetError::LengthMismatch {
                what: format!("covariate row {i}"),
                expected: p,
                found: row.len(),
            });
        }
        flat.extend_from_slice(row);
    }
    let covariates = Array2::from_shape_vec((n, p), flat).expect("shape checked above");
    SurvivalDataset::new(raw.times, raw.events, covariates, raw.variable_names)
}

impl SurvivalDataset {
    pub fn new(
        times: Vec<f64>,
        events: Vec<bool>,
        covariates: Array2<f64>,
        variable_names: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let n = times.len();
        if n == 0 {
            return Err(DatasetError::Empty);
        }
        if events.len() != n {
            return Err(DatasetError::LengthMismatch {
                what: "events".into(),
                expected: n,
                found: events.len(),
            });
        }
        if covariates.nrows() != n {
            return Err(DatasetError::LengthMismatch {
                what: "covariate rows".into(),
                expected: n,
                found: covariates.nrows(),
            });
        }
        if covariates.ncols() != variable_names.len() {
            return Err(DatasetError::LengthMismatch {
                what: "variable names".into(),
                expected: covariates.ncols(),
                found: variable_names.len(),
            });
        }
        let mut seen = HashSet::with_capacity(variable_names.len());
        for name in &variable_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateVariableName(name.clone()));
            }
        }
        for (row, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(DatasetError::NonFiniteValue {
                    row,
                    column: "time".into(),
                });
            }
            if t < 0.0 {
                return Err(DatasetError::NegativeTime { row, value: t });
            }
        }
        for ((row, col), v) in covariates.indexed_iter() {
            if !v.is_finite() {
                return Err(DatasetError::NonFiniteValue {
                    row,
                    column: variable_names[col].clone(),
                });
            }
        }
        if !events.iter().any(|&e| e) {
            return Err(DatasetError::NoEvents);
        }
        Ok(Self {
            times,
            events,
            covariates,
            variable_names,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.times.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn covariates(&self) -> &Array2<f64> {
        &self.covariates
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.variable_names.iter().position(|v| v == name)
    }

    pub fn subject(&self, i: usize) -> Subject<'_> {
        Subject {
            time: self.times[i],
            event: self.events[i],
            covariate_row: self.covariates.row(i),
        }
    }

    pub fn subjects(&self) -> impl Iterator<Item = Subject<'_>> + '_ {
        (0..self.n_subjects()).map(move |i| self.subject(i))
    }

    /// Keep only the listed covariate columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> SurvivalDataset {
        SurvivalDataset {
            times: self.times.clone(),
            events: self.events.clone(),
            covariates: self.covariates.select(Axis(1), columns),
            variable_names: columns
                .iter()
                .map(|&c| self.variable_names[c].clone())
                .collect(),
        }
    }

    /// Keep only the listed subjects. Fails with `NoEvents` when none of them
    /// carries an event.
    pub fn select_rows(&self, rows: &[usize]) -> Result<SurvivalDataset, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        let events: Vec<bool> = rows.iter().map(|&r| self.events[r]).collect();
        if !events.iter().any(|&e| e) {
            return Err(DatasetError::NoEvents);
        }
        Ok(SurvivalDataset {
            times: rows.iter().map(|&r| self.times[r]).collect(),
            events,
            covariates: self.covariates.select(Axis(0), rows),
            variable_names: self.variable_names.clone(),
        })
    }

    /// Same subjects, new covariate matrix (used by standardization).
    pub(crate) fn with_covariates(&self, covariates: Array2<f64>) -> SurvivalDataset {
        debug_assert_eq!(covariates.dim(), self.covariates.dim());
        SurvivalDataset {
            times: self.times.clone(),
            events: self.events.clone(),
            covariates,
            variable_names: self.variable_names.clone(),
        }
    }

    pub fn to_raw(&self) -> RawDataset {
        RawDataset {
            times: self.times.clone(),
            events: self.events.clone(),
            rows: self
                .covariates
                .outer_iter()
                .map(|r| r.to_vec())
                .collect(),
            variable_names: self.variable_names.clone(),
        }
    }
}

/// Anything that maps a covariate row to a scalar log-risk, larger meaning
/// more hazardous. Scoring must be deterministic for a fixed model state.
pub trait RiskModel {
    fn input_dim(&self) -> usize;

    fn log_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch>;

    fn score_dataset(&self, data: &SurvivalDataset) -> Result<Vec<f64>, DimensionMismatch> {
        DimensionMismatch::check(self.input_dim(), data.n_covariates())?;
        data.covariates()
            .outer_iter()
            .map(|row| match row.as_slice() {
                Some(s) => self.log_risk(s),
                None => self.log_risk(&row.to_vec()),
            })
            .collect()
    }
}

use log::warn;
use ndarray::Axis;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::dataset::{DimensionMismatch, SurvivalDataset};

/// Per-column mean and sample (n − 1) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub variables: Vec<String>,
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

impl Standardization {
    pub fn fit(data: &SurvivalDataset) -> Self {
        let x = data.covariates();
        let n = x.nrows() as f64;
        let means: Vec<f64> = x.mean_axis(Axis(0)).expect("n ≥ 1").to_vec();
        let std_devs = x
            .columns()
            .into_iter()
            .zip(&means)
            .map(|(col, &m)| {
                if x.nrows() < 2 {
                    return 0.0;
                }
                let ss: f64 = col.iter().map(|v| (v - m) * (v - m)).sum();
                (ss / (n - 1.0)).sqrt()
            })
            .collect();
        Self {
            variables: data.variable_names().to_vec(),
            means,
            std_devs,
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Columns with zero spread; these are centered but not scaled.
    pub fn constant_columns(&self) -> Vec<&str> {
        self.variables
            .iter()
            .zip(&self.std_devs)
            .filter(|(_, &s)| s == 0.0)
            .map(|(v, _)| v.as_str())
            .collect()
    }

    #[inline]
    pub fn transform_value(&self, k: usize, v: f64) -> f64 {
        let s = self.std_devs[k];
        if s > 0.0 {
            (v - self.means[k]) / s
        } else {
            v - self.means[k]
        }
    }

    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        DimensionMismatch::check(self.dim(), x.len())?;
        Ok(x.iter().enumerate().map(|(k, &v)| self.transform_value(k, v)).collect())
    }
}

/// Z-score every covariate column, with `stats` when given (for example the
/// training-split statistics applied to validation data) or freshly
/// computed ones otherwise.
pub fn standardize(
    data: &SurvivalDataset,
    stats: Option<&Standardization>,
) -> Result<(SurvivalDataset, Standardization), DataError> {
    let stats = match stats {
        Some(s) => {
            DimensionMismatch::check(s.dim(), data.n_covariates())?;
            s.clone()
        }
        None => Standardization::fit(data),
    };
    let constant = stats.constant_columns();
    if !constant.is_empty() {
        warn!("standardize: constant columns left unscaled: {}", constant.join(", "));
    }
    let mut x = data.covariates().clone();
    for (k, mut col) in x.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| stats.transform_value(k, v));
    }
    Ok((data.with_covariates(x), stats))
}

//! Univariate Cox screening with a p-value gate, followed by a joint refit
//! on the variables that pass.

use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cox::{fit_cox, CoxConfig, CoxError, CoxFit};
use crate::dataset::SurvivalDataset;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScreeningError {
    #[error("significance threshold must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("no variable passed the screen at alpha = {0}")]
    NoVariablesSelected(f64),
    #[error("screening report does not match the dataset: {0}")]
    SchemaMismatch(String),
    #[error("joint fit failed: {0}")]
    Fit(#[from] CoxError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub beta: f64,
    pub hr: f64,
    pub p: f64,
}

impl CoefficientSummary {
    fn from_fit(fit: &CoxFit, k: usize) -> Self {
        Self {
            beta: fit.beta[k],
            hr: fit.hazard_ratios[k],
            p: fit.p_values[k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRow {
    pub variable_name: String,
    pub univariate: Option<CoefficientSummary>,
    pub selected: bool,
    pub multivariate: Option<CoefficientSummary>,
    /// Why the univariate fit failed, when it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One row per covariate, in dataset column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub alpha: f64,
    pub rows: Vec<ScreeningRow>,
}

impl ScreeningReport {
    pub fn selected_names(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.selected)
            .map(|r| r.variable_name.as_str())
            .collect()
    }

    pub fn selected_count(&self) -> usize {
        self.rows.iter().filter(|r| r.selected).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per variable; empty fields where a value is absent.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "variable",
            "univariate_beta",
            "univariate_hr",
            "univariate_p",
            "selected",
            "multivariate_beta",
            "multivariate_hr",
            "multivariate_p",
            "note",
        ])?;
        let cells = |s: &Option<CoefficientSummary>| match s {
            Some(s) => [s.beta.to_string(), s.hr.to_string(), s.p.to_string()],
            None => Default::default(),
        };
        for r in &self.rows {
            let [ub, uh, up] = cells(&r.univariate);
            let [mb, mh, mp] = cells(&r.multivariate);
            w.write_record([
                r.variable_name.as_str(),
                &ub,
                &uh,
                &up,
                if r.selected { "true" } else { "false" },
                &mb,
                &mh,
                &mp,
                r.note.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fit a single-covariate Cox model per column and mark those with Wald
/// `p < alpha`. A column that cannot be fitted (or whose fit does not
/// converge) is recorded with a note and left unselected.
pub fn univariate_screen(
    data: &SurvivalDataset,
    alpha: f64,
    config: &CoxConfig,
) -> Result<ScreeningReport, ScreeningError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ScreeningError::InvalidAlpha(alpha));
    }
    let rows = (0..data.n_covariates())
        .map(|k| {
            let name = data.variable_names()[k].clone();
            match fit_cox(&data.select_columns(&[k]), config) {
                Ok(fit) if fit.converged => {
                    let summary = CoefficientSummary::from_fit(&fit, 0);
                    ScreeningRow {
                        variable_name: name,
                        selected: summary.p < alpha,
                        univariate: Some(summary),
                        multivariate: None,
                        note: None,
                    }
                }
                Ok(fit) => {
                    warn!("screen: skipping `{name}`: no convergence in {} iterations", fit.iterations);
                    ScreeningRow {
                        variable_name: name,
                        univariate: None,
                        selected: false,
                        multivariate: None,
                        note: Some(format!("did not converge in {} iterations", fit.iterations)),
                    }
                }
                Err(e) => {
                    warn!("screen: skipping `{name}`: {e}");
                    ScreeningRow {
                        variable_name: name,
                        univariate: None,
                        selected: false,
                        multivariate: None,
                        note: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    Ok(ScreeningReport { alpha, rows })
}

/// Column indices of the selected variables in `data`.
pub fn selected_columns(data: &SurvivalDataset, report: &ScreeningReport) -> Result<Vec<usize>, ScreeningError> {
    report
        .rows
        .iter()
        .filter(|r| r.selected)
        .map(|r| {
            data.column_index(&r.variable_name)
                .ok_or_else(|| ScreeningError::SchemaMismatch(format!("unknown variable `{}`", r.variable_name)))
        })
        .collect()
}

/// Fit one joint model on the selected columns and fill in the
/// multivariate entries.
pub fn multivariate_refit(
    data: &SurvivalDataset,
    report: &ScreeningReport,
    config: &CoxConfig,
) -> Result<(ScreeningReport, CoxFit), ScreeningError> {
    let columns = selected_columns(data, report)?;
    if columns.is_empty() {
        return Err(ScreeningError::NoVariablesSelected(report.alpha));
    }
    let fit = fit_cox(&data.select_columns(&columns), config)?;
    if !fit.converged {
        warn!("screen: joint Cox fit did not converge after {} iterations", fit.iterations);
    }
    let mut completed = report.clone();
    let mut k = 0;
    for row in completed.rows.iter_mut() {
        row.multivariate = if row.selected {
            k += 1;
            Some(CoefficientSummary::from_fit(&fit, k - 1))
        } else {
            None
        };
    }
    Ok((completed, fit))
}

//! Cox proportional hazards regression.
//!
//! The model is fitted by Newton–Raphson on the log partial likelihood
//! (Breslow or Efron ties) with step halving, and reported with Wald
//! standard errors, two-sided p-values, hazard ratios and 95% intervals.
//! [`breslow_baseline`] and [`predict_survival`] turn a fit into survival
//! curves.

mod baseline;
mod fit;
mod likelihood;

pub use baseline::{breslow_baseline, predict_survival, BaselineHazard};
pub use fit::{fit_cox, CoxConfig};
pub use likelihood::{gradient_and_hessian, log_partial_likelihood, PartialLikelihood};

pub(crate) use likelihood::{descending_time_order, time_groups};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DimensionMismatch, RiskModel};

/// Tie-handling rule for the partial likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieMethod {
    #[default]
    Breslow,
    Efron,
}

impl std::str::FromStr for TieMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "breslow" => Ok(Self::Breslow),
            "efron" => Ok(Self::Efron),
            other => Err(format!("unknown tie method `{other}` (expected breslow or efron)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoxError {
    #[error(transparent)]
    DimensionMismatch(#[from] DimensionMismatch),
    #[error("covariate `{0}` is constant; remove it before fitting")]
    ConstantColumn(String),
    #[error(
        "Hessian is singular at iteration {iteration}; covariates may be collinear or \
         separate the outcome perfectly, consider removing separation-causing variables"
    )]
    SingularHessian { iteration: usize },
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed Cox fit document: {0}")]
    MalformedDocument(String),
}

/// A fitted Cox model.
///
/// `hazard_ratios[k] == beta[k].exp()` and the interval bounds are
/// `exp(beta ± 1.96·se)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CoxFitDocument", try_from = "CoxFitDocument")]
pub struct CoxFit {
    pub variable_names: Vec<String>,
    pub beta: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub hazard_ratios: Vec<f64>,
    pub p_values: Vec<f64>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tie_method: TieMethod,
}

impl CoxFit {
    /// Build the inference columns from coefficients and standard errors.
    pub fn from_estimates(
        variable_names: Vec<String>,
        beta: Vec<f64>,
        standard_errors: Vec<f64>,
        log_likelihood: f64,
        iterations: usize,
        converged: bool,
        tie_method: TieMethod,
    ) -> Self {
        let hazard_ratios = beta.iter().map(|b| b.exp()).collect();
        let p_values = beta
            .iter()
            .zip(&standard_errors)
            .map(|(&b, &se)| {
                if b == 0.0 {
                    1.0
                } else {
                    crate::normal::two_sided_p(b / se)
                }
            })
            .collect();
        let ci_lower = beta
            .iter()
            .zip(&standard_errors)
            .map(|(b, se)| (b - crate::normal::Z_975 * se).exp())
            .collect();
        let ci_upper = beta
            .iter()
            .zip(&standard_errors)
            .map(|(b, se)| (b + crate::normal::Z_975 * se).exp())
            .collect();
        Self {
            variable_names,
            beta,
            standard_errors,
            hazard_ratios,
            p_values,
            ci_lower,
            ci_upper,
            log_likelihood,
            iterations,
            converged,
            tie_method,
        }
    }

    pub fn n_coefficients(&self) -> usize {
        self.beta.len()
    }

    /// Linear log-risk `x·β`.
    pub fn predict_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        DimensionMismatch::check(self.beta.len(), x.len())?;
        Ok(x.iter().zip(&self.beta).map(|(a, b)| a * b).sum())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("CoxFit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CoxError> {
        serde_json::from_str(s).map_err(|e| CoxError::MalformedDocument(e.to_string()))
    }
}

impl RiskModel for CoxFit {
    fn input_dim(&self) -> usize {
        self.beta.len()
    }

    fn log_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        self.predict_risk(x)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VariableEntry {
    name: String,
    beta: f64,
    se: f64,
    hr: f64,
    p: f64,
    ci_lower: f64,
    ci_upper: f64,
}

/// On-disk layout of a [`CoxFit`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoxFitDocument {
    variables: Vec<VariableEntry>,
    log_likelihood: f64,
    tie_method: TieMethod,
    converged: bool,
    iterations: usize,
}

impl From<CoxFit> for CoxFitDocument {
    fn from(f: CoxFit) -> Self {
        let variables = (0..f.beta.len())
            .map(|k| VariableEntry {
                name: f.variable_names[k].clone(),
                beta: f.beta[k],
                se: f.standard_errors[k],
                hr: f.hazard_ratios[k],
                p: f.p_values[k],
                ci_lower: f.ci_lower[k],
                ci_upper: f.ci_upper[k],
            })
            .collect();
        Self {
            variables,
            log_likelihood: f.log_likelihood,
            tie_method: f.tie_method,
            converged: f.converged,
            iterations: f.iterations,
        }
    }
}

impl TryFrom<CoxFitDocument> for CoxFit {
    type Error = String;

    fn try_from(doc: CoxFitDocument) -> Result<Self, Self::Error> {
        let mut names = std::collections::HashSet::new();
        for v in &doc.variables {
            if !names.insert(v.name.as_str()) {
                return Err(format!("duplicate variable `{}`", v.name));
            }
        }
        Ok(Self {
            variable_names: doc.variables.iter().map(|v| v.name.clone()).collect(),
            beta: doc.variables.iter().map(|v| v.beta).collect(),
            standard_errors: doc.variables.iter().map(|v| v.se).collect(),
            hazard_ratios: doc.variables.iter().map(|v| v.hr).collect(),
            p_values: doc.variables.iter().map(|v| v.p).collect(),
            ci_lower: doc.variables.iter().map(|v| v.ci_lower).collect(),
            ci_upper: doc.variables.iter().map(|v| v.ci_upper).collect(),
            log_likelihood: doc.log_likelihood,
            iterations: doc.iterations,
            converged: doc.converged,
            tie_method: doc.tie_method,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hazard_ratio_arithmetic() {
        let f = CoxFit::from_estimates(
            vec!["gender".into(), "hematocrit".into()],
            vec![0.3554, -0.0480],
            vec![0.1, 0.01],
            -10.0,
            3,
            true,
            TieMethod::Breslow,
        );
        assert!((f.hazard_ratios[0] - 1.4268).abs() < 1e-4);
        assert!((f.hazard_ratios[1] - 0.9531).abs() < 1e-4);
        for k in 0..2 {
            assert_eq!(f.hazard_ratios[k], f.beta[k].exp());
            assert!(f.ci_lower[k] < f.hazard_ratios[k] && f.hazard_ratios[k] < f.ci_upper[k]);
        }
    }

    #[test]
    fn zero_coefficient_has_unit_p_value() {
        let f = CoxFit::from_estimates(
            vec!["a".into()],
            vec![0.0],
            vec![0.3],
            0.0,
            1,
            true,
            TieMethod::Efron,
        );
        assert_eq!(f.p_values[0], 1.0);
    }

    #[test]
    fn json_field_names() {
        let f = CoxFit::from_estimates(
            vec!["a".into()],
            vec![0.5],
            vec![0.2],
            -3.5,
            4,
            true,
            TieMethod::Efron,
        );
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        let var = &v["variables"][0];
        for key in ["name", "beta", "se", "hr", "p", "ci_lower", "ci_upper"] {
            assert!(var.get(key).is_some(), "missing {key}");
        }
        for key in ["log_likelihood", "tie_method", "converged", "iterations"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["tie_method"], "efron");
        assert_eq!(CoxFit::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn risk_is_dot_product() {
        let f = CoxFit::from_estimates(
            vec!["a".into(), "b".into()],
            vec![0.8, -0.2],
            vec![0.1, 0.1],
            0.0,
            1,
            true,
            TieMethod::Breslow,
        );
        assert_eq!(f.predict_risk(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(f.predict_risk(&[1.0, 0.0]).unwrap(), 0.8);
        assert!(f.predict_risk(&[1.0]).is_err());
        let (x1, x2) = ([0.3, 1.0], [1.2, -0.5]);
        let diff = (x1[0] - x2[0]) * 0.8 + (x1[1] - x2[1]) * -0.2;
        let r1 = f.predict_risk(&x1).unwrap();
        let r2 = f.predict_risk(&x2).unwrap();
        assert_eq!(r1 > r2, diff > 0.0);
    }
}

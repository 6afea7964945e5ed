use log::debug;
use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::likelihood::{full_evaluation, log_partial_likelihood};
use super::{CoxError, CoxFit, TieMethod};
use crate::dataset::SurvivalDataset;
use crate::linalg;

/// Coefficients beyond this magnitude are taken as a sign of monotone
/// likelihood (perfect separation).
const DIVERGENCE_BOUND: f64 = 50.0;
const STEP_TOLERANCE: f64 = 1e-8;
const SETTLED_STEP: f64 = 1e-4;

fn max_abs(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxConfig {
    pub tie_method: TieMethod,
    pub max_iterations: usize,
    /// Convergence threshold on the absolute change in log partial likelihood.
    pub tolerance: f64,
    /// Maximum number of step halvings within one Newton iteration.
    pub step_halving_limit: usize,
}

impl Default for CoxConfig {
    fn default() -> Self {
        Self {
            tie_method: TieMethod::Breslow,
            max_iterations: 100,
            tolerance: 1e-9,
            step_halving_limit: 10,
        }
    }
}

impl CoxConfig {
    pub fn with_ties(tie_method: TieMethod) -> Self {
        Self {
            tie_method,
            ..Self::default()
        }
    }
}

/// Fit a Cox model by Newton–Raphson started from `beta = 0`.
///
/// A fit that runs out of iterations, or whose coefficients diverge, is
/// returned with `converged = false` rather than as an error.
pub fn fit_cox(data: &SurvivalDataset, config: &CoxConfig) -> Result<CoxFit, CoxError> {
    if config.max_iterations == 0 {
        return Err(CoxError::InvalidConfig("max_iterations must be at least 1".into()));
    }
    if config.tolerance.is_nan() || config.tolerance <= 0.0 {
        return Err(CoxError::InvalidConfig("tolerance must be positive".into()));
    }
    for (k, col) in data.covariates().columns().into_iter().enumerate() {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            return Err(CoxError::ConstantColumn(data.variable_names()[k].clone()));
        }
    }

    let p = data.n_covariates();
    let tie = config.tie_method;
    let mut beta = Array1::<f64>::zeros(p);
    let mut current = full_evaluation(data, beta.as_slice().unwrap(), tie)?;
    let mut converged = false;
    let mut iterations = 0;
    let mut small_change = false;

    loop {
        let neg_hessian = -&current.hessian;
        let chol = linalg::cholesky(&neg_hessian).ok_or(CoxError::SingularHessian { iteration: iterations })?;
        let mut step = linalg::cholesky_solve(&chol, &current.gradient);
        let max_step = max_abs(&step);
        // A tiny likelihood change only counts as convergence when the next
        // Newton step is small too; under monotone likelihood the change
        // vanishes while the coefficients keep drifting.
        let beta_scale = 1.0 + max_abs(&beta);
        if max_step < STEP_TOLERANCE || (small_change && max_step < SETTLED_STEP * beta_scale) {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
        iterations += 1;

        let mut accepted = None;
        for _ in 0..=config.step_halving_limit {
            let trial = &beta + &step;
            let value = log_partial_likelihood(data, trial.as_slice().unwrap(), tie)?;
            if value >= current.value {
                accepted = Some((trial, value));
                break;
            }
            step *= 0.5;
        }

        let Some((trial, value)) = accepted else {
            // No ascent along the Newton direction: at the optimum up to
            // rounding, or badly conditioned.
            let last = log_partial_likelihood(data, (&beta + &step).as_slice().unwrap(), tie)?;
            converged = (last - current.value).abs() < config.tolerance;
            debug!("cox: step halving exhausted at iteration {iterations}, converged={converged}");
            break;
        };

        let change = value - current.value;
        beta = trial;
        current = full_evaluation(data, beta.as_slice().unwrap(), tie)?;
        debug!("cox: iteration {iterations} loglik {value:.10} change {change:.3e}");

        if beta.iter().any(|b| b.abs() > DIVERGENCE_BOUND) {
            debug!("cox: coefficients diverging, monotone likelihood suspected");
            break;
        }
        small_change = change.abs() < config.tolerance;
    }

    let neg_hessian = -&current.hessian;
    let chol = linalg::cholesky(&neg_hessian).ok_or(CoxError::SingularHessian { iteration: iterations })?;
    let covariance = linalg::cholesky_inverse(&chol);
    let standard_errors = covariance.diag().iter().map(|v| v.sqrt()).collect();

    Ok(CoxFit::from_estimates(
        data.variable_names().to_vec(),
        beta.to_vec(),
        standard_errors,
        current.value,
        iterations,
        converged,
        tie,
    ))
}

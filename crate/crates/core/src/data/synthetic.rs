use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::dataset::SurvivalDataset;
use crate::rng;

/// True log-risk `h(x)` of a synthetic cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RiskForm {
    /// `h(x) = x·beta_true`.
    Linear { beta_true: Vec<f64> },
    /// Centered diagonal quadratic, `h(x) = Σ weights[k]·(x_k² − 1)`, so that
    /// `E[h] = 0` for standard normal covariates.
    Quadratic { weights: Vec<f64> },
}

impl RiskForm {
    fn coefficients(&self) -> &[f64] {
        match self {
            RiskForm::Linear { beta_true } => beta_true,
            RiskForm::Quadratic { weights } => weights,
        }
    }

    pub fn log_risk(&self, x: &[f64]) -> f64 {
        match self {
            RiskForm::Linear { beta_true } => x.iter().zip(beta_true).map(|(a, b)| a * b).sum(),
            RiskForm::Quadratic { weights } => {
                x.iter().zip(weights).map(|(a, w)| w * (a * a - 1.0)).sum()
            }
        }
    }
}

/// Baseline hazard that the relative risk multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Baseline {
    Exponential { lambda0: f64 },
    Weibull { lambda0: f64, k: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub p: usize,
    pub risk_form: RiskForm,
    pub baseline: Baseline,
    /// Administrative follow-up cutoff in days.
    pub censoring_horizon: f64,
    /// Rate of independent exponential censoring; 0 disables it.
    pub extra_censoring_rate: f64,
    pub seed: u64,
}

pub const COHORT_SIZE: usize = 2293;
pub const COHORT_VARIABLES: usize = 51;
pub const COHORT_ACTIVE: usize = 14;

/// Effect sizes of the active variables in the default cohorts.
const ACTIVE_EFFECTS: [f64; COHORT_ACTIVE] = [
    0.60, -0.50, 0.45, -0.40, 0.35, -0.35, 0.30, -0.30, 0.30, -0.25, 0.25, -0.25, 0.20, -0.20,
];

impl GeneratorSpec {
    /// Registry-scale linear cohort: 2293 subjects, 51 covariates of which the
    /// first 14 carry effects, 30-day administrative censoring.
    pub fn readmission_cohort(seed: u64) -> Self {
        let mut beta_true = vec![0.0; COHORT_VARIABLES];
        beta_true[..COHORT_ACTIVE].copy_from_slice(&ACTIVE_EFFECTS);
        Self {
            n: COHORT_SIZE,
            p: COHORT_VARIABLES,
            risk_form: RiskForm::Linear { beta_true },
            baseline: Baseline::Exponential { lambda0: 0.005 },
            censoring_horizon: 30.0,
            extra_censoring_rate: 0.0,
            seed,
        }
    }

    /// Same shape as [`Self::readmission_cohort`] with a quadratic risk in the
    /// first 14 covariates.
    pub fn quadratic_cohort(seed: u64) -> Self {
        let mut weights = vec![0.0; COHORT_VARIABLES];
        for w in &mut weights[..COHORT_ACTIVE] {
            *w = 0.35;
        }
        Self {
            risk_form: RiskForm::Quadratic { weights },
            baseline: Baseline::Exponential { lambda0: 0.008 },
            ..Self::readmission_cohort(seed)
        }
    }

    /// Indices of covariates with a non-zero true effect.
    pub fn active_variables(&self) -> Vec<usize> {
        self.risk_form
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidSpec(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        let len = self.risk_form.coefficients().len();
        if len != self.p {
            return bad(format!("risk_form has {len} coefficients but p = {}", self.p));
        }
        if self.risk_form.coefficients().iter().any(|c| !c.is_finite()) {
            return bad("risk_form coefficients must be finite".into());
        }
        let (lambda0, k) = match self.baseline {
            Baseline::Exponential { lambda0 } => (lambda0, 1.0),
            Baseline::Weibull { lambda0, k } => (lambda0, k),
        };
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return bad(format!("lambda0 must be positive, got {lambda0}"));
        }
        if !(k > 0.0 && k.is_finite()) {
            return bad(format!("Weibull shape k must be positive, got {k}"));
        }
        if self.censoring_horizon.is_nan() || self.censoring_horizon <= 0.0 {
            return bad("censoring_horizon must be positive".into());
        }
        if !(self.extra_censoring_rate >= 0.0 && self.extra_censoring_rate.is_finite()) {
            return bad("extra_censoring_rate must be non-negative".into());
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, DataError> {
        let spec: Self =
            serde_json::from_str(s).map_err(|e| DataError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// A generated cohort together with each subject's true log-risk.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub dataset: SurvivalDataset,
    pub true_log_risk: Vec<f64>,
}

/// Draw a cohort. Per subject the stream is: `p` standard normals, one
/// uniform for the event time, one uniform for random censoring.
///
/// Event times come from inverse transform with hazard
/// `λ₀·exp(h(x))` (exponential) or `λ₀·k·t^(k−1)·exp(h(x))` (Weibull).
pub fn generate_synthetic(spec: &GeneratorSpec) -> Result<SyntheticCohort, DataError> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = rng::seeded(spec.seed);
    let mut x = Array2::<f64>::zeros((n, p));
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    let mut true_log_risk = Vec::with_capacity(n);

    for i in 0..n {
        for k in 0..p {
            x[[i, k]] = rng.sample(StandardNormal);
        }
        let h = spec.risk_form.log_risk(x.row(i).as_slice().expect("row-major"));
        let u_event: f64 = 1.0 - rng.random::<f64>();
        let u_censor: f64 = 1.0 - rng.random::<f64>();

        let scaled = -u_event.ln() / h.exp();
        let t_event = match spec.baseline {
            Baseline::Exponential { lambda0 } => scaled / lambda0,
            Baseline::Weibull { lambda0, k } => (scaled / lambda0).powf(1.0 / k),
        };
        let t_censor = if spec.extra_censoring_rate > 0.0 {
            spec.censoring_horizon
                .min(-u_censor.ln() / spec.extra_censoring_rate)
        } else {
            spec.censoring_horizon
        };
        times.push(t_event.min(t_censor));
        events.push(t_event <= t_censor);
        true_log_risk.push(h);
    }

    let width = p.to_string().len();
    let names = (1..=p).map(|k| format!("x{k:0width$}")).collect();
    let dataset = SurvivalDataset::new(times, events, x, names)?;
    Ok(SyntheticCohort {
        dataset,
        true_log_risk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = GeneratorSpec {
            n: 50,
            ..GeneratorSpec::readmission_cohort(3)
        };
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = GeneratorSpec { seed: 4, ..spec.clone() };
        assert_ne!(
            generate_synthetic(&spec).unwrap().dataset,
            generate_synthetic(&other).unwrap().dataset
        );
    }

    #[test]
    fn null_event_fraction_matches_exponential_cdf() {
        let spec = GeneratorSpec {
            n: 5000,
            p: 2,
            risk_form: RiskForm::Linear { beta_true: vec![0.0, 0.0] },
            baseline: Baseline::Exponential { lambda0: 0.05 },
            censoring_horizon: 30.0,
            extra_censoring_rate: 0.0,
            seed: 13,
        };
        let c = generate_synthetic(&spec).unwrap();
        let frac = c.dataset.n_events() as f64 / 5000.0;
        let expected = 1.0 - (-0.05_f64 * 30.0).exp();
        assert!((frac - expected).abs() < 0.02, "{frac} vs {expected}");
        assert!(c.dataset.times().iter().all(|&t| t <= 30.0));
    }

    #[test]
    fn weibull_and_extra_censoring() {
        let spec = GeneratorSpec {
            n: 400,
            p: 1,
            risk_form: RiskForm::Quadratic { weights: vec![0.5] },
            baseline: Baseline::Weibull { lambda0: 0.01, k: 1.5 },
            censoring_horizon: 30.0,
            extra_censoring_rate: 0.02,
            seed: 1,
        };
        let c = generate_synthetic(&spec).unwrap();
        let frac = c.dataset.n_events() as f64 / 400.0;
        assert!(frac > 0.0 && frac < 1.0);
        for (h, x) in c.true_log_risk.iter().zip(c.dataset.covariates().column(0)) {
            assert!((h - 0.5 * (x * x - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn default_cohorts_are_valid() {
        let lin = GeneratorSpec::readmission_cohort(0);
        assert_eq!(lin.active_variables(), (0..14).collect::<Vec<_>>());
        lin.validate().unwrap();
        GeneratorSpec::quadratic_cohort(0).validate().unwrap();
        let names = generate_synthetic(&GeneratorSpec { n: 5, ..lin }).unwrap();
        assert_eq!(names.dataset.variable_names()[0], "x01");
    }

    #[test]
    fn spec_json_round_trip_and_validation() {
        let spec = GeneratorSpec::quadratic_cohort(8);
        assert_eq!(GeneratorSpec::from_json(&spec.to_json()).unwrap(), spec);
        let v: serde_json::Value = serde_json::from_str(&spec.to_json()).unwrap();
        for key in ["n", "p", "risk_form", "baseline", "censoring_horizon", "extra_censoring_rate", "seed"] {
            assert!(v.get(key).is_some());
        }
        let bad = GeneratorSpec { p: 3, ..spec };
        assert!(matches!(bad.validate(), Err(DataError::InvalidSpec(_))));
    }
}

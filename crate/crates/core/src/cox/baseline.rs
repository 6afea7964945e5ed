use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{descending_time_order, time_groups, CoxError, CoxFit};
use crate::dataset::{DimensionMismatch, SurvivalDataset};

/// Breslow cumulative baseline hazard, a step function over event times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazard {
    pub event_times: Vec<f64>,
    pub cumulative_hazard: Vec<f64>,
}

impl BaselineHazard {
    /// `H₀(t)`; zero before the first event time.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.event_times.partition_point(|&e| e <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative_hazard[k - 1]
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "cumulative_hazard"])?;
        for (t, h) in self.event_times.iter().zip(&self.cumulative_hazard) {
            w.write_record([t.to_string(), h.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self, CoxError> {
        let mut r = csv::Reader::from_reader(input);
        let mut event_times = Vec::new();
        let mut cumulative_hazard = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| CoxError::MalformedDocument(e.to_string()))?;
            let parse = |i: usize| -> Result<f64, CoxError> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| CoxError::MalformedDocument(format!("bad baseline row {rec:?}")))
            };
            event_times.push(parse(0)?);
            cumulative_hazard.push(parse(1)?);
        }
        let increasing = event_times.windows(2).all(|w| w[0] < w[1]);
        let monotone = cumulative_hazard.windows(2).all(|w| w[0] <= w[1]);
        if !increasing || !monotone || cumulative_hazard.iter().any(|&h| h < 0.0) {
            return Err(CoxError::MalformedDocument(
                "baseline hazard must have increasing times and non-decreasing hazard".into(),
            ));
        }
        Ok(Self {
            event_times,
            cumulative_hazard,
        })
    }
}

/// Breslow estimator `H₀(t) = Σ_{tᵢ ≤ t} dᵢ / Σ_{j ∈ R(tᵢ)} exp(xⱼ·β̂)`.
pub fn breslow_baseline(data: &SurvivalDataset, fit: &CoxFit) -> Result<BaselineHazard, CoxError> {
    DimensionMismatch::check(fit.n_coefficients(), data.n_covariates())?;
    let x = data.covariates();
    let times = data.times();
    let events = data.events();
    let beta = ndarray::ArrayView1::from(&fit.beta[..]);
    let relative_risk = x.dot(&beta).mapv(f64::exp);

    let order = descending_time_order(times);
    let mut at_risk = 0.0;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for group in time_groups(&order, times) {
        at_risk += group.iter().map(|&j| relative_risk[j]).sum::<f64>();
        let d = group.iter().filter(|&&j| events[j]).count();
        if d > 0 {
            steps.push((times[group[0]], d as f64 / at_risk));
        }
    }
    steps.reverse();
    let mut cumulative = 0.0;
    let mut event_times = Vec::with_capacity(steps.len());
    let mut cumulative_hazard = Vec::with_capacity(steps.len());
    for (t, inc) in steps {
        cumulative += inc;
        event_times.push(t);
        cumulative_hazard.push(cumulative);
    }
    Ok(BaselineHazard {
        event_times,
        cumulative_hazard,
    })
}

/// `S(t | x) = exp(−H₀(t)·exp(x·β̂))`. Times before the first event
/// (including negative times) give 1.
pub fn predict_survival(
    fit: &CoxFit,
    baseline: &BaselineHazard,
    x: &[f64],
    t: f64,
) -> Result<f64, CoxError> {
    let eta = fit.predict_risk(x)?;
    Ok((-baseline.at(t) * eta.exp()).exp())
}

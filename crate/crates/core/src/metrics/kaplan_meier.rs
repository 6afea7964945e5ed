use std::io::Write;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Product-limit survival curve, one step per distinct event time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaplanMeierCurve {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
}

impl KaplanMeierCurve {
    /// `S(t)`, equal to 1 before the first event time.
    pub fn survival_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }

    /// Columns `time,survival,at_risk,events`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "survival", "at_risk", "events"])?;
        for k in 0..self.times.len() {
            w.write_record([
                self.times[k].to_string(),
                self.survival[k].to_string(),
                self.at_risk[k].to_string(),
                self.events[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Kaplan–Meier estimate. Subjects censored at an event time are still at
/// risk at that time.
pub fn kaplan_meier(times: &[f64], events: &[bool]) -> Result<KaplanMeierCurve, MetricsError> {
    if times.is_empty() {
        return Err(MetricsError::Empty);
    }
    if times.len() != events.len() {
        return Err(MetricsError::LengthMismatch {
            times: times.len(),
            events: events.len(),
            risks: times.len(),
        });
    }
    if let Some(i) = times.iter().position(|t| !t.is_finite() || *t < 0.0) {
        return Err(MetricsError::InvalidTime(i));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut curve = KaplanMeierCurve {
        times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
    };
    let mut remaining = times.len();
    let mut s = 1.0;
    for group in order.chunk_by(|&a, &b| times[a] == times[b]) {
        let d = group.iter().filter(|&&i| events[i]).count();
        if d > 0 {
            s *= (remaining - d) as f64 / remaining as f64;
            curve.times.push(times[group[0]]);
            curve.survival.push(s);
            curve.at_risk.push(remaining);
            curve.events.push(d);
        }
        remaining -= group.len();
    }
    Ok(curve)
}

//! Cox partial log-likelihood with analytic gradient and Hessian.
//!
//! Subjects are swept in order of decreasing follow-up time so that each
//! distinct time adds its subjects to a growing risk set. Risk-set sums are
//! kept relative to the running maximum of the linear predictor and rescaled
//! whenever the maximum moves, so no exponential ever exceeds one.

use ndarray::{Array1, Array2, ArrayView1};

use super::{CoxError, TieMethod};
use crate::dataset::{DimensionMismatch, SurvivalDataset};

/// Value, gradient and Hessian of the log partial likelihood at one point.
#[derive(Debug, Clone)]
pub struct PartialLikelihood {
    pub value: f64,
    pub gradient: Array1<f64>,
    pub hessian: Array2<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Indices sorted by decreasing time; equal times keep index order.
pub(crate) fn descending_time_order(times: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &b| times[b].total_cmp(&times[a]).then(a.cmp(&b)));
    idx
}

/// Consecutive runs of equal time in an order produced by
/// [`descending_time_order`].
pub(crate) fn time_groups<'a>(
    order: &'a [usize],
    times: &'a [f64],
) -> impl Iterator<Item = &'a [usize]> + 'a {
    order.chunk_by(move |&a, &b| times[a] == times[b])
}

fn linear_predictor(data: &SurvivalDataset, beta: &[f64]) -> Result<Array1<f64>, CoxError> {
    DimensionMismatch::check(data.n_covariates(), beta.len())?;
    Ok(data.covariates().dot(&ArrayView1::from(beta)))
}

struct RiskSet {
    max: f64,
    s0: f64,
    s1: Array1<f64>,
    s2: Array2<f64>,
}

impl RiskSet {
    fn new(p: usize, order: Order) -> Self {
        let (p1, p2) = match order {
            Order::Value => (0, 0),
            Order::Gradient => (p, 0),
            Order::Hessian => (p, p),
        };
        Self {
            max: f64::NEG_INFINITY,
            s0: 0.0,
            s1: Array1::zeros(p1),
            s2: Array2::zeros((p2, p2)),
        }
    }

    fn add(&mut self, eta: f64, x: ArrayView1<f64>) {
        if eta > self.max {
            let scale = (self.max - eta).exp();
            self.s0 *= scale;
            self.s1 *= scale;
            self.s2 *= scale;
            self.max = eta;
        }
        let w = (eta - self.max).exp();
        self.s0 += w;
        if !self.s1.is_empty() {
            self.s1.scaled_add(w, &x);
        }
        if !self.s2.is_empty() {
            add_outer(&mut self.s2, w, x, x);
        }
    }
}

fn add_outer(m: &mut Array2<f64>, w: f64, a: ArrayView1<f64>, b: ArrayView1<f64>) {
    for (i, &ai) in a.iter().enumerate() {
        let wa = w * ai;
        let mut row = m.row_mut(i);
        row.scaled_add(wa, &b);
    }
}

fn evaluate(
    data: &SurvivalDataset,
    beta: &[f64],
    tie: TieMethod,
    order: Order,
) -> Result<PartialLikelihood, CoxError> {
    let eta = linear_predictor(data, beta)?;
    let p = data.n_covariates();
    let x = data.covariates();
    let times = data.times();
    let events = data.events();
    let sweep = descending_time_order(times);

    let mut risk = RiskSet::new(p, order);
    let mut value = 0.0;
    let mut gradient = Array1::<f64>::zeros(if order >= Order::Gradient { p } else { 0 });
    let mut hessian = Array2::<f64>::zeros(if order >= Order::Hessian { (p, p) } else { (0, 0) });

    for group in time_groups(&sweep, times) {
        for &j in group {
            risk.add(eta[j], x.row(j));
        }
        let n_events = group.iter().filter(|&&j| events[j]).count();
        if n_events == 0 {
            continue;
        }
        let d = n_events as f64;
        let log_max = risk.max;
        for &i in group.iter().filter(|&&i| events[i]) {
            value += eta[i];
            if order >= Order::Gradient {
                gradient += &x.row(i);
            }
        }
        match tie {
            TieMethod::Breslow => {
                value -= d * (risk.s0.ln() + log_max);
                if order >= Order::Gradient {
                    let mean = &risk.s1 / risk.s0;
                    gradient.scaled_add(-d, &mean);
                    if order >= Order::Hessian {
                        hessian.scaled_add(-d / risk.s0, &risk.s2);
                        add_outer(&mut hessian, d, mean.view(), mean.view());
                    }
                }
            }
            TieMethod::Efron => {
                let mut a0 = 0.0;
                let mut a1 = Array1::<f64>::zeros(risk.s1.len());
                let mut a2 = Array2::<f64>::zeros(risk.s2.dim());
                for &i in group.iter().filter(|&&i| events[i]) {
                    let w = (eta[i] - log_max).exp();
                    a0 += w;
                    if !a1.is_empty() {
                        a1.scaled_add(w, &x.row(i));
                    }
                    if !a2.is_empty() {
                        add_outer(&mut a2, w, x.row(i), x.row(i));
                    }
                }
                for l in 0..n_events {
                    let frac = l as f64 / d;
                    let denom = risk.s0 - frac * a0;
                    value -= denom.ln() + log_max;
                    if order >= Order::Gradient {
                        let mean = (&risk.s1 - &(&a1 * frac)) / denom;
                        gradient -= &mean;
                        if order >= Order::Hessian {
                            hessian.scaled_add(-1.0 / denom, &risk.s2);
                            hessian.scaled_add(frac / denom, &a2);
                            add_outer(&mut hessian, 1.0, mean.view(), mean.view());
                        }
                    }
                }
            }
        }
    }
    debug_assert!(value.is_finite() || beta.iter().any(|b| !b.is_finite()));
    Ok(PartialLikelihood {
        value,
        gradient,
        hessian,
    })
}

/// Log partial likelihood of `beta` under the chosen tie rule.
pub fn log_partial_likelihood(
    data: &SurvivalDataset,
    beta: &[f64],
    tie: TieMethod,
) -> Result<f64, CoxError> {
    evaluate(data, beta, tie, Order::Value).map(|l| l.value)
}

/// Exact gradient and (symmetric, negative semi-definite) Hessian of
/// [`log_partial_likelihood`].
pub fn gradient_and_hessian(
    data: &SurvivalDataset,
    beta: &[f64],
    tie: TieMethod,
) -> Result<(Array1<f64>, Array2<f64>), CoxError> {
    let l = evaluate(data, beta, tie, Order::Hessian)?;
    Ok((l.gradient, symmetrize(l.hessian)))
}

pub(crate) fn full_evaluation(
    data: &SurvivalDataset,
    beta: &[f64],
    tie: TieMethod,
) -> Result<PartialLikelihood, CoxError> {
    let mut l = evaluate(data, beta, tie, Order::Hessian)?;
    l.hessian = symmetrize(l.hessian);
    Ok(l)
}

fn symmetrize(mut h: Array2<f64>) -> Array2<f64> {
    let p = h.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let v = h[[i, j]];
            h[[j, i]] = v;
        }
    }
    h
}

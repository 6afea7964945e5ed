//! Negative log partial likelihood of a risk network, with gradients by
//! backpropagation over the full batch.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::network::{Activation, RiskNetwork};
use super::DeepSurvError;
use crate::dataset::{DimensionMismatch, SurvivalDataset};

/// Gradient with the same shape as one network layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// Risk-set bookkeeping for a fixed set of times and events, computed once
/// and reused across epochs.
#[derive(Debug, Clone)]
pub(crate) struct RiskSets {
    /// Subjects grouped by equal time, groups in increasing time.
    groups: Vec<Vec<usize>>,
    events: Vec<bool>,
    n_events: usize,
}

impl RiskSets {
    pub(crate) fn new(times: &[f64], events: &[bool]) -> Self {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
        let groups = order
            .chunk_by(|&a, &b| times[a] == times[b])
            .map(<[usize]>::to_vec)
            .collect();
        Self {
            groups,
            events: events.to_vec(),
            n_events: events.iter().filter(|&&e| e).count(),
        }
    }

    pub(crate) fn n_events(&self) -> usize {
        self.n_events
    }

    /// Mean negative log partial likelihood (Breslow ties) of the scores `h`
    /// and its derivative with respect to each score.
    pub(crate) fn loss_and_score_gradient(&self, h: &Array1<f64>) -> (f64, Array1<f64>) {
        let d = self.n_events as f64;
        // log Σ_{R(t)} exp(h) per group, swept from the latest time down
        let mut lse = vec![0.0; self.groups.len()];
        let (mut max, mut sum) = (f64::NEG_INFINITY, 0.0);
        for (g, members) in self.groups.iter().enumerate().rev() {
            for &j in members {
                if h[j] > max {
                    sum *= (max - h[j]).exp();
                    max = h[j];
                }
                sum += (h[j] - max).exp();
            }
            lse[g] = max + sum.ln();
        }

        let mut loss = 0.0;
        let mut grad = Array1::<f64>::zeros(h.len());
        // log Σ_{events i, tᵢ ≤ t} exp(−lseᵢ), swept forward in time
        let mut log_acc = f64::NEG_INFINITY;
        for (g, members) in self.groups.iter().enumerate() {
            let k = members.iter().filter(|&&i| self.events[i]).count();
            if k > 0 {
                loss -= members
                    .iter()
                    .filter(|&&i| self.events[i])
                    .map(|&i| h[i] - lse[g])
                    .sum::<f64>();
                log_acc = log_add_exp(log_acc, (k as f64).ln() - lse[g]);
            }
            for &j in members {
                let e = if self.events[j] { 1.0 } else { 0.0 };
                grad[j] = -(e - (h[j] + log_acc).exp()) / d;
            }
        }
        (loss / d, grad)
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn l2_term(net: &RiskNetwork, l2_penalty: f64) -> f64 {
    if l2_penalty == 0.0 {
        return 0.0;
    }
    let sq: f64 = net.layers().iter().map(|l| l.weights.iter().map(|w| w * w).sum::<f64>()).sum();
    0.5 * l2_penalty * sq
}

/// Loss and gradients for a batch whose risk sets are already indexed.
pub(crate) fn loss_and_gradient_indexed(
    net: &RiskNetwork,
    x: ArrayView2<f64>,
    sets: &RiskSets,
    l2_penalty: f64,
) -> (f64, Vec<LayerGradient>) {
    // forward, keeping pre-activations for the backward pass
    let mut inputs: Vec<Array2<f64>> = Vec::with_capacity(net.layers().len());
    let mut pre: Vec<Array2<f64>> = Vec::with_capacity(net.layers().len());
    let mut a = x.to_owned();
    for layer in net.layers() {
        let mut z = a.dot(&layer.weights.t());
        z += &layer.biases;
        let out = match layer.activation {
            Activation::Relu => z.mapv(|v| v.max(0.0)),
            Activation::Identity => z.clone(),
        };
        inputs.push(a);
        pre.push(z);
        a = out;
    }
    let h = a.index_axis_move(Axis(1), 0);
    let (mut loss, score_grad) = sets.loss_and_score_gradient(&h);
    loss += l2_term(net, l2_penalty);

    let n_layers = net.layers().len();
    let mut grads = Vec::with_capacity(n_layers);
    let mut delta = score_grad.insert_axis(Axis(1));
    for k in (0..n_layers).rev() {
        let layer = &net.layers()[k];
        if layer.activation == Activation::Relu {
            ndarray::Zip::from(&mut delta)
                .and(&pre[k])
                .for_each(|d, &z| {
                    if z <= 0.0 {
                        *d = 0.0
                    }
                });
        }
        let mut gw = delta.t().dot(&inputs[k]);
        if l2_penalty != 0.0 {
            gw.scaled_add(l2_penalty, &layer.weights);
        }
        let gb = delta.sum_axis(Axis(0));
        if k > 0 {
            delta = delta.dot(&layer.weights);
        }
        grads.push(LayerGradient { weights: gw, biases: gb });
    }
    grads.reverse();
    (loss, grads)
}

/// `−(1/d)·Σ_{events}[ĥ(xᵢ) − log Σ_{R(tᵢ)} exp ĥ(xⱼ)] + (l2/2)·‖W‖²`,
/// with `d` the number of events and biases left unpenalized, together with
/// its exact gradient for every layer.
pub fn cox_nn_loss_and_gradient(
    net: &RiskNetwork,
    data: &SurvivalDataset,
    l2_penalty: f64,
) -> Result<(f64, Vec<LayerGradient>), DeepSurvError> {
    DimensionMismatch::check(net.input_dim(), data.n_covariates())?;
    let sets = RiskSets::new(data.times(), data.events());
    if sets.n_events() == 0 {
        return Err(DeepSurvError::NoEvents);
    }
    Ok(loss_and_gradient_indexed(net, data.covariates().view(), &sets, l2_penalty))
}

/// Loss only.
pub fn cox_nn_loss(net: &RiskNetwork, data: &SurvivalDataset, l2_penalty: f64) -> Result<f64, DeepSurvError> {
    let h = net.forward_batch(data.covariates().view())?;
    let sets = RiskSets::new(data.times(), data.events());
    if sets.n_events() == 0 {
        return Err(DeepSurvError::NoEvents);
    }
    Ok(sets.loss_and_score_gradient(&h).0 + l2_term(net, l2_penalty))
}

use std::io::Write;

use log::{debug, info};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::loss::{loss_and_gradient_indexed, RiskSets};
use super::network::RiskNetwork;
use super::{DeepSurvError, Optimizer, TrainConfig};
use crate::dataset::SurvivalDataset;
use crate::metrics::concordance_index;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_c_index: Option<f64>,
    pub validation_c_index: Option<f64>,
}

/// Loss and concordance recorded at checkpoints during training.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Columns `epoch,train_loss,train_cindex,val_cindex`; an undefined
    /// c-index is written as an empty field.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "train_loss", "train_cindex", "val_cindex"])?;
        let opt = |v: Option<f64>| v.map(|c| c.to_string()).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.epoch.to_string(),
                r.train_loss.to_string(),
                opt(r.train_c_index),
                opt(r.validation_c_index),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Result of [`train_with_snapshots`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: RiskNetwork,
    pub trace: TrainTrace,
    /// Copies of the network after the requested epochs, in epoch order.
    pub snapshots: Vec<(usize, RiskNetwork)>,
}

/// Full-batch training for `config.n_epochs` epochs; returns the final
/// network (no early stopping) and its trace.
pub fn train(
    train_data: &SurvivalDataset,
    validation: &SurvivalDataset,
    config: &TrainConfig,
) -> Result<(RiskNetwork, TrainTrace), DeepSurvError> {
    let out = train_with_snapshots(train_data, validation, config, &[])?;
    Ok((out.network, out.trace))
}

/// As [`train`], also keeping copies of the network after each epoch listed
/// in `snapshot_epochs`. Nothing in the update rule depends on the epoch
/// budget, so the snapshot after epoch `k` equals the result of a `k`-epoch
/// run with the same configuration.
pub fn train_with_snapshots(
    train_data: &SurvivalDataset,
    validation: &SurvivalDataset,
    config: &TrainConfig,
    snapshot_epochs: &[usize],
) -> Result<TrainOutcome, DeepSurvError> {
    config.validate()?;
    if train_data.variable_names() != validation.variable_names() {
        return Err(DeepSurvError::SchemaMismatch);
    }
    let sets = RiskSets::new(train_data.times(), train_data.events());
    if sets.n_events() == 0 {
        return Err(DeepSurvError::NoEvents);
    }
    let mut net = RiskNetwork::initialize(train_data.n_covariates(), &config.hidden_sizes, config.seed)?;
    net.set_config(config.clone());

    let x = train_data.covariates().view();
    let mut velocity: Vec<(Array2<f64>, Array1<f64>)> = net
        .layers()
        .iter()
        .map(|l| (Array2::zeros(l.weights.dim()), Array1::zeros(l.biases.len())))
        .collect();
    let mut trace = TrainTrace::default();
    let mut snapshots = Vec::new();
    let mut wanted: Vec<usize> = snapshot_epochs.to_vec();
    wanted.sort_unstable();
    wanted.dedup();

    for epoch in 1..=config.n_epochs {
        let (loss, grads) = loss_and_gradient_indexed(&net, x, &sets, config.l2_penalty);
        let finite = loss.is_finite()
            && grads
                .iter()
                .all(|g| g.weights.iter().chain(g.biases.iter()).all(|v| v.is_finite()));
        if !finite {
            return Err(DeepSurvError::DivergedLoss { epoch });
        }
        let lr = config.learning_rate;
        for ((layer, g), (vw, vb)) in net.layers_mut().iter_mut().zip(&grads).zip(velocity.iter_mut()) {
            match config.optimizer {
                Optimizer::GradientDescent => {
                    layer.weights.scaled_add(-lr, &g.weights);
                    layer.biases.scaled_add(-lr, &g.biases);
                }
                Optimizer::Momentum { momentum } => {
                    *vw *= momentum;
                    vw.scaled_add(-lr, &g.weights);
                    *vb *= momentum;
                    vb.scaled_add(-lr, &g.biases);
                    layer.weights += &*vw;
                    layer.biases += &*vb;
                }
            }
        }

        if wanted.binary_search(&epoch).is_ok() {
            snapshots.push((epoch, net.clone()));
        }
        if epoch % config.checkpoint_interval == 0 || epoch == config.n_epochs {
            let record = checkpoint(&net, train_data, validation, &sets, config.l2_penalty, epoch)?;
            debug!(
                "deepsurv: epoch {epoch} loss {:.6} train c {:?} val c {:?}",
                record.train_loss, record.train_c_index, record.validation_c_index
            );
            trace.records.push(record);
        }
    }
    if let Some(r) = trace.last() {
        info!(
            "deepsurv: finished {} epochs, loss {:.6}, train c {:?}, val c {:?}",
            r.epoch, r.train_loss, r.train_c_index, r.validation_c_index
        );
    }
    Ok(TrainOutcome {
        network: net,
        trace,
        snapshots,
    })
}

fn checkpoint(
    net: &RiskNetwork,
    train_data: &SurvivalDataset,
    validation: &SurvivalDataset,
    sets: &RiskSets,
    l2_penalty: f64,
    epoch: usize,
) -> Result<TraceRecord, DeepSurvError> {
    let h_train = net.forward_batch(train_data.covariates().view())?;
    let h_val = net.forward_batch(validation.covariates().view())?;
    let mut loss = sets.loss_and_score_gradient(&h_train).0;
    if l2_penalty != 0.0 {
        let sq: f64 = net.layers().iter().map(|l| l.weights.iter().map(|w| w * w).sum::<f64>()).sum();
        loss += 0.5 * l2_penalty * sq;
    }
    if !loss.is_finite() {
        return Err(DeepSurvError::DivergedLoss { epoch });
    }
    let c = |d: &SurvivalDataset, h: &Array1<f64>| {
        concordance_index(d.times(), d.events(), h.as_slice().expect("contiguous"))
            .ok()
            .map(|r| r.c_index)
    };
    Ok(TraceRecord {
        epoch,
        train_loss: loss,
        train_c_index: c(train_data, &h_train),
        validation_c_index: c(validation, &h_val),
    })
}

//! Neural Cox model: an MLP whose scalar output replaces the linear
//! predictor inside the partial likelihood, trained by full-batch gradient
//! descent.

mod loss;
mod network;
mod train;

pub use loss::{cox_nn_loss, cox_nn_loss_and_gradient, LayerGradient};
pub use network::{Activation, Layer, RiskNetwork};
pub use train::{train, train_with_snapshots, TraceRecord, TrainOutcome, TrainTrace};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DimensionMismatch;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeepSurvError {
    #[error(transparent)]
    DimensionMismatch(#[from] DimensionMismatch),
    #[error("no events in the training data")]
    NoEvents,
    #[error("loss became non-finite at epoch {epoch}; try a lower learning rate")]
    DivergedLoss { epoch: usize },
    #[error("training and validation data have different variables")]
    SchemaMismatch,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    GradientDescent,
    /// Heavy-ball momentum: `v ← μ·v − lr·g`, `θ ← θ + v`.
    Momentum { momentum: f64 },
}

/// Epoch budgets compared in the evaluation harness.
pub const EPOCH_BUDGETS: [usize; 3] = [10_000, 20_000, 25_000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_epochs: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub hidden_sizes: Vec<usize>,
    pub seed: u64,
    pub optimizer: Optimizer,
    #[serde(default = "default_checkpoint_interval")]
    pub checkpoint_interval: usize,
}

fn default_checkpoint_interval() -> usize {
    500
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_epochs: EPOCH_BUDGETS[0],
            learning_rate: 1e-3,
            l2_penalty: 1e-4,
            hidden_sizes: vec![32, 32],
            seed: 0,
            optimizer: Optimizer::Momentum { momentum: 0.9 },
            checkpoint_interval: default_checkpoint_interval(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), DeepSurvError> {
        let bad = |m: &str| Err(DeepSurvError::InvalidConfig(m.into()));
        if self.n_epochs == 0 {
            return bad("n_epochs must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return bad("l2_penalty must be non-negative");
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        if self.checkpoint_interval == 0 {
            return bad("checkpoint_interval must be at least 1");
        }
        if let Optimizer::Momentum { momentum } = self.optimizer {
            if !(0.0..1.0).contains(&momentum) {
                return bad("momentum must lie in [0, 1)");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, split, Baseline, GeneratorSpec, RiskForm};
    use crate::dataset::SurvivalDataset;

    fn tiny(seed: u64) -> (SurvivalDataset, SurvivalDataset) {
        let c = generate_synthetic(&GeneratorSpec {
            n: 120,
            p: 3,
            risk_form: RiskForm::Linear { beta_true: vec![1.0, -0.5, 0.0] },
            baseline: Baseline::Exponential { lambda0: 0.05 },
            censoring_horizon: 30.0,
            extra_censoring_rate: 0.0,
            seed,
        })
        .unwrap();
        split(&c.dataset, 0.75, seed).unwrap()
    }

    fn config(epochs: usize) -> TrainConfig {
        TrainConfig {
            n_epochs: epochs,
            learning_rate: 1e-2,
            l2_penalty: 1e-3,
            hidden_sizes: vec![4],
            seed: 7,
            optimizer: Optimizer::GradientDescent,
            checkpoint_interval: 50,
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (tr, va) = tiny(1);
        let a = train(&tr, &va, &config(200)).unwrap();
        let b = train(&tr, &va, &config(200)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let epochs: Vec<usize> = a.1.records.iter().map(|r| r.epoch).collect();
        assert_eq!(epochs, vec![50, 100, 150, 200]);
    }

    #[test]
    fn snapshots_equal_shorter_runs() {
        let (tr, va) = tiny(2);
        let mut cfg = config(300);
        cfg.optimizer = Optimizer::Momentum { momentum: 0.9 };
        let long = train_with_snapshots(&tr, &va, &cfg, &[120, 250]).unwrap();
        for (epoch, snap) in &long.snapshots {
            let mut short_cfg = cfg.clone();
            short_cfg.n_epochs = *epoch;
            let (short, _) = train(&tr, &va, &short_cfg).unwrap();
            assert_eq!(short.layers(), snap.layers());
        }
    }

    #[test]
    fn small_learning_rate_decreases_loss() {
        let (tr, va) = tiny(3);
        let mut cfg = config(100);
        cfg.learning_rate = 1e-4;
        cfg.checkpoint_interval = 1;
        let (_, trace) = train(&tr, &va, &cfg).unwrap();
        for w in trace.records.windows(2) {
            assert!(w[1].train_loss <= w[0].train_loss);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let (tr, va) = tiny(4);
        let mut cfg = config(500);
        cfg.learning_rate = 1e6;
        cfg.l2_penalty = 0.0;
        assert!(matches!(
            train(&tr, &va, &cfg),
            Err(DeepSurvError::DivergedLoss { .. })
        ));
    }

    #[test]
    fn trace_csv_header() {
        let (tr, va) = tiny(5);
        let (_, trace) = train(&tr, &va, &config(100)).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("epoch,train_loss,train_cindex,val_cindex\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(0);
        assert!(cfg.validate().is_err());
        cfg.n_epochs = 1;
        cfg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
    }
}

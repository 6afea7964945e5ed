//! Survival modeling for 30-day readmission: univariate Cox screening,
//! multivariate Cox regression, a neural Cox risk network, their ensemble,
//! and concordance-based evaluation, plus a synthetic cohort generator.

pub mod cox;
pub mod dataset;
mod linalg;
pub mod metrics;
pub mod normal;
pub mod data;
pub mod rng;
pub mod screening;
pub mod deepsurv;
pub mod ensemble;

pub use cox::{CoxFit, TieMethod};
pub use dataset::{DatasetError, DimensionMismatch, RawDataset, RiskModel, SurvivalDataset};
pub use deepsurv::{RiskNetwork, TrainConfig};
pub use ensemble::{EnsembleMode, EnsembleModel, EvaluationReport};
pub use screening::ScreeningReport;

//! The composite readmission model and its evaluation harness.
//!
//! A fitted [`EnsembleModel`] chains univariate screening, a joint Cox fit
//! on the surviving variables, and a risk network trained on those same
//! variables after standardization. It scores either through the network
//! alone ([`EnsembleMode::Pipeline`]) or by averaging the rank-normalized
//! Cox and network scores ([`EnsembleMode::AverageScore`]).

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cox::{CoxConfig, CoxFit};
use crate::data::{standardize, DataError, Standardization};
use crate::dataset::{DimensionMismatch, RiskModel, SurvivalDataset};
use crate::deepsurv::{self, DeepSurvError, RiskNetwork, TrainConfig, TrainTrace};
use crate::metrics::concordance_index;
use crate::screening::{self, ScreeningError, ScreeningReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error(transparent)]
    DimensionMismatch(#[from] DimensionMismatch),
    #[error("variable `{0}` is not present in the data")]
    UnknownVariable(String),
    #[error("training and validation data have different variables")]
    SchemaMismatch,
    #[error("screening: {0}")]
    Screening(#[from] ScreeningError),
    #[error("network: {0}")]
    Network(#[from] DeepSurvError),
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("malformed model bundle: {0}")]
    MalformedBundle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleMode {
    #[default]
    Pipeline,
    AverageScore,
}

impl std::str::FromStr for EnsembleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pipeline" => Ok(Self::Pipeline),
            "average" | "average_score" => Ok(Self::AverageScore),
            other => Err(format!("unknown ensemble mode `{other}` (expected pipeline or average)")),
        }
    }
}

impl fmt::Display for EnsembleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pipeline => "pipeline",
            Self::AverageScore => "average",
        })
    }
}

/// Empirical quantile of `score` within an ascending `reference`, linearly
/// interpolated between neighbouring order statistics; always in `[0, 1]`.
pub fn rank_normalize(reference: &[f64], score: f64) -> f64 {
    let m = reference.len();
    match m {
        0 => 0.5,
        1 => match score.total_cmp(&reference[0]) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 1.0,
        },
        _ => {
            if score <= reference[0] {
                return 0.0;
            }
            if score >= reference[m - 1] {
                return 1.0;
            }
            // reference[k] <= score < reference[k + 1]
            let k = reference.partition_point(|&r| r <= score) - 1;
            let (lo, hi) = (reference[k], reference[k + 1]);
            let frac = if hi > lo { (score - lo) / (hi - lo) } else { 0.0 };
            ((k as f64 + frac) / (m - 1) as f64).clamp(0.0, 1.0)
        }
    }
}

/// A model restricted to a subset of the columns of a wider row.
#[derive(Debug, Clone, Copy)]
pub struct ColumnSubset<'a, M> {
    pub columns: &'a [usize],
    pub n_inputs: usize,
    pub model: &'a M,
}

impl<M: RiskModel> RiskModel for ColumnSubset<'_, M> {
    fn input_dim(&self) -> usize {
        self.n_inputs
    }

    fn log_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        DimensionMismatch::check(self.n_inputs, x.len())?;
        let sub: Vec<f64> = self.columns.iter().map(|&c| x[c]).collect();
        self.model.log_risk(&sub)
    }
}

/// Sorted training-set scores of each component, used for rank
/// normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScores {
    pub cox: Vec<f64>,
    pub network: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    /// Full variable schema the model scores.
    pub input_variables: Vec<String>,
    pub screening: ScreeningReport,
    /// Positions of the selected variables within `input_variables`.
    pub selected_columns: Vec<usize>,
    pub cox: CoxFit,
    pub network: RiskNetwork,
    pub mode: EnsembleMode,
    /// Training-split statistics of the selected variables.
    pub standardization: Standardization,
    pub reference_scores: ReferenceScores,
}

impl EnsembleModel {
    pub fn n_selected(&self) -> usize {
        self.selected_columns.len()
    }

    pub fn with_mode(&self, mode: EnsembleMode) -> Self {
        Self { mode, ..self.clone() }
    }

    /// Check that `names` is exactly the schema this model was fitted on.
    pub fn check_schema(&self, names: &[String]) -> Result<(), EnsembleError> {
        for v in &self.input_variables {
            if !names.contains(v) {
                return Err(EnsembleError::UnknownVariable(v.clone()));
            }
        }
        if names != self.input_variables.as_slice() {
            return Err(EnsembleError::SchemaMismatch);
        }
        Ok(())
    }

    fn selected_row(&self, x: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        DimensionMismatch::check(self.input_variables.len(), x.len())?;
        Ok(self.selected_columns.iter().map(|&c| x[c]).collect())
    }

    /// Network log-risk on the standardized selected sub-row.
    pub fn network_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        let z = self.standardization.transform_row(&self.selected_row(x)?)?;
        self.network.forward_risk(&z)
    }

    /// Cox log-risk of the selected variables.
    pub fn cox_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        self.cox.predict_risk(&self.selected_row(x)?)
    }

    /// The joint Cox component as a model over the full schema.
    pub fn cox_model(&self) -> ColumnSubset<'_, CoxFit> {
        ColumnSubset {
            columns: &self.selected_columns,
            n_inputs: self.input_variables.len(),
            model: &self.cox,
        }
    }

    /// Combined score of a full covariate row.
    pub fn ensemble_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        match self.mode {
            EnsembleMode::Pipeline => self.network_risk(x),
            EnsembleMode::AverageScore => {
                let q_cox = rank_normalize(&self.reference_scores.cox, self.cox_risk(x)?);
                let q_net = rank_normalize(&self.reference_scores.network, self.network_risk(x)?);
                Ok(0.5 * (q_cox + q_net))
            }
        }
    }
}

impl RiskModel for EnsembleModel {
    fn input_dim(&self) -> usize {
        self.input_variables.len()
    }

    fn log_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        self.ensemble_risk(x)
    }
}

/// A risk network trained on every standardized covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepSurvModel {
    pub standardization: Standardization,
    pub network: RiskNetwork,
}

impl RiskModel for DeepSurvModel {
    fn input_dim(&self) -> usize {
        self.network.input_dim()
    }

    fn log_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        let z = self.standardization.transform_row(x)?;
        self.network.forward_risk(&z)
    }
}

fn check_same_schema(a: &SurvivalDataset, b: &SurvivalDataset) -> Result<(), EnsembleError> {
    if a.variable_names() != b.variable_names() {
        return Err(EnsembleError::SchemaMismatch);
    }
    Ok(())
}

/// Standardize with training statistics and train a network on all
/// covariates.
pub fn fit_deepsurv(
    train: &SurvivalDataset,
    validation: &SurvivalDataset,
    config: &TrainConfig,
) -> Result<(DeepSurvModel, TrainTrace), EnsembleError> {
    check_same_schema(train, validation)?;
    let (z_train, stats) = standardize(train, None)?;
    let (z_val, _) = standardize(validation, Some(&stats))?;
    let (network, trace) = deepsurv::train(&z_train, &z_val, config)?;
    Ok((
        DeepSurvModel {
            standardization: stats,
            network,
        },
        trace,
    ))
}

/// Screen on the training split, refit jointly, standardize the selected
/// variables with training statistics, and train the network on them.
pub fn fit_ensemble(
    train: &SurvivalDataset,
    validation: &SurvivalDataset,
    alpha: f64,
    cox_config: &CoxConfig,
    train_config: &TrainConfig,
    mode: EnsembleMode,
) -> Result<(EnsembleModel, TrainTrace), EnsembleError> {
    let (mut models, trace) = fit_ensemble_budgets(
        train,
        validation,
        alpha,
        cox_config,
        train_config,
        mode,
        &[train_config.n_epochs],
    )?;
    Ok((models.pop().expect("one budget"), trace))
}

/// As [`fit_ensemble`], returning one model per epoch budget from a single
/// training run of `max(budgets)` epochs. Each model equals what a separate
/// run with that budget would produce.
pub fn fit_ensemble_budgets(
    train: &SurvivalDataset,
    validation: &SurvivalDataset,
    alpha: f64,
    cox_config: &CoxConfig,
    train_config: &TrainConfig,
    mode: EnsembleMode,
    budgets: &[usize],
) -> Result<(Vec<EnsembleModel>, TrainTrace), EnsembleError> {
    check_same_schema(train, validation)?;
    let report = screening::univariate_screen(train, alpha, cox_config)?;
    let (screening, cox) = screening::multivariate_refit(train, &report, cox_config)?;
    let selected_columns = screening::selected_columns(train, &screening)?;

    let sel_train = train.select_columns(&selected_columns);
    let sel_val = validation.select_columns(&selected_columns);
    let (z_train, stats) = standardize(&sel_train, None)?;
    let (z_val, _) = standardize(&sel_val, Some(&stats))?;

    let max_budget = budgets.iter().copied().max().unwrap_or(train_config.n_epochs);
    let config = TrainConfig {
        n_epochs: max_budget,
        ..train_config.clone()
    };
    let outcome = deepsurv::train_with_snapshots(&z_train, &z_val, &config, budgets)?;

    let mut cox_scores = cox.score_dataset(&sel_train)?;
    cox_scores.sort_by(f64::total_cmp);

    let models = budgets
        .iter()
        .map(|&b| {
            let mut network = if b == max_budget {
                outcome.network.clone()
            } else {
                outcome
                    .snapshots
                    .iter()
                    .find(|(e, _)| *e == b)
                    .map(|(_, n)| n.clone())
                    .expect("snapshot recorded for every budget")
            };
            network.set_config(TrainConfig {
                n_epochs: b,
                ..train_config.clone()
            });
            let mut net_scores = network.forward_batch(z_train.covariates().view())?.to_vec();
            net_scores.sort_by(f64::total_cmp);
            Ok(EnsembleModel {
                input_variables: train.variable_names().to_vec(),
                screening: screening.clone(),
                selected_columns: selected_columns.clone(),
                cox: cox.clone(),
                network,
                mode,
                standardization: stats.clone(),
                reference_scores: ReferenceScores {
                    cox: cox_scores.clone(),
                    network: net_scores,
                },
            })
        })
        .collect::<Result<Vec<_>, EnsembleError>>()?;
    Ok((models, outcome.trace))
}

/// Harrell's c-index of `model` on `data`, or `None` when there are no
/// comparable pairs.
pub fn model_c_index(model: &dyn RiskModel, data: &SurvivalDataset) -> Result<Option<f64>, DimensionMismatch> {
    let risks = model.score_dataset(data)?;
    Ok(concordance_index(data.times(), data.events(), &risks)
        .ok()
        .map(|r| r.c_index))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub cox: Option<f64>,
    pub deepsurv: Option<f64>,
    pub ensemble: Option<f64>,
}

/// Training and validation concordance of the three models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_epochs: usize,
    pub seed: u64,
    pub mode: EnsembleMode,
    pub training: EvaluationRow,
    pub validation: EvaluationRow,
}

impl EvaluationReport {
    pub fn column_headers(&self) -> [String; 4] {
        [
            "Dataset".into(),
            "CoxPH".into(),
            "DeepSurv".into(),
            format!("Ensembled(nEpochs={})", self.n_epochs),
        ]
    }

    fn rows(&self) -> [(&'static str, &EvaluationRow); 2] {
        [("Training", &self.training), ("Validation", &self.validation)]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.column_headers())?;
        let cell = |v: Option<f64>| v.map(|c| c.to_string()).unwrap_or_default();
        for (name, row) in self.rows() {
            w.write_record([name.to_string(), cell(row.cox), cell(row.deepsurv), cell(row.ensemble)])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let headers = self.column_headers();
        let cell = |v: Option<f64>| v.map(|c| format!("{c:.4}")).unwrap_or_else(|| "-".into());
        let body: Vec<[String; 4]> = self
            .rows()
            .iter()
            .map(|(name, r)| [name.to_string(), cell(r.cox), cell(r.deepsurv), cell(r.ensemble)])
            .collect();
        let widths: Vec<usize> = (0..4)
            .map(|c| body.iter().map(|r| r[c].len()).chain([headers[c].len()]).max().unwrap())
            .collect();
        let line = |f: &mut fmt::Formatter<'_>, cells: &[String; 4]| {
            writeln!(
                f,
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}",
                cells[0],
                cells[1],
                cells[2],
                cells[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            )
        };
        line(f, &headers)?;
        for r in &body {
            line(f, r)?;
        }
        writeln!(f, "(mode = {}, seed = {})", self.mode, self.seed)
    }
}

/// Fill the model × split concordance grid. Each model scores full rows of
/// `train` and `validation`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    cox: &dyn RiskModel,
    deepsurv: &dyn RiskModel,
    ensemble: &dyn RiskModel,
    train: &SurvivalDataset,
    validation: &SurvivalDataset,
    n_epochs: usize,
    seed: u64,
    mode: EnsembleMode,
) -> Result<EvaluationReport, EnsembleError> {
    check_same_schema(train, validation)?;
    let row = |d: &SurvivalDataset| -> Result<EvaluationRow, EnsembleError> {
        Ok(EvaluationRow {
            cox: model_c_index(cox, d)?,
            deepsurv: model_c_index(deepsurv, d)?,
            ensemble: model_c_index(ensemble, d)?,
        })
    };
    Ok(EvaluationReport {
        n_epochs,
        seed,
        mode,
        training: row(train)?,
        validation: row(validation)?,
    })
}

/// Everything needed to rebuild an [`EvaluationReport`]: the ensemble and
/// the all-covariate network it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub ensemble: EnsembleModel,
    pub deepsurv: DeepSurvModel,
    /// Seed of the train/validation split and of network initialization.
    pub seed: u64,
    /// Training fraction of the split the models were fitted on.
    pub split_fraction: f64,
}

impl ModelBundle {
    pub fn n_epochs(&self) -> usize {
        self.ensemble.network.config().map_or(0, |c| c.n_epochs)
    }

    pub fn evaluate(&self, train: &SurvivalDataset, validation: &SurvivalDataset) -> Result<EvaluationReport, EnsembleError> {
        self.ensemble.check_schema(train.variable_names())?;
        evaluate(
            &self.ensemble.cox_model(),
            &self.deepsurv,
            &self.ensemble,
            train,
            validation,
            self.n_epochs(),
            self.seed,
            self.ensemble.mode,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, EnsembleError> {
        serde_json::from_str(s).map_err(|e| EnsembleError::MalformedBundle(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, split, Baseline, GeneratorSpec, RiskForm};
    use crate::deepsurv::Optimizer;

    fn splits(seed: u64) -> (SurvivalDataset, SurvivalDataset) {
        let c = generate_synthetic(&GeneratorSpec {
            n: 300,
            p: 5,
            risk_form: RiskForm::Linear { beta_true: vec![0.8, -0.6, 0.0, 0.0, 0.4] },
            baseline: Baseline::Exponential { lambda0: 0.03 },
            censoring_horizon: 30.0,
            extra_censoring_rate: 0.0,
            seed,
        })
        .unwrap();
        split(&c.dataset, 0.8, seed).unwrap()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            n_epochs: 200,
            learning_rate: 1e-2,
            l2_penalty: 1e-3,
            hidden_sizes: vec![4],
            seed: 3,
            optimizer: Optimizer::GradientDescent,
            checkpoint_interval: 100,
        }
    }

    #[test]
    fn rank_normalize_properties() {
        let r = [1.0, 2.0, 2.0, 4.0, 5.0];
        assert_eq!(rank_normalize(&r, 0.0), 0.0);
        assert_eq!(rank_normalize(&r, 9.0), 1.0);
        assert_eq!(rank_normalize(&r, 1.0), 0.0);
        assert_eq!(rank_normalize(&r, 3.0), (2.0 + 0.5) / 4.0);
        let mut last = 0.0;
        for k in 0..100 {
            let q = rank_normalize(&r, k as f64 * 0.06);
            assert!((0.0..=1.0).contains(&q) && q >= last);
            last = q;
        }
        assert_eq!(rank_normalize(&[3.0], 3.0), 0.5);
    }

    #[test]
    fn pipeline_equals_network_on_standardized_subrow() {
        let (tr, va) = splits(1);
        let (m, _) = fit_ensemble(&tr, &va, 0.05, &CoxConfig::default(), &small_config(), EnsembleMode::Pipeline).unwrap();
        assert_eq!(m.network.input_dim(), m.n_selected());
        assert_eq!(m.cox.n_coefficients(), m.n_selected());
        for s in va.subjects().take(10) {
            let x = s.covariate_row.to_vec();
            let sub: Vec<f64> = m.selected_columns.iter().map(|&c| x[c]).collect();
            let z = m.standardization.transform_row(&sub).unwrap();
            assert_eq!(m.ensemble_risk(&x).unwrap(), m.network.forward_risk(&z).unwrap());
        }
        assert!(m.ensemble_risk(&[0.0; 2]).is_err());
    }

    #[test]
    fn pipeline_ignores_unselected_variables() {
        let (tr, va) = splits(2);
        let (m, _) = fit_ensemble(&tr, &va, 0.05, &CoxConfig::default(), &small_config(), EnsembleMode::Pipeline).unwrap();
        let unselected: Vec<usize> = (0..5).filter(|c| !m.selected_columns.contains(c)).collect();
        assert!(!unselected.is_empty());
        for s in va.subjects().take(10) {
            let x = s.covariate_row.to_vec();
            let mut y = x.clone();
            for &c in &unselected {
                y[c] = 3.5 * y[c] - 20.0;
            }
            assert_eq!(m.ensemble_risk(&x).unwrap(), m.ensemble_risk(&y).unwrap());
        }
    }

    #[test]
    fn modes_share_screening_and_cox() {
        let (tr, va) = splits(3);
        let cfg = small_config();
        let (a, _) = fit_ensemble(&tr, &va, 0.05, &CoxConfig::default(), &cfg, EnsembleMode::Pipeline).unwrap();
        let (b, _) = fit_ensemble(&tr, &va, 0.05, &CoxConfig::default(), &cfg, EnsembleMode::AverageScore).unwrap();
        assert_eq!(a.screening, b.screening);
        assert_eq!(a.cox, b.cox);
        assert_eq!(a.network, b.network);
        for s in va.subjects() {
            let q = b.ensemble_risk(s.covariate_row.as_slice().unwrap()).unwrap();
            assert!((0.0..=1.0).contains(&q));
        }
    }

    #[test]
    fn average_mode_agrees_when_network_mirrors_cox() {
        let (tr, va) = splits(4);
        let (m, _) = fit_ensemble(&tr, &va, 1.0, &CoxConfig::default(), &small_config(), EnsembleMode::AverageScore).unwrap();
        assert_eq!(m.n_selected(), 5);
        // network(z) = Σ βₖσₖzₖ = x·β − const, a monotone image of the Cox score
        let weights: Vec<f64> = m
            .cox
            .beta
            .iter()
            .zip(&m.standardization.std_devs)
            .map(|(b, s)| b * s)
            .collect();
        let mut mirrored = m.clone();
        mirrored.network = RiskNetwork::linear(&weights);
        let sub_train = tr.select_columns(&m.selected_columns);
        let (z, _) = standardize(&sub_train, Some(&m.standardization)).unwrap();
        let mut net_scores = mirrored.network.forward_batch(z.covariates().view()).unwrap().to_vec();
        net_scores.sort_by(f64::total_cmp);
        mirrored.reference_scores.network = net_scores;
        for s in va.subjects() {
            let x = s.covariate_row.to_vec();
            let q_cox = rank_normalize(&mirrored.reference_scores.cox, mirrored.cox_risk(&x).unwrap());
            let q_net = rank_normalize(&mirrored.reference_scores.network, mirrored.network_risk(&x).unwrap());
            assert!((q_cox - q_net).abs() < 1e-9);
            assert!((mirrored.ensemble_risk(&x).unwrap() - q_cox).abs() < 1e-9);
        }
    }

    struct Constant(usize);

    impl RiskModel for Constant {
        fn input_dim(&self) -> usize {
            self.0
        }
        fn log_risk(&self, _: &[f64]) -> Result<f64, DimensionMismatch> {
            Ok(1.0)
        }
    }

    #[test]
    fn evaluation_grid() {
        let (tr, va) = splits(5);
        let cfg = small_config();
        let (m, _) = fit_ensemble(&tr, &va, 0.05, &CoxConfig::default(), &cfg, EnsembleMode::Pipeline).unwrap();
        let (ds, _) = fit_deepsurv(&tr, &va, &cfg).unwrap();
        let constant = Constant(5);
        let report = evaluate(&m.cox_model(), &ds, &constant, &tr, &va, 200, 5, EnsembleMode::Pipeline).unwrap();
        assert_eq!(report.training.ensemble, Some(0.5));
        assert_eq!(report.validation.ensemble, Some(0.5));
        for c in [report.training.cox, report.validation.deepsurv].into_iter().flatten() {
            assert!((0.0..=1.0).contains(&c));
        }
        let again = evaluate(&m.cox_model(), &ds, &constant, &tr, &va, 200, 5, EnsembleMode::Pipeline).unwrap();
        assert_eq!(report, again);

        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Dataset,CoxPH,DeepSurv,Ensembled(nEpochs=200)");
        assert!(lines[1].starts_with("Training,") && lines[2].starts_with("Validation,"));
        assert_eq!(report.to_string().lines().count(), 4);
    }

    #[test]
    fn bundle_round_trip_and_schema_check() {
        let (tr, va) = splits(6);
        let cfg = small_config();
        let (m, _) = fit_ensemble(&tr, &va, 0.05, &CoxConfig::default(), &cfg, EnsembleMode::AverageScore).unwrap();
        let (ds, _) = fit_deepsurv(&tr, &va, &cfg).unwrap();
        let bundle = ModelBundle { ensemble: m, deepsurv: ds, seed: 6, split_fraction: 0.8 };
        let back = ModelBundle::from_json(&bundle.to_json()).unwrap();
        assert_eq!(back, bundle);
        assert_eq!(back.evaluate(&tr, &va).unwrap(), bundle.evaluate(&tr, &va).unwrap());
        let renamed = tr.select_columns(&[0, 1, 2, 3]);
        assert!(matches!(
            bundle.ensemble.check_schema(renamed.variable_names()),
            Err(EnsembleError::UnknownVariable(_))
        ));
    }

    #[test]
    fn budgets_match_separate_runs() {
        let (tr, va) = splits(7);
        let cfg = small_config();
        let (models, _) = fit_ensemble_budgets(&tr, &va, 0.05, &CoxConfig::default(), &cfg, EnsembleMode::Pipeline, &[50, 120]).unwrap();
        for (m, b) in models.iter().zip([50, 120]) {
            let single = TrainConfig { n_epochs: b, ..cfg.clone() };
            let (alone, _) = fit_ensemble(&tr, &va, 0.05, &CoxConfig::default(), &single, EnsembleMode::Pipeline).unwrap();
            assert_eq!(m, &alone);
        }
    }
}

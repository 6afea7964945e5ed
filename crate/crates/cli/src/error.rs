use hazardbench::cox::CoxError;
use hazardbench::data::DataError;
use hazardbench::deepsurv::DeepSurvError;
use hazardbench::ensemble::EnsembleError;
use hazardbench::metrics::MetricsError;
use hazardbench::screening::ScreeningError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("cox: {0}")]
    Cox(#[from] CoxError),
    #[error("screening: {0}")]
    Screening(#[from] ScreeningError),
    #[error("deepsurv: {0}")]
    DeepSurv(#[from] DeepSurvError),
    #[error("ensemble: {0}")]
    Ensemble(#[from] EnsembleError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
}

fn cox_is_numerical(e: &CoxError) -> bool {
    matches!(e, CoxError::SingularHessian { .. })
}

fn deepsurv_is_numerical(e: &DeepSurvError) -> bool {
    matches!(e, DeepSurvError::DivergedLoss { .. })
}

fn screening_is_numerical(e: &ScreeningError) -> bool {
    matches!(e, ScreeningError::Fit(c) if cox_is_numerical(c))
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        let numerical = match self {
            Self::Cox(e) => cox_is_numerical(e),
            Self::DeepSurv(e) => deepsurv_is_numerical(e),
            Self::Screening(e) => screening_is_numerical(e),
            Self::Ensemble(EnsembleError::Network(e)) => deepsurv_is_numerical(e),
            Self::Ensemble(EnsembleError::Screening(e)) => screening_is_numerical(e),
            _ => false,
        };
        if numerical {
            2
        } else {
            1
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Data(DataError::from(e))
    }
}

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{DeepSurvError, TrainConfig};
use crate::dataset::{DimensionMismatch, RiskModel};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }
}

/// Dense layer computing `activation(W·x + b)`; `weights` is
/// `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }
}

/// Multilayer perceptron producing a scalar log-risk. Hidden layers use
/// ReLU; the last layer has a single identity output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkDocument", try_from = "NetworkDocument")]
pub struct RiskNetwork {
    input_dim: usize,
    layers: Vec<Layer>,
    seed: Option<u64>,
    config: Option<TrainConfig>,
}

impl RiskNetwork {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self, DeepSurvError> {
        let Some(last) = layers.last() else {
            return Err(DeepSurvError::InvalidNetwork("network needs at least one layer".into()));
        };
        if last.outputs() != 1 || last.activation != Activation::Identity {
            return Err(DeepSurvError::InvalidNetwork(
                "final layer must have one output with identity activation".into(),
            ));
        }
        let mut width = input_dim;
        for (k, layer) in layers.iter().enumerate() {
            if layer.inputs() != width {
                return Err(DeepSurvError::InvalidNetwork(format!(
                    "layer {k} expects {} inputs but receives {width}",
                    layer.inputs()
                )));
            }
            if layer.biases.len() != layer.outputs() {
                return Err(DeepSurvError::InvalidNetwork(format!(
                    "layer {k} has {} biases for {} outputs",
                    layer.biases.len(),
                    layer.outputs()
                )));
            }
            if layer.weights.iter().chain(layer.biases.iter()).any(|v| !v.is_finite()) {
                return Err(DeepSurvError::InvalidNetwork(format!("layer {k} has non-finite parameters")));
            }
            width = layer.outputs();
        }
        Ok(Self {
            input_dim,
            layers,
            seed: None,
            config: None,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero
    /// biases, drawn layer by layer in row-major order.
    pub fn initialize(input_dim: usize, hidden_sizes: &[usize], seed: u64) -> Result<Self, DeepSurvError> {
        if input_dim == 0 || hidden_sizes.contains(&0) {
            return Err(DeepSurvError::InvalidNetwork("layer widths must be positive".into()));
        }
        let mut rng = rng::seeded(seed);
        let mut widths = vec![input_dim];
        widths.extend_from_slice(hidden_sizes);
        widths.push(1);
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-r..=r));
                Layer {
                    weights,
                    biases: Array1::zeros(fan_out),
                    activation: if k == last { Activation::Identity } else { Activation::Relu },
                }
            })
            .collect();
        let mut net = Self::new(input_dim, layers)?;
        net.seed = Some(seed);
        Ok(net)
    }

    /// Single identity layer `x·w`, the linear Cox risk.
    pub fn linear(weights: &[f64]) -> Self {
        let layer = Layer {
            weights: Array2::from_shape_vec((1, weights.len()), weights.to_vec()).expect("1 × p"),
            biases: Array1::zeros(1),
            activation: Activation::Identity,
        };
        Self::new(weights.len(), vec![layer]).expect("valid linear layer")
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn config(&self) -> Option<&TrainConfig> {
        self.config.as_ref()
    }

    pub(crate) fn set_config(&mut self, config: TrainConfig) {
        self.seed = Some(config.seed);
        self.config = Some(config);
    }

    pub fn n_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Log-risk of one covariate row.
    pub fn forward_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        DimensionMismatch::check(self.input_dim, x.len())?;
        let mut a: Vec<f64> = x.to_vec();
        for layer in &self.layers {
            a = layer
                .weights
                .outer_iter()
                .zip(layer.biases.iter())
                .map(|(w, &b)| {
                    let z = w.iter().zip(&a).map(|(wi, ai)| wi * ai).sum::<f64>() + b;
                    layer.activation.apply(z)
                })
                .collect();
        }
        Ok(a[0])
    }

    /// Log-risks for every row of `x`.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, DimensionMismatch> {
        DimensionMismatch::check(self.input_dim, x.ncols())?;
        let mut a: Array2<f64> = x.to_owned();
        for layer in &self.layers {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.biases;
            if layer.activation == Activation::Relu {
                z.mapv_inplace(|v| v.max(0.0));
            }
            a = z;
        }
        Ok(a.index_axis_move(Axis(1), 0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DeepSurvError> {
        serde_json::from_str(s).map_err(|e| DeepSurvError::InvalidNetwork(e.to_string()))
    }
}

impl RiskModel for RiskNetwork {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn log_risk(&self, x: &[f64]) -> Result<f64, DimensionMismatch> {
        self.forward_risk(x)
    }
}

#[derive(Serialize, Deserialize)]
struct LayerDocument {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct NetworkDocument {
    input_dim: usize,
    layers: Vec<LayerDocument>,
    seed: Option<u64>,
    config: Option<TrainConfig>,
}

impl From<RiskNetwork> for NetworkDocument {
    fn from(net: RiskNetwork) -> Self {
        Self {
            input_dim: net.input_dim,
            layers: net
                .layers
                .into_iter()
                .map(|l| LayerDocument {
                    rows: l.weights.nrows(),
                    cols: l.weights.ncols(),
                    weights: l.weights.iter().copied().collect(),
                    biases: l.biases.to_vec(),
                    activation: l.activation,
                })
                .collect(),
            seed: net.seed,
            config: net.config,
        }
    }
}

impl TryFrom<NetworkDocument> for RiskNetwork {
    type Error = DeepSurvError;

    fn try_from(doc: NetworkDocument) -> Result<Self, Self::Error> {
        let layers = doc
            .layers
            .into_iter()
            .map(|l| {
                let weights = Array2::from_shape_vec((l.rows, l.cols), l.weights)
                    .map_err(|e| DeepSurvError::InvalidNetwork(e.to_string()))?;
                Ok(Layer {
                    weights,
                    biases: Array1::from(l.biases),
                    activation: l.activation,
                })
            })
            .collect::<Result<Vec<_>, DeepSurvError>>()?;
        let mut net = RiskNetwork::new(doc.input_dim, layers)?;
        net.seed = doc.seed;
        net.config = doc.config;
        Ok(net)
    }
}

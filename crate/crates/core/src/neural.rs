//! Fully-connected and locally-connected binary network classifiers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    self, Activation, LayerSpec, LossKind, Network, NetworkSpec, TrainConfig,
};
use crate::spectra::{Label, SpectraSet, MODEL_WIDTH};

/// Number of locally-connected receptive fields in the first hidden layer.
pub const LC_FIELDS: usize = 10;
pub const FIRST_LAYER_L1: f64 = 1e-5;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const PAPER_BATCH_SIZE: usize = 5;
pub const PAPER_EPOCHS: usize = 100_000;

/// Dense `width→10` (tanh, L1), dense `10→5` (ReLU), dense `5→1` (sigmoid).
pub fn fcnn_spec_for(width: usize) -> Result<NetworkSpec> {
    NetworkSpec::new(vec![
        LayerSpec::dense(width, 10, Activation::Tanh).with_l1(FIRST_LAYER_L1),
        LayerSpec::dense(10, 5, Activation::Relu),
        LayerSpec::dense(5, 1, Activation::Sigmoid),
    ])
}

/// Locally-connected `width→fields` (tanh, L1), dense `fields→5` (ReLU),
/// dense `5→1` (sigmoid).
pub fn lcnn_spec_for(width: usize, fields: usize) -> Result<NetworkSpec> {
    NetworkSpec::new(vec![
        LayerSpec::locally_connected(width, fields, Activation::Tanh)?.with_l1(FIRST_LAYER_L1),
        LayerSpec::dense(fields, 5, Activation::Relu),
        LayerSpec::dense(5, 1, Activation::Sigmoid),
    ])
}

pub fn fcnn_spec() -> NetworkSpec {
    fcnn_spec_for(MODEL_WIDTH).expect("static architecture")
}

pub fn lcnn_spec() -> NetworkSpec {
    lcnn_spec_for(MODEL_WIDTH, LC_FIELDS).expect("static architecture")
}

/// Batch 5, Adam, binary cross-entropy; pass the epoch budget explicitly.
pub fn classifier_train_config(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig::new(LossKind::BinaryCrossEntropy, epochs, PAPER_BATCH_SIZE, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryNetClassifier {
    spec: NetworkSpec,
    network: Option<Network>,
    threshold: f64,
}

impl BinaryNetClassifier {
    /// An untrained classifier; the spec must end in one sigmoid node.
    pub fn new(spec: NetworkSpec, threshold: f64) -> Result<Self> {
        if spec.output_width() != 1 || spec.output_activation() != Activation::Sigmoid {
            return Err(Error::Shape(
                "binary classifier needs a single sigmoid output node".into(),
            ));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Argument(format!("threshold {threshold} outside (0, 1)")));
        }
        Ok(Self {
            spec,
            network: None,
            threshold,
        })
    }

    pub fn from_network(network: Network, threshold: f64) -> Result<Self> {
        let mut clf = Self::new(network.spec().clone(), threshold)?;
        clf.network = Some(network);
        Ok(clf)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn network(&self) -> Option<&Network> {
        self.network.as_ref()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn input_width(&self) -> usize {
        self.spec.input_width()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let net = self
            .network
            .as_ref()
            .ok_or_else(|| Error::State("classifier has not been trained".into()))?;
        Ok(net.forward(x)?[0])
    }

    /// Positive iff the network output reaches the threshold.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        let score = self.score(x)?;
        let label = if score >= self.threshold {
            Label::Positive
        } else {
            Label::Negative
        };
        Ok((label, score))
    }

    pub fn accuracy(&self, set: &SpectraSet) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::Argument("accuracy of an empty set".into()));
        }
        let mut correct = 0;
        for s in set.iter() {
            if self.predict(s.intensities())?.0 == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / set.len() as f64)
    }
}

/// Trains the network to output 1 for positive and 0 for negative spectra.
pub fn fit_binary(spec: &NetworkSpec, train: &SpectraSet, cfg: &TrainConfig) -> Result<BinaryNetClassifier> {
    let clf = BinaryNetClassifier::new(spec.clone(), DEFAULT_THRESHOLD)?;
    if train.count(Label::Positive) == 0 || train.count(Label::Negative) == 0 {
        return Err(Error::Argument("binary training needs both classes".into()));
    }
    if train.width() != spec.input_width() {
        return Err(Error::Shape(format!(
            "training spectra have width {}, network expects {}",
            train.width(),
            spec.input_width()
        )));
    }
    let cfg = TrainConfig {
        loss: LossKind::BinaryCrossEntropy,
        ..*cfg
    };
    let targets: Vec<[f64; 1]> = train.iter().map(|s| [s.label.target()]).collect();
    let target_refs: Vec<&[f64]> = targets.iter().map(|t| t.as_slice()).collect();
    let trained = nn::train(spec, &train.features(), &target_refs, &cfg)?;
    Ok(BinaryNetClassifier {
        network: Some(trained.network),
        ..clf
    })
}

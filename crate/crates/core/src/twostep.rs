//! Outlier gate followed by a binary classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{fit_binary, BinaryNetClassifier};
use crate::nn::{NetworkSpec, TrainConfig};
use crate::occ::{fit_gate, AutoencoderSpec, GateConfig, GateDecision, GateMode, ReconstructionGate};
use crate::spectra::{Label, SpectraSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Flagged by the gate and labeled negative without consulting the
    /// classifier.
    GateNegative,
    ClassifierPositive,
    ClassifierNegative,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::GateNegative => "gate_negative",
            Route::ClassifierPositive => "classifier_positive",
            Route::ClassifierNegative => "classifier_negative",
        }
    }

    pub fn label(self) -> Label {
        match self {
            Route::ClassifierPositive => Label::Positive,
            Route::GateNegative | Route::ClassifierNegative => Label::Negative,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteTally {
    pub gate_negative: usize,
    pub classifier_positive: usize,
    pub classifier_negative: usize,
}

impl RouteTally {
    pub fn add(&mut self, route: Route) {
        match route {
            Route::GateNegative => self.gate_negative += 1,
            Route::ClassifierPositive => self.classifier_positive += 1,
            Route::ClassifierNegative => self.classifier_negative += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.gate_negative + self.classifier_positive + self.classifier_negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepConfig {
    pub autoencoder: AutoencoderSpec,
    pub gate: GateConfig,
    pub classifier_spec: NetworkSpec,
    pub classifier: TrainConfig,
}

#[derive(Debug, Clone)]
pub struct TwoStepModel {
    pub gate: ReconstructionGate,
    pub classifier: BinaryNetClassifier,
}

impl TwoStepModel {
    pub fn new(gate: ReconstructionGate, classifier: BinaryNetClassifier) -> Result<Self> {
        if gate.input_width() != classifier.input_width() {
            return Err(Error::Shape(format!(
                "gate width {} differs from classifier width {}",
                gate.input_width(),
                classifier.input_width()
            )));
        }
        Ok(Self { gate, classifier })
    }

    pub fn predict(&self, x: &[f64]) -> Result<(Label, Route)> {
        if self.gate.decide(x)?.0 == GateDecision::Outlier {
            return Ok((Label::Negative, Route::GateNegative));
        }
        let route = match self.classifier.predict(x)?.0 {
            Label::Positive => Route::ClassifierPositive,
            _ => Route::ClassifierNegative,
        };
        Ok((route.label(), route))
    }

    pub fn predict_set(&self, set: &SpectraSet) -> Result<(Vec<Label>, RouteTally)> {
        let mut tally = RouteTally::default();
        let mut labels = Vec::with_capacity(set.len());
        for s in set.iter() {
            let (label, route) = self.predict(s.intensities())?;
            tally.add(route);
            labels.push(label);
        }
        Ok((labels, tally))
    }
}

/// The gate sees only the real training spectra (both classes); the
/// classifier trains on the real spectra plus `synthetic`.
pub fn fit_twostep(real: &SpectraSet, synthetic: &SpectraSet, cfg: &TwoStepConfig) -> Result<TwoStepModel> {
    let gate = fit_gate(real, GateMode::OutlierDetector, &cfg.autoencoder, &cfg.gate)?;
    fit_twostep_with_gate(gate, real, synthetic, cfg)
}

/// Same as [`fit_twostep`] with an already fitted gate.
pub fn fit_twostep_with_gate(
    gate: ReconstructionGate,
    real: &SpectraSet,
    synthetic: &SpectraSet,
    cfg: &TwoStepConfig,
) -> Result<TwoStepModel> {
    let train = real.concat(synthetic)?;
    let classifier = fit_binary(&cfg.classifier_spec, &train, &cfg.classifier)?;
    TwoStepModel::new(gate, classifier)
}

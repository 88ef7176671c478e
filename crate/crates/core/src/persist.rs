//! One JSON file format for every trained model kind.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineModel, BaselineParams};
use crate::error::{Error, Result};
use crate::neural::BinaryNetClassifier;
use crate::nn::io::{WeightsFile, WEIGHTS_FORMAT};
use crate::occ::{GateDecision, GateFile, ReconstructionGate, GATE_FORMAT};
use crate::spectra::Label;
use crate::twostep::{Route, TwoStepModel};

pub const MODEL_FORMAT: &str = "raman-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub enum SavedModel {
    Baseline {
        params: BaselineParams,
        model: BaselineModel,
    },
    Network(BinaryNetClassifier),
    Gate(ReconstructionGate),
    TwoStep(TwoStepModel),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Payload {
    Baseline {
        params: BaselineParams,
        model: BaselineModel,
    },
    Network {
        threshold: f64,
        weights: WeightsFile,
    },
    Gate {
        gate: GateFile,
    },
    TwoStep {
        gate: GateFile,
        threshold: f64,
        classifier: WeightsFile,
    },
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Payload,
}

/// A model's verdict on one spectrum, with whatever detail the kind offers.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: Option<f64>,
    pub error: Option<f64>,
    pub route: Option<Route>,
}

impl SavedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Baseline { .. } => "baseline",
            SavedModel::Network(_) => "network",
            SavedModel::Gate(_) => "gate",
            SavedModel::TwoStep(_) => "two_step",
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let plain = |label| Prediction {
            label,
            score: None,
            error: None,
            route: None,
        };
        Ok(match self {
            SavedModel::Baseline { model, .. } => plain(model.predict(x)?),
            SavedModel::Network(clf) => {
                let (label, score) = clf.predict(x)?;
                Prediction {
                    score: Some(score),
                    ..plain(label)
                }
            }
            SavedModel::Gate(g) => {
                let (d, e) = g.decide(x)?;
                let label = if d == GateDecision::Outlier { Label::Negative } else { Label::Positive };
                Prediction {
                    error: Some(e),
                    ..plain(label)
                }
            }
            SavedModel::TwoStep(m) => {
                let (label, route) = m.predict(x)?;
                Prediction {
                    route: Some(route),
                    ..plain(label)
                }
            }
        })
    }

    fn payload(&self) -> Result<Payload> {
        Ok(match self {
            SavedModel::Baseline { params, model } => Payload::Baseline {
                params: *params,
                model: model.clone(),
            },
            SavedModel::Network(clf) => Payload::Network {
                threshold: clf.threshold(),
                weights: WeightsFile::new(untrained_check(clf)?),
            },
            SavedModel::Gate(g) => Payload::Gate { gate: GateFile::new(g) },
            SavedModel::TwoStep(m) => Payload::TwoStep {
                gate: GateFile::new(&m.gate),
                threshold: m.classifier.threshold(),
                classifier: WeightsFile::new(untrained_check(&m.classifier)?),
            },
        })
    }
}

fn untrained_check(clf: &BinaryNetClassifier) -> Result<&crate::nn::Network> {
    clf.network()
        .ok_or_else(|| Error::State("cannot save an untrained classifier".into()))
}

pub fn save_model(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        model: model.payload()?,
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

/// Reads a model file, or a bare weights or gate file.
pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let format = value.get("format").and_then(|f| f.as_str()).unwrap_or_default().to_string();
    if format == WEIGHTS_FORMAT {
        let w: WeightsFile = serde_json::from_value(value)?;
        return Ok(SavedModel::Network(BinaryNetClassifier::from_network(w.into_network()?, 0.5)?));
    }
    if format == GATE_FORMAT {
        let g: GateFile = serde_json::from_value(value)?;
        return Ok(SavedModel::Gate(g.into_gate()?));
    }
    let file: ModelFile = serde_json::from_value(value)?;
    if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
        return Err(Error::Format(format!(
            "not a version {MODEL_VERSION} model file (format {:?}, version {})",
            file.format, file.version
        )));
    }
    Ok(match file.model {
        Payload::Baseline { params, model } => SavedModel::Baseline { params, model },
        Payload::Network { threshold, weights } => {
            SavedModel::Network(BinaryNetClassifier::from_network(weights.into_network()?, threshold)?)
        }
        Payload::Gate { gate } => SavedModel::Gate(gate.into_gate()?),
        Payload::TwoStep {
            gate,
            threshold,
            classifier,
        } => SavedModel::TwoStep(TwoStepModel::new(
            gate.into_gate()?,
            BinaryNetClassifier::from_network(classifier.into_network()?, threshold)?,
        )?),
    })
}

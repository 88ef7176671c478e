//! Autoencoder reconstruction gates: one-class classification and outlier
//! detection by thresholding reconstruction error.

use std::io::Write;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{FIRST_LAYER_L1, LC_FIELDS, PAPER_BATCH_SIZE};
use crate::nn::io::WeightsFile;
use crate::nn::{self, Activation, LayerSpec, LossKind, Network, NetworkSpec, TrainConfig};
use crate::rng::{self, Rng};
use crate::spectra::{Label, SpectraSet};

pub const GATE_FORMAT: &str = "raman-gate";
pub const GATE_VERSION: u32 = 1;

/// Encoder `width→fields` (locally connected, tanh, L1) then `fields→code`
/// (ReLU); decoder `code→fields` (tanh) then `fields→width` (sigmoid).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoencoderSpec {
    pub input_width: usize,
    pub fields: usize,
    pub code: usize,
}

impl AutoencoderSpec {
    pub fn new(input_width: usize) -> Self {
        Self {
            input_width,
            fields: LC_FIELDS,
            code: 5,
        }
    }

    pub fn network_spec(&self) -> Result<NetworkSpec> {
        NetworkSpec::new(vec![
            LayerSpec::locally_connected(self.input_width, self.fields, Activation::Tanh)?
                .with_l1(FIRST_LAYER_L1),
            LayerSpec::dense(self.fields, self.code, Activation::Relu),
            LayerSpec::dense(self.code, self.fields, Activation::Tanh),
            LayerSpec::dense(self.fields, self.input_width, Activation::Sigmoid),
        ])
    }
}

/// Elementwise `x·m + a` with `m ~ N(1, σ²_mult)` and `a ~ N(0, σ²_add)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub multiplicative_variance: f64,
    pub additive_variance: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            multiplicative_variance: 0.1,
            additive_variance: 0.01,
        }
    }
}

impl NoiseModel {
    pub fn new(multiplicative_variance: f64, additive_variance: f64) -> Result<Self> {
        let m = Self {
            multiplicative_variance,
            additive_variance,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("multiplicative", self.multiplicative_variance),
            ("additive", self.additive_variance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} noise variance must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn distributions(&self) -> (Normal<f64>, Normal<f64>) {
        (
            Normal::new(1.0, self.multiplicative_variance.sqrt()).expect("validated variance"),
            Normal::new(0.0, self.additive_variance.sqrt()).expect("validated variance"),
        )
    }

    /// `n` independent (multiplicative, additive) factor pairs.
    pub fn draw_factors(&self, n: usize, rng: &mut Rng) -> Vec<(f64, f64)> {
        let (mult, add) = self.distributions();
        (0..n).map(|_| (mult.sample(rng), add.sample(rng))).collect()
    }

    pub fn apply(&self, x: &[f64], rng: &mut Rng) -> Vec<f64> {
        let (mult, add) = self.distributions();
        x.iter()
            .map(|&v| v * mult.sample(rng) + add.sample(rng))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Trained on positives; non-outliers are predicted positive.
    OneClass,
    /// Trained on all classes; flags spectra unlike any training class.
    OutlierDetector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateDecision {
    Target,
    Outlier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub train: TrainConfig,
    #[serde(default)]
    pub denoising: bool,
    #[serde(default)]
    pub noise: NoiseModel,
}

impl GateConfig {
    /// Mean-squared reconstruction loss, batch 5, plain autoencoder.
    pub fn new(epochs: usize, seed: u64) -> Self {
        Self {
            train: TrainConfig::new(LossKind::MeanSquaredError, epochs, PAPER_BATCH_SIZE, seed),
            denoising: false,
            noise: NoiseModel::default(),
        }
    }

    pub fn denoising(mut self, on: bool) -> Self {
        self.denoising = on;
        self
    }
}

/// A trained autoencoder and its reconstruction-error threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionGate {
    network: Network,
    threshold: f64,
    mode: GateMode,
    noise: Option<NoiseModel>,
    noise_seed: u64,
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

impl ReconstructionGate {
    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn mode(&self) -> GateMode {
        self.mode
    }

    pub fn is_denoising(&self) -> bool {
        self.noise.is_some()
    }

    pub fn input_width(&self) -> usize {
        self.network.spec().input_width()
    }

    /// The input actually fed to the autoencoder. A denoising gate corrupts
    /// each spectrum with noise drawn from a stream keyed on its values, so
    /// repeated calls agree.
    fn presented(&self, x: &[f64]) -> Vec<f64> {
        match &self.noise {
            Some(noise) => noise.apply(x, &mut rng::stream(self.noise_seed, &[rng::hash_values(x)])),
            None => x.to_vec(),
        }
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.network.forward(&self.presented(x))
    }

    /// Mean squared difference between the clean input and the
    /// reconstruction.
    pub fn reconstruction_error(&self, x: &[f64]) -> Result<f64> {
        Ok(mse(&self.reconstruct(x)?, x))
    }

    pub fn errors(&self, set: &SpectraSet) -> Result<Vec<f64>> {
        set.iter().map(|s| self.reconstruction_error(s.intensities())).collect()
    }

    /// Outlier iff the error strictly exceeds the threshold.
    pub fn decide(&self, x: &[f64]) -> Result<(GateDecision, f64)> {
        let e = self.reconstruction_error(x)?;
        let d = if e > self.threshold {
            GateDecision::Outlier
        } else {
            GateDecision::Target
        };
        Ok((d, e))
    }

    /// One-class label: positive when the spectrum reconstructs within the
    /// threshold.
    pub fn predict_label(&self, x: &[f64]) -> Result<Label> {
        Ok(match self.decide(x)?.0 {
            GateDecision::Target => Label::Positive,
            GateDecision::Outlier => Label::Negative,
        })
    }
}

/// Trains the autoencoder to reproduce its input (the clean input when
/// denoising) and sets the threshold to the largest training error.
pub fn fit_gate(train: &SpectraSet, mode: GateMode, spec: &AutoencoderSpec, cfg: &GateConfig) -> Result<ReconstructionGate> {
    if train.is_empty() {
        return Err(Error::Argument("no gate training data".into()));
    }
    if mode == GateMode::OneClass && train.iter().any(|s| s.label != Label::Positive) {
        return Err(Error::Label("one-class gate trains on positive spectra only".into()));
    }
    if train.width() != spec.input_width {
        return Err(Error::Shape(format!(
            "training spectra have width {}, autoencoder expects {}",
            train.width(),
            spec.input_width
        )));
    }
    if cfg.denoising {
        cfg.noise.validate()?;
    }
    let net_spec = spec.network_spec()?;
    let tcfg = TrainConfig {
        loss: LossKind::MeanSquaredError,
        ..cfg.train
    };
    let inputs = train.features();
    let noise = cfg.noise;
    let corrupt = move |x: &[f64], r: &mut Rng| noise.apply(x, r);
    let trained = nn::train_with(
        &net_spec,
        &inputs,
        &inputs,
        &tcfg,
        cfg.denoising.then_some(&corrupt as nn::Corruption<'_>),
    )?;
    let mut gate = ReconstructionGate {
        network: trained.network,
        threshold: 0.0,
        mode,
        noise: cfg.denoising.then_some(cfg.noise),
        noise_seed: rng::derive_seed(cfg.train.seed, &[0x9a7e]),
    };
    gate.threshold = gate
        .errors(train)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(gate)
}

/// One row per spectrum: `group,error`.
pub fn write_error_csv<W: Write>(writer: W, rows: &[(String, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["group", "error"])?;
    for (group, e) in rows {
        w.write_record([group.as_str(), &e.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct GateFile {
    format: String,
    version: u32,
    mode: GateMode,
    threshold: f64,
    noise: Option<NoiseModel>,
    noise_seed: u64,
    weights: WeightsFile,
}

impl GateFile {
    pub(crate) fn new(gate: &ReconstructionGate) -> Self {
        Self {
            format: GATE_FORMAT.into(),
            version: GATE_VERSION,
            mode: gate.mode,
            threshold: gate.threshold,
            noise: gate.noise,
            noise_seed: gate.noise_seed,
            weights: WeightsFile::new(&gate.network),
        }
    }

    pub(crate) fn into_gate(self) -> Result<ReconstructionGate> {
        if self.format != GATE_FORMAT || self.version != GATE_VERSION {
            return Err(Error::Format(format!(
                "not a version {GATE_VERSION} gate file (format {:?}, version {})",
                self.format, self.version
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::Format("gate threshold is not finite".into()));
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(ReconstructionGate {
            network: self.weights.into_network()?,
            threshold: self.threshold,
            mode: self.mode,
            noise: self.noise,
            noise_seed: self.noise_seed,
        })
    }
}

pub fn save_gate(path: impl AsRef<Path>, gate: &ReconstructionGate) -> Result<()> {
    std::fs::write(path, serde_json::to_string(&GateFile::new(gate))?)?;
    Ok(())
}

pub fn load_gate(path: impl AsRef<Path>) -> Result<ReconstructionGate> {
    let file: GateFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    file.into_gate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{Source, Spectrum, WavenumberGrid};
    use std::sync::Arc;

    fn peaks(n: usize, width: usize, center: f64, label: Label) -> SpectraSet {
        let grid = Arc::new(WavenumberGrid::linspace(0.0, 1.0, width).unwrap());
        let spectra = (0..n)
            .map(|i| {
                let c = center + 0.01 * (i % 5) as f64;
                let v = (0..width)
                    .map(|j| {
                        let t = j as f64 / (width - 1) as f64;
                        (-((t - c) / 0.05).powi(2)).exp()
                    })
                    .collect();
                Spectrum::new(grid.clone(), v, label, Source::Real).unwrap()
            })
            .collect();
        SpectraSet::new(grid, spectra).unwrap()
    }

    fn quick_cfg() -> GateConfig {
        GateConfig {
            train: TrainConfig {
                adam: nn::AdamConfig::with_lr(0.01),
                ..GateConfig::new(150, 2).train
            },
            ..GateConfig::new(150, 2)
        }
    }

    #[test]
    fn factor_moments() {
        let f = NoiseModel::default().draw_factors(1_000_000, &mut rng::seeded(8));
        let n = f.len() as f64;
        let mean_m = f.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_a = f.iter().map(|p| p.1).sum::<f64>() / n;
        let var_a = f.iter().map(|p| (p.1 - mean_a).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean_m - 1.0).abs() < 0.001, "{mean_m}");
        assert!((var_a - 0.01).abs() < 0.0005, "{var_a}");
    }

    #[test]
    fn error_closed_forms() {
        assert_eq!(mse(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        assert_eq!(mse(&[0.5; 8], &[1.0; 8]), 0.25);
    }

    #[test]
    fn noise_statistics() {
        let noise = NoiseModel::default();
        let x = vec![1.0; 20_000];
        let y = noise.apply(&x, &mut rng::seeded(4));
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!((mean - 1.0).abs() < 0.01);
        // var(x·m + a) = x²·0.1 + 0.01
        assert!((var - 0.11).abs() < 0.01, "variance {var}");
        assert!(NoiseModel::new(0.0, 0.01).is_err());
        assert!(NoiseModel::new(0.1, -1.0).is_err());
    }

    #[test]
    fn autoencoder_shape() {
        let spec = AutoencoderSpec::new(2470).network_spec().unwrap();
        assert_eq!(spec.layers().len(), 4);
        assert_eq!(spec.layers()[0].receptive_field(), Some(247));
        assert_eq!(spec.output_width(), 2470);
        assert_eq!(spec.output_activation(), Activation::Sigmoid);
    }

    #[test]
    fn training_spectra_pass_and_far_spectra_fail() {
        for denoising in [false, true] {
            let train = peaks(20, 40, 0.3, Label::Positive);
            let cfg = quick_cfg().denoising(denoising);
            let gate = fit_gate(&train, GateMode::OneClass, &AutoencoderSpec::new(40), &cfg).unwrap();
            for s in train.iter() {
                assert_eq!(gate.decide(s.intensities()).unwrap().0, GateDecision::Target);
            }
            let far = peaks(3, 40, 0.8, Label::Negative);
            for s in far.iter() {
                assert_eq!(gate.predict_label(s.intensities()).unwrap(), Label::Negative);
            }
        }
    }

    #[test]
    fn one_class_rejects_negatives() {
        let mut train = peaks(5, 20, 0.3, Label::Positive);
        train.extend(&peaks(1, 20, 0.3, Label::Negative)).unwrap();
        assert!(matches!(
            fit_gate(&train, GateMode::OneClass, &AutoencoderSpec::new(20), &GateConfig::new(1, 0)),
            Err(Error::Label(_))
        ));
        assert!(fit_gate(&train, GateMode::OutlierDetector, &AutoencoderSpec::new(20), &GateConfig::new(1, 0)).is_ok());
    }

    #[test]
    fn threshold_is_strict() {
        let train = peaks(6, 20, 0.5, Label::Positive);
        let gate = fit_gate(&train, GateMode::OneClass, &AutoencoderSpec::new(20), &GateConfig::new(5, 0)).unwrap();
        let errs = gate.errors(&train).unwrap();
        let worst = errs.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(worst, gate.threshold());
        let i = errs.iter().position(|&e| e == worst).unwrap();
        assert_eq!(gate.decide(train.spectra()[i].intensities()).unwrap().0, GateDecision::Target);
    }

    #[test]
    fn save_load_roundtrip() {
        let train = peaks(6, 20, 0.5, Label::Positive);
        let gate = fit_gate(
            &train,
            GateMode::OutlierDetector,
            &AutoencoderSpec::new(20),
            &GateConfig::new(3, 0).denoising(true),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gate.json");
        save_gate(&path, &gate).unwrap();
        let back = load_gate(&path).unwrap();
        assert_eq!(back, gate);
        assert_eq!(back.errors(&train).unwrap(), gate.errors(&train).unwrap());
    }

    #[test]
    fn error_csv() {
        let mut buf = Vec::new();
        write_error_csv(&mut buf, &[("pos".into(), 0.5), ("outlier".into(), 2.0)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "group,error\npos,0.5\noutlier,2\n");
    }
}

//! Cross-validated experiments over models, synthetic-data settings and
//! outlier scenarios, plus the synthetic benchmark corpus.

pub mod benchmark;
pub mod config;
pub mod report;

use std::collections::HashMap;

use rayon::prelude::*;

pub use benchmark::{gen_benchmark, Benchmark, BenchmarkParams};
pub use config::{
    BaselineFamily, DataConfig, EpochProfile, Epochs, Evaluation, ExperimentConfig, ModelConfig,
    SynthesisConfig, SynthesisSource, VaeWidths,
};
pub use report::{
    aggregate, emit_plot_data, read_report, write_report, Aggregate, ErrorRecord, EvalReport, PlotKind,
    RunRecord,
};

use crate::baselines::BaselineModel;
use crate::error::{Error, Result};
use crate::neural::{classifier_train_config, fcnn_spec_for, fit_binary, lcnn_spec_for, BinaryNetClassifier, LC_FIELDS};
use crate::nn::{AdamConfig, NetworkSpec, TrainConfig};
use crate::occ::{fit_gate, AutoencoderSpec, GateConfig, GateDecision, GateMode, ReconstructionGate};
use crate::rng;
use crate::spectra::{load_outlier_corpus, load_spectra, Label, LoadOptions, Source, SpectraSet, MODEL_WIDTH};
use crate::splits::{apply_scenario, make_fold_plan};
use crate::synthesis::{blend_classes, pool_size, vae_generate, vae_train, BlendSchedule, VaeConfig};
use crate::twostep::{fit_twostep_with_gate, TwoStepConfig, TwoStepModel};

/// Labeled spectra plus an optional outlier corpus on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spectra: SpectraSet,
    pub outliers: Option<SpectraSet>,
}

impl From<Benchmark> for Dataset {
    fn from(b: Benchmark) -> Self {
        Self {
            spectra: b.spectra,
            outliers: Some(b.outliers),
        }
    }
}

/// Loads or generates the data, resamples outliers onto the spectra grid
/// and truncates both to the configured width.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let data = match &cfg.data {
        DataConfig::Files { spectra, outliers } => {
            let opts = LoadOptions::default();
            let spectra = load_spectra(spectra, opts)?;
            let outliers = outliers
                .as_ref()
                .map(|p| {
                    let o = load_outlier_corpus(p, opts)?;
                    if **o.grid() == **spectra.grid() {
                        Ok(SpectraSet::new(spectra.grid().clone(), o.spectra().to_vec())?)
                    } else {
                        o.resampled(spectra.grid())?.normalized()
                    }
                })
                .transpose()?;
            Dataset { spectra, outliers }
        }
        DataConfig::Benchmark { params, seed } => gen_benchmark(params, *seed)?.into(),
    };
    let width = match cfg.width {
        Some(w) => w,
        None => data.spectra.width().min(MODEL_WIDTH),
    };
    if width > data.spectra.width() {
        return Err(Error::Shape(format!(
            "width {width} exceeds the data width {}",
            data.spectra.width()
        )));
    }
    if width == data.spectra.width() {
        return Ok(data);
    }
    Ok(Dataset {
        spectra: data.spectra.truncated(width)?,
        outliers: data.outliers.map(|o| o.truncated(width)).transpose()?,
    })
}

/// Splits `count` synthetic spectra between the classes in the ratio of
/// the real training data.
pub fn class_ratio_counts(train: &SpectraSet, count: usize) -> [(Label, usize); 2] {
    let pos = train.count(Label::Positive);
    let total = pos + train.count(Label::Negative);
    let n_pos = if total == 0 { 0 } else { ((count * pos) as f64 / total as f64).round() as usize };
    [(Label::Positive, n_pos), (Label::Negative, count - n_pos)]
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EvalReport> {
    let data = load_dataset(cfg)?;
    run_on_dataset(cfg, &data)
}

/// One report row group per synthetic count; 0 is the real-only baseline.
pub fn synthesis_sweep(cfg: &ExperimentConfig, counts: &[usize]) -> Result<EvalReport> {
    let cfg = ExperimentConfig {
        sweep: Some(counts.to_vec()),
        ..cfg.clone()
    };
    run_experiment(&cfg)
}

struct Cell {
    count: usize,
    fold: usize,
    seed: u64,
    train: SpectraSet,
    test: SpectraSet,
}

enum Trained {
    Baseline(BaselineModel),
    Net(BinaryNetClassifier),
    Gate(ReconstructionGate),
    TwoStep(TwoStepModel),
}

impl Trained {
    /// The predicted label and whether a gate decided it.
    fn predict(&self, x: &[f64]) -> Result<(Label, bool)> {
        match self {
            Trained::Baseline(m) => Ok((m.predict(x)?, false)),
            Trained::Net(m) => Ok((m.predict(x)?.0, false)),
            Trained::Gate(g) => {
                let outlier = g.decide(x)?.0 == GateDecision::Outlier;
                let label = if outlier { Label::Negative } else { Label::Positive };
                Ok((label, outlier))
            }
            Trained::TwoStep(m) => {
                let (label, route) = m.predict(x)?;
                Ok((label, route == crate::twostep::Route::GateNegative))
            }
        }
    }

    fn gate(&self) -> Option<&ReconstructionGate> {
        match self {
            Trained::Gate(g) => Some(g),
            Trained::TwoStep(m) => Some(&m.gate),
            _ => None,
        }
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    epochs: Epochs,
    schedule: BlendSchedule,
    width: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum NetKind {
    Fcnn,
    Lcnn,
}

/// Per-cell caches so models sharing training data or a classifier reuse
/// them.
#[derive(Default)]
struct CellCache {
    training: HashMap<SynthesisConfig, SpectraSet>,
    nets: HashMap<(NetKind, SynthesisConfig), BinaryNetClassifier>,
}

impl Runner<'_> {
    fn adam(&self) -> AdamConfig {
        self.cfg.learning_rate.map(AdamConfig::with_lr).unwrap_or_default()
    }

    fn classifier_cfg(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            adam: self.adam(),
            ..classifier_train_config(self.epochs.classifier, seed)
        }
    }

    fn gate_cfg(&self, seed: u64, denoising: bool) -> GateConfig {
        let mut g = GateConfig::new(self.epochs.gate, seed).denoising(denoising);
        g.train.adam = self.adam();
        g
    }

    fn net_spec(&self, kind: NetKind) -> Result<NetworkSpec> {
        match kind {
            NetKind::Fcnn => fcnn_spec_for(self.width),
            NetKind::Lcnn => lcnn_spec_for(self.width, LC_FIELDS),
        }
    }

    /// Synthetic counts per class in the real class ratio.
    fn synthesize(&self, train: &SpectraSet, syn: SynthesisConfig, seed: u64) -> Result<SpectraSet> {
        let syn = syn.effective();
        if syn.source == SynthesisSource::RealOnly {
            return Ok(train.clone());
        }
        let counts = class_ratio_counts(train, syn.count);
        let synthetic = if syn.source.uses_vae() {
            let spec = self.cfg.vae_spec(self.width);
            let mut out = SpectraSet::empty(train.grid().clone());
            for (k, &(label, n)) in counts.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let vcfg = VaeConfig {
                    adam: self.adam(),
                    ..VaeConfig::new(self.epochs.vae, rng::derive_seed(seed, &[0x7ae, k as u64]))
                };
                let model = vae_train(&train.with_label(label), &spec, &vcfg)?;
                out.extend(&vae_generate(&model, n, rng::derive_seed(seed, &[0x9e4, k as u64]))?)?;
            }
            out
        } else {
            let mut limits = Vec::new();
            for &(label, n) in &counts {
                let pool = pool_size(train.count(label), &self.schedule);
                if n > pool {
                    return Err(Error::Argument(format!(
                        "{n} blended {label} spectra requested but the pool holds {pool}"
                    )));
                }
                limits.push((label, Some(n)));
            }
            blend_classes(train, &self.schedule, &limits, rng::derive_seed(seed, &[0xb1e4d]))?
        };
        if syn.source.includes_real() {
            train.concat(&synthetic)
        } else {
            Ok(synthetic)
        }
    }

    fn training_set(&self, cache: &mut CellCache, cell: &Cell, syn: SynthesisConfig, seed: u64) -> Result<SpectraSet> {
        let syn = syn.effective();
        if let Some(s) = cache.training.get(&syn) {
            return Ok(s.clone());
        }
        let s = self.synthesize(&cell.train, syn, seed)?;
        cache.training.insert(syn, s.clone());
        Ok(s)
    }

    fn net(&self, cache: &mut CellCache, cell: &Cell, kind: NetKind, syn: SynthesisConfig, seed: u64) -> Result<(BinaryNetClassifier, usize)> {
        let syn = syn.effective();
        let train = self.training_set(cache, cell, syn, seed)?;
        if let Some(n) = cache.nets.get(&(kind, syn)) {
            return Ok((n.clone(), train.len()));
        }
        let net = fit_binary(&self.net_spec(kind)?, &train, &self.classifier_cfg(seed))?;
        cache.nets.insert((kind, syn), net.clone());
        Ok((net, train.len()))
    }

    /// Returns the trained model, synthetic count and training-set size.
    fn train(&self, cache: &mut CellCache, model: &ModelConfig, cell: &Cell) -> Result<(Trained, usize, usize)> {
        let seed = rng::derive_seed(cell.seed, &[cell.fold as u64]);
        let global = SynthesisConfig {
            count: cell.count,
            ..self.cfg.synthesis
        };
        Ok(match model {
            ModelConfig::Baseline { params } => {
                let syn = global.effective();
                let train = self.training_set(cache, cell, syn, seed)?;
                (Trained::Baseline(params.fit_set(&train, seed)?), syn.count, train.len())
            }
            ModelConfig::BaselineGrid { .. } => unreachable!("grids are expanded before running"),
            ModelConfig::Fcnn { synthesis } | ModelConfig::Lcnn { synthesis } => {
                let kind = if matches!(model, ModelConfig::Fcnn { .. }) { NetKind::Fcnn } else { NetKind::Lcnn };
                let syn = synthesis.unwrap_or(global).effective();
                let (net, n) = self.net(cache, cell, kind, syn, seed)?;
                (Trained::Net(net), syn.count, n)
            }
            ModelConfig::AeOcc { denoising } => {
                let train = cell.train.with_label(Label::Positive);
                let gate = fit_gate(
                    &train,
                    GateMode::OneClass,
                    &AutoencoderSpec::new(self.width),
                    &self.gate_cfg(seed, *denoising),
                )?;
                (Trained::Gate(gate), 0, train.len())
            }
            ModelConfig::TwoStep { denoising, blended } => {
                let syn = SynthesisConfig {
                    source: SynthesisSource::RealPlusBlended,
                    count: *blended,
                }
                .effective();
                let gate = fit_gate(
                    &cell.train,
                    GateMode::OutlierDetector,
                    &AutoencoderSpec::new(self.width),
                    &self.gate_cfg(seed, *denoising),
                )?;
                let model = match cache.nets.get(&(NetKind::Lcnn, syn)) {
                    Some(net) => TwoStepModel::new(gate, net.clone())?,
                    None => {
                        let train = self.training_set(cache, cell, syn, seed)?;
                        let synthetic = SpectraSet::new(
                            train.grid().clone(),
                            train.spectra()[cell.train.len()..].to_vec(),
                        )?;
                        let tcfg = TwoStepConfig {
                            autoencoder: AutoencoderSpec::new(self.width),
                            gate: self.gate_cfg(seed, *denoising),
                            classifier_spec: self.net_spec(NetKind::Lcnn)?,
                            classifier: self.classifier_cfg(seed),
                        };
                        let m = fit_twostep_with_gate(gate, &cell.train, &synthetic, &tcfg)?;
                        cache.nets.insert((NetKind::Lcnn, syn), m.classifier.clone());
                        m
                    }
                };
                (Trained::TwoStep(model), syn.count, cell.train.len() + syn.count)
            }
        })
    }

    fn run_cell(&self, models: &[ModelConfig], cell: &Cell, outliers: Option<&SpectraSet>) -> Result<(Vec<RunRecord>, Vec<ErrorRecord>)> {
        let scenario_seed = rng::derive_seed(cell.seed, &[cell.fold as u64, 0x5ce]);
        let scenarios: Vec<(usize, SpectraSet)> = self
            .cfg
            .scenarios
            .iter()
            .map(|&sc| {
                let set = match outliers {
                    Some(o) => apply_scenario(&cell.test, o, sc, scenario_seed)?,
                    None => cell.test.clone(),
                };
                Ok((sc.n_outliers(), set))
            })
            .collect::<Result<_>>()?;
        let largest = scenarios.iter().max_by_key(|(n, _)| *n).map(|(_, s)| s);

        let mut cache = CellCache::default();
        let mut runs = Vec::new();
        let mut errors = Vec::new();
        for (mi, model) in models.iter().enumerate() {
            let label = model.label();
            let ctx = |e: Error| e.context(format!("{label}, fold {}, seed {}", cell.fold, cell.seed));
            let (trained, count, train_size) = self.train(&mut cache, model, cell).map_err(ctx)?;
            for (sc, set) in &scenarios {
                let (mut correct, mut flagged) = (0, 0);
                for s in set.iter() {
                    let (pred, gated) = trained.predict(s.intensities()).map_err(ctx)?;
                    correct += usize::from(pred == s.label);
                    flagged += usize::from(gated);
                }
                runs.push(RunRecord {
                    model: mi,
                    label: label.clone(),
                    count,
                    fold: cell.fold,
                    seed: cell.seed,
                    scenario: *sc,
                    train_size,
                    n_test: set.len(),
                    n_correct: correct,
                    accuracy: correct as f64 / set.len() as f64,
                    gate_flagged: trained.gate().map(|_| flagged),
                });
            }
            if let (Some(gate), Some(set)) = (trained.gate(), largest) {
                for s in set.iter() {
                    let group = if s.source == Source::OutlierCorpus { "outlier" } else { s.label.as_str() };
                    errors.push(ErrorRecord {
                        model: mi,
                        label: label.clone(),
                        count,
                        fold: cell.fold,
                        seed: cell.seed,
                        group: group.into(),
                        error: gate.reconstruction_error(s.intensities()).map_err(ctx)?,
                        threshold: gate.threshold(),
                    });
                }
            }
        }
        Ok((runs, errors))
    }
}

pub fn run_on_dataset(cfg: &ExperimentConfig, data: &Dataset) -> Result<EvalReport> {
    cfg.validate()?;
    let needs_outliers = cfg.scenarios.iter().any(|s| s.n_outliers() > 0);
    if needs_outliers && data.outliers.is_none() {
        return Err(Error::Argument("outlier scenarios need an outlier corpus".into()));
    }
    let plan = make_fold_plan(&data.spectra, cfg.fold_seed)?;
    let splits: Vec<(usize, Vec<usize>, Vec<usize>)> = match cfg.evaluation {
        Evaluation::Folds => {
            let chosen: Vec<usize> = cfg.folds.clone().unwrap_or_else(|| (0..plan.folds.len()).collect());
            chosen
                .into_iter()
                .map(|f| (f, plan.folds[f].train.clone(), plan.folds[f].test.clone()))
                .collect()
        }
        Evaluation::Validation => vec![(0, plan.experimental.clone(), plan.validation.clone())],
    };
    let counts = cfg.sweep.clone().unwrap_or_else(|| vec![cfg.synthesis.count]);
    let mut cells = Vec::new();
    for &count in &counts {
        for (fold, train, test) in &splits {
            for &seed in &cfg.seeds {
                cells.push(Cell {
                    count,
                    fold: *fold,
                    seed,
                    train: data.spectra.subset(train)?,
                    test: data.spectra.subset(test)?,
                });
            }
        }
    }
    let runner = Runner {
        cfg,
        epochs: cfg.epochs.resolve(),
        schedule: cfg.blend_schedule.clone().unwrap_or_default(),
        width: data.spectra.width(),
    };
    let models = cfg.resolved_models();
    let outliers = if needs_outliers { data.outliers.as_ref() } else { None };
    let results: Vec<(Vec<RunRecord>, Vec<ErrorRecord>)> = cells
        .par_iter()
        .map(|cell| runner.run_cell(&models, cell, outliers))
        .collect::<Result<_>>()?;
    let mut runs = Vec::new();
    let mut errors = Vec::new();
    for (r, e) in results {
        runs.extend(r);
        errors.extend(e);
    }
    Ok(EvalReport {
        config: cfg.clone(),
        aggregates: aggregate(&runs),
        models,
        runs,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A small benchmark config; `extra` is a JSON object merged on top.
    fn quick(models: &str, extra: &str) -> ExperimentConfig {
        let mut base: serde_json::Value = serde_json::from_str(&format!(
            r#"{{"data": {{"kind": "benchmark", "params": {{"features": 40, "n_positive": 30, "n_negative": 20, "n_outliers": 8}}}},
                "models": {models}, "seeds": [0, 1], "scenarios": [0, 8],
                "epochs": {{"custom": {{"classifier": 30, "gate": 30, "vae": 5}}}},
                "learning_rate": 0.01}}"#
        ))
        .unwrap();
        if !extra.is_empty() {
            let extra: serde_json::Map<String, serde_json::Value> = serde_json::from_str(extra).unwrap();
            base.as_object_mut().unwrap().extend(extra);
        }
        ExperimentConfig::from_json(&base.to_string()).unwrap()
    }

    #[test]
    fn run_counts_and_aggregates() {
        let cfg = quick(r#"[{"kind": "baseline", "params": {"kind": "knn", "k": 1, "metric": "euclidean"}}, {"kind": "lcnn"}]"#, "");
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.runs.len(), 2 * 5 * 2 * 2);
        assert_eq!(report.aggregates.len(), 4);
        assert!(report.aggregates.iter().all(|a| a.runs == 10));
        assert_eq!(report.aggregates, aggregate(&report.runs));
        assert!(report.errors.is_empty());
        let s8 = report.runs.iter().find(|r| r.scenario == 8).unwrap();
        let s0 = report.runs.iter().find(|r| r.scenario == 0).unwrap();
        assert_eq!(s8.n_test, s0.n_test + 8);
    }

    #[test]
    fn gated_models_record_errors_and_flags() {
        let cfg = quick(r#"[{"kind": "ae_occ"}, {"kind": "two_step", "blended": 20}, {"kind": "lcnn", "synthesis": {"source": "real_plus_blended", "count": 20}}]"#, r#"{"folds": [0], "seeds": [0]}"#);
        let report = run_experiment(&cfg).unwrap();
        assert!(report.runs.iter().filter(|r| r.model < 2).all(|r| r.gate_flagged.is_some()));
        assert!(report.runs.iter().filter(|r| r.model == 2).all(|r| r.gate_flagged.is_none()));
        let groups: std::collections::BTreeSet<_> = report.errors.iter().map(|e| e.group.as_str()).collect();
        assert_eq!(groups.into_iter().collect::<Vec<_>>(), vec!["neg", "outlier", "pos"]);
        let two = report.runs.iter().find(|r| r.model == 1).unwrap();
        let lcnn = report.runs.iter().find(|r| r.model == 2).unwrap();
        assert_eq!(two.train_size, lcnn.train_size);
    }

    #[test]
    fn sweep_count_zero_matches_real_only() {
        let cfg = quick(r#"[{"kind": "baseline", "params": {"kind": "gnb"}}]"#, r#"{"synthesis": {"source": "real_plus_blended"}}"#);
        let report = synthesis_sweep(&cfg, &[0, 30]).unwrap();
        let real = run_experiment(&quick(r#"[{"kind": "baseline", "params": {"kind": "gnb"}}]"#, "")).unwrap();
        let zero: Vec<_> = report.runs.iter().filter(|r| r.count == 0).cloned().collect();
        assert_eq!(zero, real.runs);
        let thirty = report.runs.iter().find(|r| r.count == 30).unwrap();
        assert_eq!(thirty.train_size, zero[0].train_size + 30);
    }

    #[test]
    fn blend_count_beyond_pool_rejected() {
        let cfg = quick(r#"[{"kind": "baseline", "params": {"kind": "gnb"}}]"#, r#"{"synthesis": {"source": "blended_only", "count": 1000000}}"#);
        let err = run_experiment(&cfg).unwrap_err();
        assert!(matches!(err.root(), Error::Argument(_)), "{err}");
    }

    #[test]
    fn vae_source_runs() {
        let cfg = quick(r#"[{"kind": "baseline", "params": {"kind": "gnb"}}]"#, r#"{"synthesis": {"source": "vae_only", "count": 10}, "folds": [0], "seeds": [0], "vae": {"hidden": [8], "latent": 2}}"#);
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.runs[0].train_size, 10);
    }

    #[test]
    fn missing_outliers_rejected() {
        let cfg = quick(r#"[{"kind": "lcnn"}]"#, "");
        let data = load_dataset(&cfg).unwrap();
        let data = Dataset {
            outliers: None,
            ..data
        };
        assert!(run_on_dataset(&cfg, &data).is_err());
    }
}

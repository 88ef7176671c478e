use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use raman_core::baselines::{BaselineParams, Kernel, Metric, SplitCriterion};
use raman_core::experiment::{
    class_ratio_counts, emit_plot_data, gen_benchmark, read_report, run_experiment, write_report, BenchmarkParams,
    ExperimentConfig, PlotKind,
};
use raman_core::neural::{classifier_train_config, fcnn_spec_for, fit_binary, lcnn_spec_for, LC_FIELDS};
use raman_core::occ::{fit_gate, write_error_csv, AutoencoderSpec, GateConfig, GateMode};
use raman_core::persist::{load_model, save_model, SavedModel};
use raman_core::spectra::{load_outlier_corpus, load_spectra, save_spectra, LoadOptions, MODEL_WIDTH};
use raman_core::splits::{make_fold_plan, FoldPlan};
use raman_core::synthesis::{blend_classes, save_vae, vae_generate, vae_train, BlendSchedule, VaeConfig, VaeSpec};
use raman_core::twostep::{fit_twostep, TwoStepConfig};
use raman_core::{Error, Label, Result, SpectraSet};

use crate::*;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Split(a) => split(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Synth(SynthCommand::Blend(a)) => synth_blend(a),
        Command::Synth(SynthCommand::Vae(a)) => synth_vae(a),
        Command::Gate(GateCommand::Fit(a)) => gate_fit(a),
        Command::Twostep(TwostepCommand::Fit(a)) => twostep_fit(a),
        Command::Experiment(ExperimentCommand::Run(a)) => experiment_run(a),
        Command::Benchmark(BenchmarkCommand::Gen(a)) => benchmark_gen(a),
        Command::Plotdata(a) => plotdata(a),
    }
}

fn load(path: &Path) -> Result<SpectraSet> {
    load_spectra(path, LoadOptions::default())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).context(format!("parsing {}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = File::create(path).map_err(|e| Error::from(e).context(format!("creating {}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn default_width(set: &SpectraSet, width: Option<usize>) -> Result<SpectraSet> {
    let w = width.unwrap_or_else(|| set.width().min(MODEL_WIDTH));
    if w == set.width() {
        Ok(set.clone())
    } else {
        set.truncated(w)
    }
}

impl TrainData {
    fn load(&self) -> Result<SpectraSet> {
        let set = load(&self.data)?;
        let (Some(plan), Some(fold)) = (&self.plan, self.fold) else {
            return default_width(&set, None);
        };
        let plan: FoldPlan = read_json(plan)?;
        let f = plan.folds.get(fold).ok_or_else(|| {
            Error::Argument(format!("fold {fold} out of range; the plan has {}", plan.folds.len()))
        })?;
        default_width(&set.subset(&f.train)?, None)
    }
}

fn describe(set: &SpectraSet) -> String {
    format!(
        "{} spectra ({} pos, {} neg, {} unk), {} features",
        set.len(),
        set.count(Label::Positive),
        set.count(Label::Negative),
        set.count(Label::Unlabeled),
        set.width()
    )
}

fn ingest(a: IngestArgs) -> Result<()> {
    let opts = LoadOptions {
        normalize: !a.no_normalize,
    };
    let set = if a.outliers {
        load_outlier_corpus(&a.input, opts)?
    } else {
        load_spectra(&a.input, opts)?
    };
    let set = default_width(&set, a.width)?;
    save_spectra(&a.output, &set, false)?;
    eprintln!("{}", describe(&set));
    Ok(())
}

fn split(a: SplitArgs) -> Result<()> {
    let set = load(&a.input)?;
    let plan = make_fold_plan(&set, a.seed)?;
    let mut w = create(&a.output)?;
    w.write_all(plan.to_json()?.as_bytes())?;
    w.flush()?;
    eprintln!(
        "{} experimental, {} validation, {} folds",
        plan.experimental.len(),
        plan.validation.len(),
        plan.folds.len()
    );
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let mut set = a.data.load()?;
    if let Some(p) = &a.synthetic {
        set = set.concat(&default_width(&load(p)?, Some(set.width()))?)?;
    }
    let metric = match a.metric {
        MetricArg::Euclidean => Metric::Euclidean,
        MetricArg::Manhattan => Metric::Manhattan,
    };
    let baseline = |params: BaselineParams| -> Result<SavedModel> {
        let model = params.fit_set(&set, a.seed)?;
        Ok(SavedModel::Baseline { params, model })
    };
    let model = match a.model {
        ModelKind::Knn => baseline(BaselineParams::Knn { k: a.k, metric })?,
        ModelKind::Svm => baseline(BaselineParams::Svm {
            c: a.c,
            kernel: Kernel::Linear,
        })?,
        ModelKind::Tree => baseline(BaselineParams::Tree {
            max_depth: a.max_depth,
            criterion: SplitCriterion::Gini,
        })?,
        ModelKind::Gnb => baseline(BaselineParams::Gnb)?,
        ModelKind::Fcnn | ModelKind::Lcnn => {
            let spec = match a.model {
                ModelKind::Fcnn => fcnn_spec_for(set.width())?,
                _ => lcnn_spec_for(set.width(), LC_FIELDS)?,
            };
            let mut cfg = classifier_train_config(a.epochs, a.seed);
            if let Some(lr) = a.learning_rate {
                cfg.adam.lr = lr;
            }
            SavedModel::Network(fit_binary(&spec, &set, &cfg)?)
        }
    };
    save_model(&a.output, &model)?;
    eprintln!("trained {} on {}", model.kind(), describe(&set));
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let set = load(&a.input)?;
    let mut w = csv::Writer::from_writer(output(a.output.as_deref())?);
    w.write_record(["index", "truth", "label", "score", "error", "route"])?;
    let mut correct = 0;
    let input = default_width(&set, None)?;
    for (i, s) in input.iter().enumerate() {
        let p = model.predict(s.intensities())?;
        correct += usize::from(p.label == s.label);
        w.write_record([
            i.to_string(),
            s.label.as_str().into(),
            p.label.as_str().into(),
            opt(p.score),
            opt(p.error),
            p.route.map(|r| r.as_str().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let labeled = input.len() - input.count(Label::Unlabeled);
    if labeled > 0 && labeled == input.len() {
        eprintln!("accuracy {:.4} on {} spectra", correct as f64 / labeled as f64, labeled);
    }
    Ok(())
}

fn synth_blend(a: BlendArgs) -> Result<()> {
    let set = load(&a.input)?;
    let classes = if a.class.is_empty() {
        vec![ClassArg::Pos, ClassArg::Neg]
    } else {
        a.class
    };
    let per_class: Vec<(Label, Option<usize>)> = classes.iter().map(|c| (c.label(), a.count)).collect();
    let out = blend_classes(&set, &BlendSchedule::default(), &per_class, a.seed)?;
    save_spectra(&a.output, &out, true)?;
    eprintln!("wrote {}", describe(&out));
    Ok(())
}

fn synth_vae(a: VaeArgs) -> Result<()> {
    let set = load(&a.input)?.with_label(a.class.label());
    let w = set.width();
    let spec = match (a.hidden.is_empty(), a.latent) {
        (true, None) if w >= 1024 => VaeSpec::standard(w),
        (true, latent) => VaeSpec::mirrored(w, &[(w / 2).max(2), (w / 4).max(2)], latent.unwrap_or((w / 10).max(2))),
        (false, latent) => VaeSpec::mirrored(w, &a.hidden, latent.unwrap_or((w / 10).max(2))),
    };
    let model = vae_train(&set, &spec, &VaeConfig::new(a.epochs, a.seed))?;
    if let Some(p) = &a.save_model {
        save_vae(p, &model)?;
    }
    let out = vae_generate(&model, a.count, raman_core::rng::derive_seed(a.seed, &[0x9e4]))?;
    save_spectra(&a.output, &out, true)?;
    eprintln!("wrote {}", describe(&out));
    Ok(())
}

fn gate_config(o: &GateOptions, seed: u64) -> GateConfig {
    GateConfig::new(o.gate_epochs, seed).denoising(o.denoising)
}

fn gate_fit(a: GateFitArgs) -> Result<()> {
    let set = a.data.load()?;
    let (mode, train) = match a.mode {
        GateModeArg::OneClass => (GateMode::OneClass, set.with_label(Label::Positive)),
        GateModeArg::Outlier => (GateMode::OutlierDetector, set),
    };
    let gate = fit_gate(&train, mode, &AutoencoderSpec::new(train.width()), &gate_config(&a.gate, a.seed))?;
    if let Some(p) = &a.errors {
        let rows: Vec<(String, f64)> = train
            .iter()
            .zip(gate.errors(&train)?)
            .map(|(s, e)| (s.label.as_str().to_string(), e))
            .collect();
        write_error_csv(create(p)?, &rows)?;
    }
    eprintln!("gate threshold {} from {}", gate.threshold(), describe(&train));
    save_model(&a.output, &SavedModel::Gate(gate))
}

fn twostep_fit(a: TwostepFitArgs) -> Result<()> {
    let real = a.data.load()?;
    let synthetic = match &a.synthetic {
        Some(p) => default_width(&load(p)?, Some(real.width()))?,
        None if a.blended == 0 => SpectraSet::empty(real.grid().clone()),
        None => {
            let per_class = class_ratio_counts(&real, a.blended).map(|(l, n)| (l, Some(n)));
            blend_classes(&real, &BlendSchedule::default(), &per_class, a.seed)?
        }
    };
    let cfg = TwoStepConfig {
        autoencoder: AutoencoderSpec::new(real.width()),
        gate: gate_config(&a.gate, a.seed),
        classifier_spec: lcnn_spec_for(real.width(), LC_FIELDS)?,
        classifier: classifier_train_config(a.epochs, a.seed),
    };
    let model = fit_twostep(&real, &synthetic, &cfg)?;
    eprintln!(
        "two-step model: gate threshold {}, classifier trained on {} spectra",
        model.gate.threshold(),
        real.len() + synthetic.len()
    );
    save_model(&a.output, &SavedModel::TwoStep(model))
}

fn experiment_run(a: ExperimentRunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config).map_err(|e| match e {
        Error::Io(io) => Error::Argument(format!("cannot read config {}: {io}", a.config.display())),
        other => other,
    })?;
    if let Some(seed) = a.seed {
        cfg.fold_seed = seed;
    }
    let report = run_experiment(&cfg)?;
    std::fs::create_dir_all(&a.output)?;
    write_report(&a.output, &report)?;
    for agg in &report.aggregates {
        eprintln!(
            "{:<40} count {:>6} scenario {:>3}  {:.4} ± {:.4} ({} runs)",
            agg.label, agg.count, agg.scenario, agg.mean, agg.sem, agg.runs
        );
    }
    Ok(())
}

fn benchmark_gen(a: BenchmarkGenArgs) -> Result<()> {
    let params = match &a.params {
        Some(p) => read_json(p)?,
        None if a.small => BenchmarkParams::small(),
        None => BenchmarkParams::default(),
    };
    let b = gen_benchmark(&params, a.seed)?;
    std::fs::create_dir_all(&a.output)?;
    save_spectra(a.output.join("spectra.csv"), &b.spectra, false)?;
    save_spectra(a.output.join("outliers.csv"), &b.outliers, false)?;
    eprintln!("{}; {} outliers", describe(&b.spectra), b.outliers.len());
    Ok(())
}

fn plotdata(a: PlotdataArgs) -> Result<()> {
    let kind: PlotKind = a.kind.parse()?;
    let report = read_report(&a.report)?;
    let mut w = output(a.output.as_deref())?;
    emit_plot_data(&report, kind, &mut w)?;
    w.flush()?;
    Ok(())
}

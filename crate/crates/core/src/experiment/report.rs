use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModelConfig};
use crate::error::{Error, Result};
use crate::stats::mean_and_sem;

/// Accuracy of one trained model on one scenario's test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: usize,
    pub label: String,
    pub count: usize,
    pub fold: usize,
    pub seed: u64,
    pub scenario: usize,
    pub train_size: usize,
    pub n_test: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    /// Test spectra the gate labeled negative directly (gated models only).
    pub gate_flagged: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub model: usize,
    pub label: String,
    pub count: usize,
    pub scenario: usize,
    pub runs: usize,
    pub mean: f64,
    pub sem: f64,
}

/// Per-spectrum reconstruction error of a gate on a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub model: usize,
    pub label: String,
    pub count: usize,
    pub fold: usize,
    pub seed: u64,
    pub group: String,
    pub error: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub models: Vec<ModelConfig>,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    pub errors: Vec<ErrorRecord>,
}

/// Mean and SEM per (model, count, scenario), recomputed from the runs.
pub fn aggregate(runs: &[RunRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, usize, usize), (String, Vec<f64>)> = BTreeMap::new();
    for r in runs {
        groups
            .entry((r.model, r.count, r.scenario))
            .or_insert_with(|| (r.label.clone(), Vec::new()))
            .1
            .push(r.accuracy);
    }
    groups
        .into_iter()
        .map(|((model, count, scenario), (label, accs))| {
            let (mean, sem) = mean_and_sem(&accs);
            Aggregate {
                model,
                label,
                count,
                scenario,
                runs: accs.len(),
                mean,
                sem,
            }
        })
        .collect()
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_runs_csv<W: Write>(writer: W, runs: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "model", "label", "count", "fold", "seed", "scenario", "train_size", "n_test", "n_correct", "accuracy",
        "gate_flagged",
    ])?;
    for r in runs {
        w.write_record([
            r.model.to_string(),
            r.label.clone(),
            r.count.to_string(),
            r.fold.to_string(),
            r.seed.to_string(),
            r.scenario.to_string(),
            r.train_size.to_string(),
            r.n_test.to_string(),
            r.n_correct.to_string(),
            r.accuracy.to_string(),
            opt(&r.gate_flagged),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(writer: W, aggregates: &[Aggregate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "label", "count", "scenario", "runs", "mean", "sem"])?;
    for a in aggregates {
        w.write_record([
            a.model.to_string(),
            a.label.clone(),
            a.count.to_string(),
            a.scenario.to_string(),
            a.runs.to_string(),
            a.mean.to_string(),
            a.sem.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors_csv<W: Write>(writer: W, errors: &[ErrorRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "label", "count", "fold", "seed", "group", "error", "threshold"])?;
    for e in errors {
        w.write_record([
            e.model.to_string(),
            e.label.clone(),
            e.count.to_string(),
            e.fold.to_string(),
            e.seed.to_string(),
            e.group.clone(),
            e.error.to_string(),
            e.threshold.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const REPORT_FILES: [&str; 4] = ["report.json", "runs.csv", "summary.csv", "errors.csv"];

/// Writes `report.json`, `runs.csv`, `summary.csv` and `errors.csv`.
pub fn write_report(dir: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    write_runs_csv(std::fs::File::create(dir.join("runs.csv"))?, &report.runs)?;
    write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?, &report.aggregates)?;
    write_errors_csv(std::fs::File::create(dir.join("errors.csv"))?, &report.errors)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<EvalReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    AccuracyVsCount,
    AccuracyVsScenario,
    GridHeatmap,
    ErrorHistogram,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Argument(format!("unknown plot kind {s:?}")))
    }
}

/// Tidy CSV for one plot kind, preceded by `#` lines documenting columns.
pub fn emit_plot_data<W: Write>(report: &EvalReport, kind: PlotKind, mut out: W) -> Result<()> {
    if report.runs.is_empty() || report.aggregates.is_empty() {
        return Err(Error::Report("report has no runs".into()));
    }
    let (doc, header, rows): (&[&str], Vec<&str>, Vec<Vec<String>>) = match kind {
        PlotKind::AccuracyVsCount => (
            &[
                "accuracy against number of synthetic training spectra",
                "model: model label; count: synthetic spectra added; scenario: injected outliers",
                "mean, sem: accuracy mean and standard error over runs",
            ],
            vec!["model", "count", "scenario", "mean", "sem"],
            report
                .aggregates
                .iter()
                .map(|a| vec![a.label.clone(), a.count.to_string(), a.scenario.to_string(), a.mean.to_string(), a.sem.to_string()])
                .collect(),
        ),
        PlotKind::AccuracyVsScenario => (
            &[
                "accuracy against number of injected negative outliers",
                "scenario: outliers added to each test set; mean, sem: accuracy over runs; model: model label",
            ],
            vec!["scenario", "mean", "sem", "model"],
            report
                .aggregates
                .iter()
                .map(|a| vec![a.scenario.to_string(), a.mean.to_string(), a.sem.to_string(), a.label.clone()])
                .collect(),
        ),
        PlotKind::GridHeatmap => {
            let rows: Vec<Vec<String>> = report
                .aggregates
                .iter()
                .filter_map(|a| match report.models.get(a.model) {
                    Some(ModelConfig::Baseline { params }) => {
                        let p = params.params();
                        let get = |i: usize| p.get(i).cloned().unwrap_or(("", String::new()));
                        let ((k1, v1), (k2, v2)) = (get(0), get(1));
                        Some(vec![
                            params.family().into(),
                            k1.into(),
                            v1,
                            k2.into(),
                            v2,
                            a.scenario.to_string(),
                            a.mean.to_string(),
                            a.sem.to_string(),
                        ])
                    }
                    _ => None,
                })
                .collect();
            if rows.is_empty() {
                return Err(Error::Report("grid heatmap needs baseline models".into()));
            }
            (
                &[
                    "baseline accuracy per hyper-parameter cell",
                    "family: classifier family; param1/value1, param2/value2: hyper-parameters",
                    "scenario: injected outliers; mean, sem: accuracy over runs",
                ],
                vec!["family", "param1", "value1", "param2", "value2", "scenario", "mean", "sem"],
                rows,
            )
        }
        PlotKind::ErrorHistogram => {
            if report.errors.is_empty() {
                return Err(Error::Report("error histogram needs a gated model".into()));
            }
            (
                &[
                    "per-spectrum reconstruction error of autoencoder gates",
                    "group: pos, neg or outlier; error: mean squared reconstruction error; threshold: gate threshold",
                ],
                vec!["model", "fold", "seed", "group", "error", "threshold"],
                report
                    .errors
                    .iter()
                    .map(|e| {
                        vec![
                            e.label.clone(),
                            e.fold.to_string(),
                            e.seed.to_string(),
                            e.group.clone(),
                            e.error.to_string(),
                            e.threshold.to_string(),
                        ]
                    })
                    .collect(),
            )
        }
    };
    for line in doc {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(model: usize, scenario: usize, accuracy: f64) -> RunRecord {
        RunRecord {
            model,
            label: format!("m{model}"),
            count: 0,
            fold: 0,
            seed: 0,
            scenario,
            train_size: 10,
            n_test: 4,
            n_correct: (accuracy * 4.0) as usize,
            accuracy,
            gate_flagged: None,
        }
    }

    #[test]
    fn aggregates_recompute_from_runs() {
        let runs = vec![run(0, 0, 1.0), run(0, 0, 1.0), run(0, 8, 0.5), run(0, 8, 0.75), run(1, 0, 1.0)];
        let agg = aggregate(&runs);
        assert_eq!(agg.len(), 3);
        assert_eq!((agg[0].mean, agg[0].sem, agg[0].runs), (1.0, 0.0, 2));
        assert_eq!(agg[1].mean, 0.625);
        assert!((agg[1].sem - 0.125).abs() < 1e-15);
    }

    #[test]
    fn plot_kind_parsing() {
        assert_eq!("grid_heatmap".parse::<PlotKind>().unwrap(), PlotKind::GridHeatmap);
        assert!("pie".parse::<PlotKind>().is_err());
    }
}

//! Classical binary classifiers and their hyper-parameter grids.

mod gnb;
mod knn;
mod svm;
mod tree;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gnb::{gnb_train, ClassStats, GnbModel, VARIANCE_FLOOR};
pub use knn::{KnnModel, Metric};
pub use svm::{svm_train, Kernel, LinearSvmModel, SvmConfig};
pub use tree::{tree_train, Node, SplitCriterion, TreeModel};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectra::{Label, SpectraSet};
use crate::splits::FoldPlan;
use crate::stats::mean_and_sem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineParams {
    Knn {
        k: usize,
        metric: Metric,
    },
    Svm {
        c: f64,
        #[serde(default = "linear")]
        kernel: Kernel,
    },
    Tree {
        max_depth: usize,
        #[serde(default = "gini")]
        criterion: SplitCriterion,
    },
    Gnb,
}

fn linear() -> Kernel {
    Kernel::Linear
}

fn gini() -> SplitCriterion {
    SplitCriterion::Gini
}

impl BaselineParams {
    pub fn family(&self) -> &'static str {
        match self {
            BaselineParams::Knn { .. } => "knn",
            BaselineParams::Svm { .. } => "svm",
            BaselineParams::Tree { .. } => "tree",
            BaselineParams::Gnb => "gnb",
        }
    }

    /// Hyper-parameter (name, value) pairs in display order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match *self {
            BaselineParams::Knn { k, metric } => {
                vec![("k", k.to_string()), ("metric", metric.as_str().into())]
            }
            BaselineParams::Svm { c, kernel } => vec![
                ("c", c.to_string()),
                ("kernel", format!("{kernel:?}").to_lowercase()),
            ],
            BaselineParams::Tree {
                max_depth,
                criterion,
            } => vec![
                ("max_depth", max_depth.to_string()),
                ("criterion", format!("{criterion:?}").to_lowercase()),
            ],
            BaselineParams::Gnb => Vec::new(),
        }
    }

    pub fn label(&self) -> String {
        let params: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        if params.is_empty() {
            self.family().to_string()
        } else {
            format!("{}({})", self.family(), params.join(","))
        }
    }

    pub fn fit(&self, x: &[&[f64]], y: &[Label], seed: u64) -> Result<BaselineModel> {
        Ok(match *self {
            BaselineParams::Knn { k, metric } => BaselineModel::Knn(KnnModel::fit(x, y, k, metric)?),
            BaselineParams::Svm { c, kernel } => BaselineModel::Svm(svm_train(
                x,
                y,
                &SvmConfig {
                    kernel,
                    seed,
                    ..SvmConfig::linear(c)
                },
            )?),
            BaselineParams::Tree {
                max_depth,
                criterion,
            } => BaselineModel::Tree(tree_train(x, y, max_depth, criterion)?),
            BaselineParams::Gnb => BaselineModel::Gnb(gnb_train(x, y)?),
        })
    }

    pub fn fit_set(&self, set: &SpectraSet, seed: u64) -> Result<BaselineModel> {
        self.fit(&set.features(), &set.labels(), seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineModel {
    Knn(KnnModel),
    Svm(LinearSvmModel),
    Tree(TreeModel),
    Gnb(GnbModel),
}

impl BaselineModel {
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            BaselineModel::Knn(m) => m.predict(x),
            BaselineModel::Svm(m) => m.predict(x),
            BaselineModel::Tree(m) => m.predict(x),
            BaselineModel::Gnb(m) => m.predict(x),
        }
    }

    pub fn accuracy(&self, set: &SpectraSet) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::Argument("accuracy of an empty set".into()));
        }
        let mut correct = 0;
        for s in set.iter() {
            if self.predict(s.intensities())? == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / set.len() as f64)
    }
}

pub fn knn_grid() -> Vec<BaselineParams> {
    [Metric::Euclidean, Metric::Manhattan]
        .into_iter()
        .flat_map(|metric| [1, 3, 5, 7, 9].map(|k| BaselineParams::Knn { k, metric }))
        .collect()
}

pub fn svm_grid() -> Vec<BaselineParams> {
    [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0, 30000.0]
        .map(|c| BaselineParams::Svm {
            c,
            kernel: Kernel::Linear,
        })
        .to_vec()
}

pub fn tree_grid() -> Vec<BaselineParams> {
    (1..=15)
        .map(|max_depth| BaselineParams::Tree {
            max_depth,
            criterion: SplitCriterion::Gini,
        })
        .collect()
}

/// Cross-validated accuracy of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub params: BaselineParams,
    pub runs: usize,
    pub mean: f64,
    pub sem: f64,
}

/// Evaluates every cell on every fold and seed of `plan`.
pub fn grid_search(
    set: &SpectraSet,
    plan: &FoldPlan,
    cells: &[BaselineParams],
    seeds: &[u64],
) -> Result<Vec<GridCell>> {
    if seeds.is_empty() {
        return Err(Error::Argument("grid search needs at least one seed".into()));
    }
    let folds: Vec<(SpectraSet, SpectraSet)> = plan
        .folds
        .iter()
        .map(|f| Ok((set.subset(&f.train)?, set.subset(&f.test)?)))
        .collect::<Result<_>>()?;
    cells
        .par_iter()
        .map(|params| {
            let mut accs = Vec::new();
            for (fi, (train, test)) in folds.iter().enumerate() {
                for &seed in seeds {
                    let s = rng::derive_seed(seed, &[fi as u64]);
                    let m = params
                        .fit_set(train, s)
                        .map_err(|e| e.context(format!("{} fold {fi} seed {seed}", params.label())))?;
                    accs.push(m.accuracy(test)?);
                }
            }
            let (mean, sem) = mean_and_sem(&accs);
            Ok(GridCell {
                params: *params,
                runs: accs.len(),
                mean,
                sem,
            })
        })
        .collect()
}

/// One row per cell: `family,param1,value1,param2,value2,runs,mean,sem`.
pub fn write_grid_csv<W: Write>(writer: W, cells: &[GridCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["family", "param1", "value1", "param2", "value2", "runs", "mean", "sem"])?;
    for c in cells {
        let p = c.params.params();
        let get = |i: usize| p.get(i).cloned().unwrap_or(("", String::new()));
        let (k1, v1) = get(0);
        let (k2, v2) = get(1);
        w.write_record([
            c.params.family(),
            k1,
            &v1,
            k2,
            &v2,
            &c.runs.to_string(),
            &c.mean.to_string(),
            &c.sem.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

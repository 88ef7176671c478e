//! Stratified experimental/validation split, cross-validation folds and
//! outlier-injection test scenarios.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectra::{Label, SpectraSet};

pub const NUM_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Index bookkeeping for one stratified 75:25 split followed by five
/// stratified folds over the experimental portion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub experimental: Vec<usize>,
    pub validation: Vec<usize>,
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Splits `n` items into `parts` chunks whose sizes differ by at most one,
/// the larger chunks first.
fn chunk_sizes(n: usize, parts: usize) -> Vec<usize> {
    let (base, rem) = (n / parts, n % parts);
    (0..parts).map(|i| base + usize::from(i < rem)).collect()
}

pub fn make_fold_plan(set: &SpectraSet, seed: u64) -> Result<FoldPlan> {
    let mut rng = rng::stream(seed, &[0x5b11]);
    let mut experimental = Vec::new();
    let mut validation = Vec::new();
    let mut test_folds: Vec<Vec<usize>> = vec![Vec::new(); NUM_FOLDS];

    for label in [Label::Positive, Label::Negative] {
        let mut members: Vec<usize> = set
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == label)
            .map(|(i, _)| i)
            .collect();
        let n_val = members.len().div_ceil(4);
        if members.len() - n_val < NUM_FOLDS {
            return Err(Error::Stratification(format!(
                "class {label} has {} members; need at least {} after the validation split",
                members.len(),
                NUM_FOLDS
            )));
        }
        members.shuffle(&mut rng);
        let (val, exp) = members.split_at(n_val);
        validation.extend_from_slice(val);
        experimental.extend_from_slice(exp);
        let mut offset = 0;
        for (fold, size) in chunk_sizes(exp.len(), NUM_FOLDS).into_iter().enumerate() {
            test_folds[fold].extend_from_slice(&exp[offset..offset + size]);
            offset += size;
        }
    }
    if set.count(Label::Unlabeled) > 0 {
        return Err(Error::Stratification(
            "unlabeled spectra cannot be stratified".into(),
        ));
    }

    experimental.sort_unstable();
    validation.sort_unstable();
    let folds = test_folds
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = experimental
                .iter()
                .copied()
                .filter(|i| test.binary_search(i).is_err())
                .collect();
            Fold { train, test }
        })
        .collect();
    Ok(FoldPlan {
        seed,
        experimental,
        validation,
        folds,
    })
}

/// Number of negative outliers appended to a test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutlierScenario(pub usize);

impl OutlierScenario {
    pub const STANDARD: [OutlierScenario; 4] = [
        OutlierScenario(0),
        OutlierScenario(8),
        OutlierScenario(16),
        OutlierScenario(24),
    ];

    pub fn n_outliers(self) -> usize {
        self.0
    }
}

/// The test set followed by the first `n_outliers` corpus spectra of a
/// seeded shuffle, all labeled negative. Larger scenarios under the same
/// seed contain the smaller ones.
pub fn apply_scenario(
    test: &SpectraSet,
    corpus: &SpectraSet,
    scenario: OutlierScenario,
    seed: u64,
) -> Result<SpectraSet> {
    let n = scenario.n_outliers();
    if n > corpus.len() {
        return Err(Error::Argument(format!(
            "scenario needs {n} outliers but the corpus has {}",
            corpus.len()
        )));
    }
    if n == 0 {
        return Ok(test.clone());
    }
    if corpus.grid() != test.grid() && **corpus.grid() != **test.grid() {
        return Err(Error::Shape(
            "outlier corpus must be resampled to the test grid".into(),
        ));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng::stream(seed, &[0x0e7, 0x11e5]));
    let mut out = test.clone();
    for &i in &order[..n] {
        let mut s = corpus.spectra()[i].clone();
        s.label = Label::Negative;
        out.push(s)?;
    }
    Ok(out)
}

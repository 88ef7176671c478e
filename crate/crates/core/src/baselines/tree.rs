use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    Gini,
    InfoGain,
}

impl SplitCriterion {
    fn impurity(self, pos: usize, total: usize) -> f64 {
        if total == 0 {
            return 0.0;
        }
        let p = pos as f64 / total as f64;
        let q = 1.0 - p;
        match self {
            SplitCriterion::Gini => 1.0 - p * p - q * q,
            SplitCriterion::InfoGain => {
                let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
                h(p) + h(q)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: Label,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Taken when `x[feature] <= threshold`.
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: Node,
    pub max_depth: usize,
    width: usize,
}

impl TreeModel {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Leaf label and the number of splits traversed to reach it.
    pub fn predict_with_path(&self, x: &[f64]) -> Result<(Label, usize)> {
        if x.len() != self.width {
            return Err(Error::Shape(format!(
                "input width {} vs model width {}",
                x.len(),
                self.width
            )));
        }
        let mut node = &self.root;
        let mut steps = 0;
        loop {
            match node {
                Node::Leaf { label } => return Ok((*label, steps)),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                    steps += 1;
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.predict_with_path(x).map(|(l, _)| l)
    }
}

fn majority(pos: usize, total: usize) -> Label {
    // A tied node resolves positive.
    if 2 * pos >= total {
        Label::Positive
    } else {
        Label::Negative
    }
}

struct Builder<'a> {
    x: &'a [&'a [f64]],
    y: &'a [bool],
    criterion: SplitCriterion,
    max_depth: usize,
}

impl Builder<'_> {
    /// Greedy best split: the lowest weighted child impurity over every
    /// feature and every midpoint between consecutive distinct values.
    /// Earlier features and lower thresholds win ties.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let total = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i]).count();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = idx.to_vec();
        for f in 0..self.x[0].len() {
            sorted.sort_unstable_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_pos = 0;
            for k in 0..total - 1 {
                if self.y[sorted[k]] {
                    left_pos += 1;
                }
                let (lo, hi) = (self.x[sorted[k]][f], self.x[sorted[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = k + 1;
                let nr = total - nl;
                let score = (nl as f64 * self.criterion.impurity(left_pos, nl)
                    + nr as f64 * self.criterion.impurity(total_pos - left_pos, nr))
                    / total as f64;
                if best.is_none_or(|(s, _, _)| score < s - 1e-15) {
                    best = Some((score, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&self, idx: &[usize], depth: usize) -> Node {
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        let leaf = Node::Leaf {
            label: majority(pos, idx.len()),
        };
        if pos == 0 || pos == idx.len() || depth >= self.max_depth {
            return leaf;
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return leaf;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(&l, depth + 1)),
            right: Box::new(self.build(&r, depth + 1)),
        }
    }
}

/// Recursive greedy tree. A node becomes a leaf when pure, at the depth
/// limit, or when no feature takes two distinct values; zero-gain splits
/// are otherwise accepted so XOR-like structure can be reached.
pub fn tree_train(
    x: &[&[f64]],
    y: &[Label],
    max_depth: usize,
    criterion: SplitCriterion,
) -> Result<TreeModel> {
    if x.is_empty() {
        return Err(Error::Argument("no training data".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} spectra but {} labels", x.len(), y.len())));
    }
    let width = x[0].len();
    if x.iter().any(|v| v.len() != width) {
        return Err(Error::Shape("ragged training spectra".into()));
    }
    let yb: Vec<bool> = y.iter().map(|&l| l == Label::Positive).collect();
    let builder = Builder {
        x,
        y: &yb,
        criterion,
        max_depth,
    };
    let idx: Vec<usize> = (0..x.len()).collect();
    Ok(TreeModel {
        root: builder.build(&idx, 0),
        max_depth,
        width,
    })
}

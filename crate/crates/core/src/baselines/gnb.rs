use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Label;

/// Added to every per-feature variance so constant features stay finite.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub prior: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub positive: ClassStats,
    pub negative: ClassStats,
}

fn class_stats(x: &[&[f64]], n_total: usize) -> ClassStats {
    let n = x.len() as f64;
    let d = x[0].len();
    let mut means = vec![0.0; d];
    for v in x {
        for (m, e) in means.iter_mut().zip(v.iter()) {
            *m += e;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut variances = vec![0.0; d];
    for v in x {
        for ((s, e), m) in variances.iter_mut().zip(v.iter()).zip(&means) {
            *s += (e - m) * (e - m);
        }
    }
    variances.iter_mut().for_each(|s| *s = *s / n + VARIANCE_FLOOR);
    ClassStats {
        prior: n / n_total as f64,
        means,
        variances,
    }
}

impl ClassStats {
    fn log_joint(&self, x: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.prior.ln()
            + x.iter()
                .zip(&self.means)
                .zip(&self.variances)
                .map(|((v, m), s)| -0.5 * (ln_2pi + s.ln() + (v - m) * (v - m) / s))
                .sum::<f64>()
    }
}

pub fn gnb_train(x: &[&[f64]], y: &[Label]) -> Result<GnbModel> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} spectra but {} labels", x.len(), y.len())));
    }
    let pick = |l: Label| -> Vec<&[f64]> {
        x.iter().zip(y).filter(|(_, yl)| **yl == l).map(|(v, _)| *v).collect()
    };
    let (pos, neg) = (pick(Label::Positive), pick(Label::Negative));
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Argument("Gaussian naive Bayes needs both classes".into()));
    }
    let d = x[0].len();
    if x.iter().any(|v| v.len() != d) {
        return Err(Error::Shape("ragged training spectra".into()));
    }
    Ok(GnbModel {
        positive: class_stats(&pos, x.len()),
        negative: class_stats(&neg, x.len()),
    })
}

impl GnbModel {
    pub fn prior(&self, label: Label) -> f64 {
        match label {
            Label::Positive => self.positive.prior,
            _ => self.negative.prior,
        }
    }

    /// Log prior plus summed log densities for each class.
    pub fn log_joint(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.positive.means.len() {
            return Err(Error::Shape(format!(
                "input width {} vs model width {}",
                x.len(),
                self.positive.means.len()
            )));
        }
        Ok((self.positive.log_joint(x), self.negative.log_joint(x)))
    }

    /// Class with the larger log joint; ties resolve positive.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let (p, n) = self.log_joint(x)?;
        Ok(if p >= n { Label::Positive } else { Label::Negative })
    }
}

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectra::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// Listed so grids can name it; training rejects it.
    Rbf,
    /// Listed so grids can name it; training rejects it.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    #[serde(default = "default_kernel")]
    pub kernel: Kernel,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_kernel() -> Kernel {
    Kernel::Linear
}

fn default_epochs() -> usize {
    200
}

impl SvmConfig {
    pub fn linear(c: f64) -> Self {
        Self {
            c,
            kernel: Kernel::Linear,
            epochs: default_epochs(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub c: f64,
}

impl LinearSvmModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::Shape(format!(
                "input width {} vs model width {}",
                x.len(),
                self.w.len()
            )));
        }
        Ok(self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b)
    }

    /// Positive when `w·x + b >= 0`.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.decision(x)? >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        })
    }
}

/// Primal soft-margin SVM, `½‖w‖² + C·Σ hinge`, minimized by Pegasos-style
/// projected stochastic subgradient descent with `λ = 1/(C·n)`. The bias is
/// carried as an extra constant-one feature.
pub fn svm_train(x: &[&[f64]], y: &[Label], cfg: &SvmConfig) -> Result<LinearSvmModel> {
    if cfg.kernel != Kernel::Linear {
        return Err(Error::Argument(format!(
            "{:?} kernel is not supported; only the linear kernel is implemented",
            cfg.kernel
        )));
    }
    if !(cfg.c > 0.0) {
        return Err(Error::Argument(format!("C must be positive, got {}", cfg.c)));
    }
    if cfg.epochs == 0 {
        return Err(Error::Argument("epochs must be at least 1".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} spectra but {} labels", x.len(), y.len())));
    }
    let has = |l| y.contains(&l);
    if !has(Label::Positive) || !has(Label::Negative) {
        return Err(Error::Argument("SVM training needs both classes".into()));
    }
    let d = x[0].len();
    if x.iter().any(|v| v.len() != d) {
        return Err(Error::Shape("ragged training spectra".into()));
    }
    let n = x.len();
    let lambda = 1.0 / (cfg.c * n as f64);
    let radius = 1.0 / lambda.sqrt();
    let signs: Vec<f64> = y
        .iter()
        .map(|&l| if l == Label::Positive { 1.0 } else { -1.0 })
        .collect();

    // w = scale * v keeps the shrink step O(1).
    let mut v = vec![0.0; d + 1];
    let mut scale = 1.0;
    let mut norm_sq = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(cfg.seed, &[0x5e11]);
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let xi = x[i];
            let margin = signs[i]
                * scale
                * (v[..d].iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + v[d]);
            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|e| *e = 0.0);
                scale = 1.0;
                norm_sq = 0.0;
            } else {
                scale *= shrink;
                norm_sq *= shrink * shrink;
            }
            if margin < 1.0 {
                let step = eta * signs[i] / scale;
                let mut dot = 0.0;
                for (vj, xj) in v[..d].iter_mut().zip(xi) {
                    dot += *vj * xj;
                    *vj += step * xj;
                }
                dot += v[d];
                v[d] += step;
                let x_sq = xi.iter().map(|e| e * e).sum::<f64>() + 1.0;
                // ‖s(v + δx)‖² = ‖w‖² + 2 s² δ v·x + s² δ² ‖x‖²
                norm_sq += scale * scale * (2.0 * step * dot + step * step * x_sq);
            }
            if norm_sq > radius * radius {
                scale *= radius / norm_sq.sqrt();
                norm_sq = radius * radius;
            }
            if scale < 1e-100 {
                v.iter_mut().for_each(|e| *e *= scale);
                scale = 1.0;
            }
        }
    }
    let w: Vec<f64> = v.iter().map(|e| e * scale).collect();
    if w.iter().any(|e| !e.is_finite()) {
        return Err(Error::Divergence { epoch: cfg.epochs });
    }
    Ok(LinearSvmModel {
        b: w[d],
        w: w[..d].to_vec(),
        c: cfg.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(m: &LinearSvmModel, x: &[&[f64]], y: &[Label]) -> f64 {
        let ok = x
            .iter()
            .zip(y)
            .filter(|(v, l)| m.predict(v).unwrap() == **l)
            .count();
        ok as f64 / x.len() as f64
    }

    #[test]
    fn one_dimensional_separable() {
        let x: Vec<&[f64]> = vec![&[-1.0], &[1.0]];
        let y = [Label::Negative, Label::Positive];
        for c in [1.0, 10.0, 1000.0, 30000.0] {
            let m = svm_train(&x, &y, &SvmConfig::linear(c)).unwrap();
            assert_eq!(accuracy(&m, &x, &y), 1.0, "C = {c}");
        }
    }

    #[test]
    fn conflicting_duplicates_cap_accuracy() {
        let x: Vec<&[f64]> = vec![&[0.5, 0.5], &[0.5, 0.5]];
        let y = [Label::Negative, Label::Positive];
        let m = svm_train(&x, &y, &SvmConfig::linear(1.0)).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 0.5);
    }

    #[test]
    fn single_class_rejected() {
        let x: Vec<&[f64]> = vec![&[0.0], &[1.0]];
        let y = [Label::Positive, Label::Positive];
        assert!(matches!(
            svm_train(&x, &y, &SvmConfig::linear(1.0)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn nonlinear_kernels_unsupported() {
        let x: Vec<&[f64]> = vec![&[-1.0], &[1.0]];
        let y = [Label::Negative, Label::Positive];
        let cfg = SvmConfig {
            kernel: Kernel::Rbf,
            ..SvmConfig::linear(1.0)
        };
        assert!(svm_train(&x, &y, &cfg).is_err());
    }

    #[test]
    fn seeded_determinism() {
        let x: Vec<&[f64]> = vec![&[-1.0, 0.3], &[1.0, 0.1], &[-0.7, 0.9], &[0.8, -0.4]];
        let y = [Label::Negative, Label::Positive, Label::Negative, Label::Positive];
        let cfg = SvmConfig {
            seed: 4,
            ..SvmConfig::linear(10.0)
        };
        assert_eq!(svm_train(&x, &y, &cfg).unwrap(), svm_train(&x, &y, &cfg).unwrap());
    }
}

//! Synthetic two-class Gaussian-peak corpus with a shifted outlier family.

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::spectra::{min_max_normalize, Label, Source, SpectraSet, Spectrum, WavenumberGrid, MODEL_WIDTH};

/// Peak centers and widths are fractions of the wavenumber axis.
/// (center, width, relative height); heights scale with one concentration.
const SOLVENT_PEAKS: [(f64, f64, f64); 6] = [
    (0.10, 0.018, 1.0),
    (0.22, 0.015, 0.6),
    (0.33, 0.020, 0.8),
    (0.58, 0.018, 0.9),
    (0.70, 0.015, 0.5),
    (0.82, 0.022, 0.7),
];
const MARKER_PEAK: (f64, f64) = (0.46, 0.018);
/// Broad bands: one overlapping the marker, the rest where inliers are flat.
const OUTLIER_PEAKS: [(f64, f64); 4] = [(0.16, 0.03), (0.455, 0.03), (0.64, 0.03), (0.93, 0.03)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkParams {
    pub features: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_outliers: usize,
    /// Standard deviation of the additive white noise before normalization.
    pub noise: f64,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        Self {
            features: MODEL_WIDTH,
            n_positive: 154,
            n_negative: 76,
            n_outliers: 24,
            noise: 0.01,
        }
    }
}

impl BenchmarkParams {
    /// Same class sizes on a 100-point axis.
    pub fn small() -> Self {
        Self {
            features: 100,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features < 20 {
            return Err(Error::Argument(format!(
                "benchmark needs at least 20 features, got {}",
                self.features
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Argument(format!("noise level {} is invalid", self.noise)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    /// Positives then negatives, all labeled and normalized.
    pub spectra: SpectraSet,
    /// Negative spectra from the outlier family, marked as outliers.
    pub outliers: SpectraSet,
}

struct Painter {
    width: usize,
    scale: f64,
}

impl Painter {
    fn peak(&self, v: &mut [f64], center: f64, width: f64, amplitude: f64) {
        let c = center * self.scale;
        let w = width * self.scale;
        for (j, x) in v.iter_mut().enumerate() {
            let d = (j as f64 - c) / w;
            if d.abs() < 8.0 {
                *x += amplitude * (-0.5 * d * d).exp();
            }
        }
    }

    fn finish(&self, mut v: Vec<f64>, noise: f64, r: &mut Rng, grid: &Arc<WavenumberGrid>, label: Label, source: Source) -> Result<Spectrum> {
        if noise > 0.0 {
            let n = Normal::new(0.0, noise).expect("validated noise");
            for x in &mut v {
                *x += n.sample(r);
            }
        }
        debug_assert_eq!(v.len(), self.width);
        min_max_normalize(&Spectrum::new(grid.clone(), v, label, source)?)
    }
}

fn inlier(p: &Painter, r: &mut Rng, positive: bool) -> Vec<f64> {
    let mut v = vec![0.0; p.width];
    let concentration = r.random_range(0.7..1.0);
    for &(c, w, h) in &SOLVENT_PEAKS {
        let jitter = r.random_range(-0.0005..0.0005);
        p.peak(&mut v, c + jitter, w, concentration * h * r.random_range(0.97..1.03));
    }
    if positive {
        let jitter = r.random_range(-0.0005..0.0005);
        p.peak(&mut v, MARKER_PEAK.0 + jitter, MARKER_PEAK.1, r.random_range(0.5..1.0));
    }
    v
}

fn outlier(p: &Painter, r: &mut Rng) -> Vec<f64> {
    let mut v = vec![0.0; p.width];
    for (k, &(c, w)) in OUTLIER_PEAKS.iter().enumerate() {
        let jitter = r.random_range(-0.01..0.01);
        let amplitude = if k == 1 { r.random_range(0.8..1.0) } else { r.random_range(0.5..1.0) };
        p.peak(&mut v, c + jitter, w * r.random_range(0.8..1.2), amplitude);
    }
    v
}

pub fn gen_benchmark(params: &BenchmarkParams, seed: u64) -> Result<Benchmark> {
    params.validate()?;
    let grid = Arc::new(WavenumberGrid::linspace(400.0, 3400.0, params.features)?);
    let painter = Painter {
        width: params.features,
        scale: (params.features - 1) as f64,
    };
    let mut r = rng::stream(seed, &[0xbe7c]);
    let mut spectra = Vec::with_capacity(params.n_positive + params.n_negative);
    for (label, n) in [(Label::Positive, params.n_positive), (Label::Negative, params.n_negative)] {
        for _ in 0..n {
            let v = inlier(&painter, &mut r, label == Label::Positive);
            spectra.push(painter.finish(v, params.noise, &mut r, &grid, label, Source::Real)?);
        }
    }
    let mut outliers = Vec::with_capacity(params.n_outliers);
    for _ in 0..params.n_outliers {
        let v = outlier(&painter, &mut r);
        outliers.push(painter.finish(v, params.noise, &mut r, &grid, Label::Negative, Source::OutlierCorpus)?);
    }
    Ok(Benchmark {
        spectra: SpectraSet::new(grid.clone(), spectra)?,
        outliers: SpectraSet::new(grid, outliers)?,
    })
}

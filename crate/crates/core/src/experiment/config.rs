use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::benchmark::BenchmarkParams;
use crate::baselines::{knn_grid, svm_grid, tree_grid, BaselineParams};
use crate::error::{Error, Result};
use crate::neural::{LC_FIELDS, PAPER_EPOCHS};
use crate::splits::{OutlierScenario, NUM_FOLDS};
use crate::synthesis::{BlendSchedule, VaeSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataConfig {
    /// Spectra CSV files; relative paths resolve against the config file.
    Files {
        spectra: PathBuf,
        #[serde(default)]
        outliers: Option<PathBuf>,
    },
    /// The generated benchmark corpus.
    Benchmark {
        #[serde(default)]
        params: BenchmarkParams,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisSource {
    RealOnly,
    BlendedOnly,
    RealPlusBlended,
    VaeOnly,
    RealPlusVae,
}

impl SynthesisSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisSource::RealOnly => "real_only",
            SynthesisSource::BlendedOnly => "blended_only",
            SynthesisSource::RealPlusBlended => "real_plus_blended",
            SynthesisSource::VaeOnly => "vae_only",
            SynthesisSource::RealPlusVae => "real_plus_vae",
        }
    }

    pub fn includes_real(self) -> bool {
        matches!(
            self,
            SynthesisSource::RealOnly | SynthesisSource::RealPlusBlended | SynthesisSource::RealPlusVae
        )
    }

    pub fn uses_vae(self) -> bool {
        matches!(self, SynthesisSource::VaeOnly | SynthesisSource::RealPlusVae)
    }
}

/// Training-data composition. A count of 0 always means real data only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub source: SynthesisSource,
    #[serde(default)]
    pub count: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self::real_only()
    }
}

impl SynthesisConfig {
    pub fn real_only() -> Self {
        Self {
            source: SynthesisSource::RealOnly,
            count: 0,
        }
    }

    pub fn effective(self) -> Self {
        if self.count == 0 || self.source == SynthesisSource::RealOnly {
            Self::real_only()
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineFamily {
    Knn,
    Svm,
    Tree,
}

fn default_twostep_blended() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Baseline {
        params: BaselineParams,
    },
    /// Expands to every cell of the family's hyper-parameter grid.
    BaselineGrid {
        family: BaselineFamily,
    },
    Fcnn {
        #[serde(default)]
        synthesis: Option<SynthesisConfig>,
    },
    Lcnn {
        #[serde(default)]
        synthesis: Option<SynthesisConfig>,
    },
    /// One-class autoencoder trained on the positive training spectra.
    AeOcc {
        #[serde(default)]
        denoising: bool,
    },
    TwoStep {
        #[serde(default)]
        denoising: bool,
        #[serde(default = "default_twostep_blended")]
        blended: usize,
    },
}

impl ModelConfig {
    pub fn expand(&self) -> Vec<ModelConfig> {
        let grid = match self {
            ModelConfig::BaselineGrid { family } => match family {
                BaselineFamily::Knn => knn_grid(),
                BaselineFamily::Svm => svm_grid(),
                BaselineFamily::Tree => tree_grid(),
            },
            other => return vec![other.clone()],
        };
        grid.into_iter().map(|params| ModelConfig::Baseline { params }).collect()
    }

    pub fn label(&self) -> String {
        let with = |name: &str, s: &Option<SynthesisConfig>| match s.map(SynthesisConfig::effective) {
            Some(s) if s.source != SynthesisSource::RealOnly => format!("{name}({})", s.source.as_str()),
            _ => name.to_string(),
        };
        match self {
            ModelConfig::Baseline { params } => params.label(),
            ModelConfig::BaselineGrid { family } => format!("{family:?}_grid").to_lowercase(),
            ModelConfig::Fcnn { synthesis } => with("fcnn", synthesis),
            ModelConfig::Lcnn { synthesis } => with("lcnn", synthesis),
            ModelConfig::AeOcc { denoising: false } => "ae_occ".into(),
            ModelConfig::AeOcc { denoising: true } => "dae_occ".into(),
            ModelConfig::TwoStep { denoising, blended } => {
                let gate = if *denoising { "dae" } else { "ae" };
                format!("twostep({gate},blended={blended})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochProfile {
    /// 100,000 classifier and autoencoder epochs, 10,000 VAE epochs.
    Paper,
    /// 2,000 epochs for everything.
    Desk,
    Custom {
        classifier: usize,
        gate: usize,
        vae: usize,
    },
}

impl Default for EpochProfile {
    fn default() -> Self {
        EpochProfile::Desk
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Epochs {
    pub classifier: usize,
    pub gate: usize,
    pub vae: usize,
}

impl EpochProfile {
    pub fn resolve(self) -> Epochs {
        match self {
            EpochProfile::Paper => Epochs {
                classifier: PAPER_EPOCHS,
                gate: PAPER_EPOCHS,
                vae: 10_000,
            },
            EpochProfile::Desk => Epochs {
                classifier: 2_000,
                gate: 2_000,
                vae: 2_000,
            },
            EpochProfile::Custom { classifier, gate, vae } => Epochs { classifier, gate, vae },
        }
    }
}

/// Where models are evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Five-fold cross-validation over the experimental portion.
    #[default]
    Folds,
    /// Train on the whole experimental portion, test on the held-out
    /// validation portion.
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaeWidths {
    pub hidden: Vec<usize>,
    pub latent: usize,
}

fn default_scenarios() -> Vec<OutlierScenario> {
    OutlierScenario::STANDARD.to_vec()
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    /// Truncate spectra to this many leading features. Defaults to the
    /// model width for wider inputs.
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub fold_seed: u64,
    pub models: Vec<ModelConfig>,
    #[serde(default)]
    pub synthesis: SynthesisConfig,
    /// Synthetic counts to sweep; replaces `synthesis.count` when set.
    #[serde(default)]
    pub sweep: Option<Vec<usize>>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<OutlierScenario>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub epochs: EpochProfile,
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default)]
    pub evaluation: Evaluation,
    /// Subset of fold indices to run; all five by default.
    #[serde(default)]
    pub folds: Option<Vec<usize>>,
    #[serde(default)]
    pub blend_schedule: Option<BlendSchedule>,
    #[serde(default)]
    pub vae: Option<VaeWidths>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves relative data paths against its
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let (Some(dir), DataConfig::Files { spectra, outliers }) = (path.parent(), &mut cfg.data) {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            fix(spectra);
            if let Some(o) = outliers {
                fix(o);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let arg = |m: String| Err(Error::Argument(m));
        if self.models.is_empty() {
            return arg("config lists no models".into());
        }
        if self.seeds.is_empty() {
            return arg("config needs at least one seed".into());
        }
        if self.scenarios.is_empty() {
            return arg("config needs at least one scenario".into());
        }
        if let Some(w) = self.width {
            if w == 0 || w % LC_FIELDS != 0 {
                return arg(format!("width {w} must be a positive multiple of {LC_FIELDS}"));
            }
        }
        if let Some(folds) = &self.folds {
            if folds.is_empty() || folds.iter().any(|&f| f >= NUM_FOLDS) {
                return arg(format!("fold indices must lie in 0..{NUM_FOLDS}"));
            }
        }
        if let Some(lr) = self.learning_rate {
            if !(lr > 0.0 && lr.is_finite()) {
                return arg(format!("learning rate {lr} must be positive"));
            }
        }
        let e = self.epochs.resolve();
        if e.classifier == 0 || e.gate == 0 || e.vae == 0 {
            return arg("epoch counts must be positive".into());
        }
        if self.sweep.is_some() && self.synthesis.source == SynthesisSource::RealOnly {
            return arg("a synthesis sweep needs a synthetic source".into());
        }
        if let Some(v) = &self.vae {
            if v.hidden.is_empty() || v.latent == 0 || v.hidden.contains(&0) {
                return arg("VAE widths must be positive".into());
            }
        }
        if let Some(s) = &self.blend_schedule {
            BlendSchedule::new(s.pairs().to_vec())?;
        }
        Ok(())
    }

    pub fn resolved_models(&self) -> Vec<ModelConfig> {
        self.models.iter().flat_map(ModelConfig::expand).collect()
    }

    pub fn vae_spec(&self, width: usize) -> VaeSpec {
        match &self.vae {
            Some(v) => VaeSpec::mirrored(width, &v.hidden, v.latent),
            None if width >= 1024 => VaeSpec::standard(width),
            None => VaeSpec::mirrored(width, &[(width / 2).max(2), (width / 4).max(2)], (width / 10).max(2)),
        }
    }
}

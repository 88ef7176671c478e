use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::io::WeightsFile;
use crate::nn::{
    adam_step, Activation, AdamConfig, AdamState, ForwardCache, LayerSpec, Network, NetworkSpec,
    NetworkState,
};
use crate::rng::{self, Rng};
use crate::spectra::{Label, Source, SpectraSet, Spectrum, WavenumberGrid};

pub const VAE_FORMAT: &str = "raman-vae";
pub const VAE_VERSION: u32 = 1;

/// Encoder widths, latent size and decoder widths. The decoder hidden
/// widths are listed in the order they are applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaeSpec {
    pub input_width: usize,
    pub encoder_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub decoder_hidden: Vec<usize>,
}

impl VaeSpec {
    /// 512 → 128 → 32-dimensional latent, mirrored decoder.
    pub fn standard(input_width: usize) -> Self {
        Self::mirrored(input_width, &[512, 128], 32)
    }

    pub fn mirrored(input_width: usize, hidden: &[usize], latent_dim: usize) -> Self {
        Self {
            input_width,
            encoder_hidden: hidden.to_vec(),
            latent_dim,
            decoder_hidden: hidden.iter().rev().copied().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_width == 0 || self.latent_dim == 0 {
            return Err(Error::Shape("VAE widths must be positive".into()));
        }
        if self.encoder_hidden.is_empty() || self.decoder_hidden.is_empty() {
            return Err(Error::Shape("VAE needs at least one hidden layer each way".into()));
        }
        if self.encoder_hidden.iter().chain(&self.decoder_hidden).any(|&w| w == 0) {
            return Err(Error::Shape("VAE hidden widths must be positive".into()));
        }
        Ok(())
    }

    fn chain(widths: &[usize], hidden: Activation, last: Activation) -> Result<NetworkSpec> {
        let n = widths.len() - 1;
        NetworkSpec::new(
            (0..n)
                .map(|i| {
                    let act = if i + 1 == n { last } else { hidden };
                    LayerSpec::dense(widths[i], widths[i + 1], act)
                })
                .collect(),
        )
    }

    /// Encoder body, mean head, log-variance head, decoder.
    fn network_specs(&self) -> Result<[NetworkSpec; 4]> {
        self.validate()?;
        let mut enc = vec![self.input_width];
        enc.extend(&self.encoder_hidden);
        let h = *enc.last().unwrap();
        let mut dec = vec![self.latent_dim];
        dec.extend(&self.decoder_hidden);
        dec.push(self.input_width);
        let head = || Self::chain(&[h, self.latent_dim], Activation::Identity, Activation::Identity);
        Ok([
            Self::chain(&enc, Activation::Elu, Activation::Elu)?,
            head()?,
            head()?,
            Self::chain(&dec, Activation::Elu, Activation::Sigmoid)?,
        ])
    }
}

/// `½ Σ (exp γ + μ² − 1 − γ)` with `γ = log σ²`: the KL divergence from
/// `N(μ, diag σ²)` to the standard normal.
pub fn latent_loss(mean: &[f64], log_var: &[f64]) -> f64 {
    0.5 * mean
        .iter()
        .zip(log_var)
        .map(|(&m, &g)| g.exp() + m * m - 1.0 - g)
        .sum::<f64>()
}

/// `−Σ [x log p + (1 − x) log(1 − p)]` with `p = sigmoid(z)`, evaluated
/// from the logits.
fn reconstruction_loss(x: &[f64], logits: &[f64]) -> f64 {
    x.iter()
        .zip(logits)
        .map(|(&y, &z)| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeNetworks {
    pub encoder: Network,
    pub mean: Network,
    pub log_var: Network,
    pub decoder: Network,
}

impl VaeNetworks {
    pub fn init(spec: &VaeSpec, seed: u64) -> Result<Self> {
        let [e, m, g, d] = spec.network_specs()?;
        Ok(Self {
            encoder: Network::init(e, rng::derive_seed(seed, &[1])),
            mean: Network::init(m, rng::derive_seed(seed, &[2])),
            log_var: Network::init(g, rng::derive_seed(seed, &[3])),
            decoder: Network::init(d, rng::derive_seed(seed, &[4])),
        })
    }

    fn all(&self) -> [&Network; 4] {
        [&self.encoder, &self.mean, &self.log_var, &self.decoder]
    }

    fn all_mut(&mut self) -> [&mut Network; 4] {
        [&mut self.encoder, &mut self.mean, &mut self.log_var, &mut self.decoder]
    }

    pub fn encode(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.encoder.forward(x)?;
        Ok((self.mean.forward(&h)?, self.log_var.forward(&h)?))
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.decoder.forward(z)
    }

    fn is_finite(&self) -> bool {
        self.all().iter().all(|n| n.state().is_finite())
    }
}

/// Per-network gradient buffers in the same order as [`VaeNetworks`].
#[derive(Debug, Clone)]
pub struct VaeGradients(pub [NetworkState; 4]);

impl VaeGradients {
    fn zeros(nets: &VaeNetworks) -> Self {
        Self(nets.all().map(|n| NetworkState::zeros(n.spec())))
    }
}

#[derive(Default)]
struct Caches {
    encoder: ForwardCache,
    mean: ForwardCache,
    log_var: ForwardCache,
    decoder: ForwardCache,
}

/// Summed reconstruction and latent terms for one input with a fixed
/// reparameterization draw `eps`, accumulating gradients.
fn example_loss(
    nets: &VaeNetworks,
    x: &[f64],
    eps: &[f64],
    caches: &mut Caches,
    grads: &mut VaeGradients,
) -> Result<(f64, f64)> {
    nets.encoder.forward_cached(x, &mut caches.encoder)?;
    let h = caches.encoder.output().to_vec();
    nets.mean.forward_cached(&h, &mut caches.mean)?;
    nets.log_var.forward_cached(&h, &mut caches.log_var)?;
    let mu = caches.mean.output().to_vec();
    let gamma = caches.log_var.output().to_vec();
    let sd: Vec<f64> = gamma.iter().map(|g| (0.5 * g).exp()).collect();
    let z: Vec<f64> = mu.iter().zip(&sd).zip(eps).map(|((m, s), e)| m + s * e).collect();
    nets.decoder.forward_cached(&z, &mut caches.decoder)?;

    let recon = reconstruction_loss(x, caches.decoder.output_pre_activation());
    let latent = latent_loss(&mu, &gamma);

    let delta: Vec<f64> = caches.decoder.output().iter().zip(x).map(|(p, y)| p - y).collect();
    let [g_enc, g_mean, g_var, g_dec] = &mut grads.0;
    let dz = nets
        .decoder
        .backward_from_pre(&mut caches.decoder, &delta, g_dec, true)
        .expect("input gradient requested");
    let d_mu: Vec<f64> = dz.iter().zip(&mu).map(|(d, m)| d + m).collect();
    let d_gamma: Vec<f64> = (0..gamma.len())
        .map(|k| dz[k] * eps[k] * 0.5 * sd[k] + 0.5 * (gamma[k].exp() - 1.0))
        .collect();
    let dh_mean = nets
        .mean
        .backward(&mut caches.mean, &d_mu, g_mean, true)
        .expect("input gradient requested");
    let dh_var = nets
        .log_var
        .backward(&mut caches.log_var, &d_gamma, g_var, true)
        .expect("input gradient requested");
    let dh: Vec<f64> = dh_mean.iter().zip(&dh_var).map(|(a, b)| a + b).collect();
    nets.encoder.backward(&mut caches.encoder, &dh, g_enc, false);
    Ok((recon, latent))
}

/// Mean per-example loss over a batch with the given draws, and its exact
/// gradients. Exposed so the reparameterized objective can be checked.
pub fn vae_loss_and_gradients(
    nets: &VaeNetworks,
    inputs: &[&[f64]],
    eps: &[Vec<f64>],
) -> Result<(f64, VaeGradients)> {
    if inputs.is_empty() || inputs.len() != eps.len() {
        return Err(Error::Shape("one latent draw per input is required".into()));
    }
    let mut grads = VaeGradients::zeros(nets);
    let mut caches = Caches::default();
    let mut total = 0.0;
    for (x, e) in inputs.iter().zip(eps) {
        let (r, l) = example_loss(nets, x, e, &mut caches, &mut grads)?;
        total += r + l;
    }
    let b = inputs.len() as f64;
    for g in &mut grads.0 {
        g.scale(1.0 / b);
    }
    Ok((total / b, grads))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaeConfig {
    #[serde(default)]
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl VaeConfig {
    pub fn new(epochs: usize, seed: u64) -> Self {
        Self {
            adam: AdamConfig::default(),
            epochs,
            batch_size: 5,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaeEpoch {
    pub reconstruction: f64,
    pub latent: f64,
}

/// A VAE fitted to one class, able to decode new spectra of that class.
#[derive(Debug, Clone)]
pub struct TrainedVae {
    pub spec: VaeSpec,
    pub networks: VaeNetworks,
    pub label: Label,
    pub grid: Arc<WavenumberGrid>,
    pub history: Vec<VaeEpoch>,
}

fn normal_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Trains on a single-class set of min-max normalized spectra.
pub fn vae_train(set: &SpectraSet, spec: &VaeSpec, cfg: &VaeConfig) -> Result<TrainedVae> {
    spec.validate()?;
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::Argument("VAE epochs and batch size must be positive".into()));
    }
    cfg.adam.validate()?;
    let label = set
        .spectra()
        .first()
        .ok_or_else(|| Error::Argument("no spectra to train the VAE on".into()))?
        .label;
    if set.iter().any(|s| s.label != label) {
        return Err(Error::Label("VAE training data must be a single class".into()));
    }
    if set.width() != spec.input_width {
        return Err(Error::Shape(format!(
            "spectra have width {}, VAE expects {}",
            set.width(),
            spec.input_width
        )));
    }
    if set.iter().any(|s| s.intensities().iter().any(|v| !(0.0..=1.0).contains(v))) {
        return Err(Error::Argument("VAE inputs must be normalized to [0, 1]".into()));
    }

    let mut nets = VaeNetworks::init(spec, cfg.seed)?;
    let mut opts = nets.all().map(|n| AdamState::new(n.spec()));
    let mut grads = VaeGradients::zeros(&nets);
    let mut caches = Caches::default();
    let mut shuffle = rng::stream(cfg.seed, &[0x5417]);
    let mut draws = rng::stream(cfg.seed, &[0xe95]);
    let inputs = set.features();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut t = 0u64;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let (mut recon_sum, mut latent_sum) = (0.0, 0.0);
        for batch in order.chunks(cfg.batch_size) {
            for g in &mut grads.0 {
                g.fill(0.0);
            }
            for &i in batch {
                let eps = normal_vec(&mut draws, spec.latent_dim);
                let (r, l) = example_loss(&nets, inputs[i], &eps, &mut caches, &mut grads)?;
                recon_sum += r;
                latent_sum += l;
            }
            if !(recon_sum + latent_sum).is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1 });
            }
            let b = batch.len() as f64;
            t += 1;
            for ((net, g), opt) in nets.all_mut().into_iter().zip(&mut grads.0).zip(&mut opts) {
                g.scale(1.0 / b);
                adam_step(net.state_mut(), g, opt, t, &cfg.adam)?;
            }
        }
        if !nets.is_finite() {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
        let n = inputs.len() as f64;
        history.push(VaeEpoch {
            reconstruction: recon_sum / n,
            latent: latent_sum / n,
        });
    }
    Ok(TrainedVae {
        spec: spec.clone(),
        networks: nets,
        label,
        grid: set.grid().clone(),
        history,
    })
}

/// Decodes `n` standard-normal latent draws.
pub fn vae_generate(model: &TrainedVae, n: usize, seed: u64) -> Result<SpectraSet> {
    let mut draws = rng::stream(seed, &[0x9e4]);
    let mut out = SpectraSet::empty(model.grid.clone());
    for _ in 0..n {
        let z = normal_vec(&mut draws, model.spec.latent_dim);
        let v = model.networks.decode(&z)?;
        out.push(Spectrum::new(model.grid.clone(), v, model.label, Source::VaeGenerated)?)?;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct VaeFile {
    format: String,
    version: u32,
    spec: VaeSpec,
    label: Label,
    grid: WavenumberGrid,
    encoder: WeightsFile,
    mean: WeightsFile,
    log_var: WeightsFile,
    decoder: WeightsFile,
}

pub fn save_vae(path: impl AsRef<Path>, model: &TrainedVae) -> Result<()> {
    let n = &model.networks;
    let file = VaeFile {
        format: VAE_FORMAT.into(),
        version: VAE_VERSION,
        spec: model.spec.clone(),
        label: model.label,
        grid: (*model.grid).clone(),
        encoder: WeightsFile::new(&n.encoder),
        mean: WeightsFile::new(&n.mean),
        log_var: WeightsFile::new(&n.log_var),
        decoder: WeightsFile::new(&n.decoder),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn load_vae(path: impl AsRef<Path>) -> Result<TrainedVae> {
    let file: VaeFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if file.format != VAE_FORMAT || file.version != VAE_VERSION {
        return Err(Error::Format(format!(
            "not a version {VAE_VERSION} VAE file (format {:?}, version {})",
            file.format, file.version
        )));
    }
    let networks = VaeNetworks {
        encoder: file.encoder.into_network()?,
        mean: file.mean.into_network()?,
        log_var: file.log_var.into_network()?,
        decoder: file.decoder.into_network()?,
    };
    let expected = file.spec.network_specs()?;
    if networks.all().iter().zip(&expected).any(|(n, s)| n.spec() != s) {
        return Err(Error::Format("VAE weights do not match the stored spec".into()));
    }
    if file.grid.len() != file.spec.input_width {
        return Err(Error::Format("VAE grid does not match its input width".into()));
    }
    Ok(TrainedVae {
        spec: file.spec,
        networks,
        label: file.label,
        grid: Arc::new(file.grid),
        history: Vec::new(),
    })
}

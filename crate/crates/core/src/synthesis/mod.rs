//! Synthetic spectra: pairwise blends of real same-class spectra and
//! samples decoded from a variational autoencoder.

mod blend;
mod vae;

pub use blend::{blend, blend_classes, blend_pool, pool_size, BlendSchedule};
pub use vae::{
    latent_loss, load_vae, save_vae, vae_generate, vae_loss_and_gradients, vae_train, TrainedVae,
    VaeConfig, VaeEpoch, VaeGradients, VaeNetworks, VaeSpec, VAE_FORMAT, VAE_VERSION,
};

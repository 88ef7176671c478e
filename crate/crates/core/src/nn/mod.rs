//! Small dense / locally-connected network engine with exact backprop,
//! L1 regularization and Adam.

mod activation;
mod adam;
pub mod io;
mod layer;
mod loss;
mod network;
mod train;

pub use activation::{sigmoid, Activation};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use layer::{parameter_count, LayerKind, LayerSpec, NetworkSpec};
pub use loss::{loss_and_gradients, LossKind};
pub use network::{ForwardCache, LayerParams, Network, NetworkState};
pub use train::{train, train_with, Corruption, TrainConfig, TrainedNetwork};

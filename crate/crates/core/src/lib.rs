//! Raman spectral classification: baseline classifiers, dense and
//! locally-connected networks, synthetic spectra, autoencoder outlier gates
//! and the two-step gated classifier.

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod neural;
pub mod nn;
pub mod occ;
pub mod persist;
pub mod rng;
pub mod spectra;
pub mod splits;
pub mod stats;
pub mod synthesis;
pub mod twostep;

pub use error::{Error, ErrorClass, Result};
pub use spectra::{Label, Source, SpectraSet, Spectrum, WavenumberGrid};

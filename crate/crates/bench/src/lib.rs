//! Fixtures shared by the criterion benches.

use raman_core::experiment::{gen_benchmark, BenchmarkParams};
use raman_core::SpectraSet;

/// Benchmark corpus at the given feature width, outliers dropped.
pub fn corpus(features: usize, seed: u64) -> SpectraSet {
    let params = BenchmarkParams {
        features,
        ..BenchmarkParams::default()
    };
    gen_benchmark(&params, seed).expect("valid benchmark params").spectra
}

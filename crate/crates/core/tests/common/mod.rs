//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng as _;
use raman_core::nn::{loss_and_gradients, Activation, LayerSpec, LossKind, Network, NetworkSpec};
use raman_core::rng;

pub struct GradReport {
    pub description: String,
    pub checked: usize,
    pub worst_relative: f64,
}

/// Central-difference check of every parameter of `net`.
pub fn check_gradients(net: &mut Network, inputs: &[Vec<f64>], targets: &[Vec<f64>], loss: LossKind, h: f64) -> (usize, f64) {
    let xs: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
    let ts: Vec<&[f64]> = targets.iter().map(Vec::as_slice).collect();
    let (_, grads) = loss_and_gradients(net, &xs, &ts, loss).unwrap();
    let analytic: Vec<f64> = grads.iter().copied().collect();
    let mut worst: f64 = 0.0;
    for (p, &a) in analytic.iter().enumerate() {
        let orig = *net.state().iter().nth(p).unwrap();
        *net.state_mut().iter_mut().nth(p).unwrap() = orig + h;
        let up = loss_and_gradients(net, &xs, &ts, loss).unwrap().0;
        *net.state_mut().iter_mut().nth(p).unwrap() = orig - h;
        let down = loss_and_gradients(net, &xs, &ts, loss).unwrap().0;
        *net.state_mut().iter_mut().nth(p).unwrap() = orig;
        let numeric = (up - down) / (2.0 * h);
        let rel = (numeric - a).abs() / numeric.abs().max(a.abs()).max(1e-7);
        worst = worst.max(rel);
    }
    (analytic.len(), worst)
}

/// A random two- or three-layer net whose first layer is dense or locally
/// connected with L1 on, a given hidden activation, and a matching loss.
pub fn random_case(index: usize) -> (Network, Vec<Vec<f64>>, Vec<Vec<f64>>, LossKind, String) {
    let mut r = rng::stream(2024, &[index as u64]);
    let act = Activation::ALL[index % Activation::ALL.len()];
    let local = index % 2 == 0;
    let fields = r.random_range(2..4);
    let rf = r.random_range(2..4);
    let in_w = fields * rf;
    let first = if local {
        LayerSpec::locally_connected(in_w, fields, act).unwrap()
    } else {
        LayerSpec::dense(in_w, fields, act)
    }
    .with_l1(0.01);
    let mid = r.random_range(2..4);
    let (loss, out_w, out_act) = match index % 3 {
        0 => (LossKind::BinaryCrossEntropy, 1, Activation::Sigmoid),
        1 => (LossKind::MeanSquaredError, 2, act),
        _ => (LossKind::ReconstructionCrossEntropy, in_w, Activation::Sigmoid),
    };
    let spec = NetworkSpec::new(vec![
        first,
        LayerSpec::dense(fields, mid, Activation::ALL[(index / 5) % 5]).with_l1(0.005),
        LayerSpec::dense(mid, out_w, out_act),
    ])
    .unwrap();
    let mut net = Network::init(spec, index as u64);
    // Keep weights away from the L1 kink at zero.
    for w in net.state_mut().iter_mut() {
        if w.abs() < 1e-3 {
            *w += 0.01;
        }
    }
    let batch = 3;
    let inputs: Vec<Vec<f64>> = (0..batch).map(|_| (0..in_w).map(|_| r.random_range(0.0..1.0)).collect()).collect();
    let targets: Vec<Vec<f64>> = match loss {
        LossKind::BinaryCrossEntropy => (0..batch).map(|i| vec![(i % 2) as f64]).collect(),
        LossKind::MeanSquaredError => (0..batch).map(|_| (0..out_w).map(|_| r.random_range(-1.0..1.0)).collect()).collect(),
        LossKind::ReconstructionCrossEntropy => inputs.clone(),
    };
    let desc = format!(
        "{} first layer, {:?} hidden, {:?}",
        if local { "locally-connected" } else { "dense" },
        act,
        loss
    );
    (net, inputs, targets, loss, desc)
}

pub fn run_gradcheck(cases: usize) -> Vec<GradReport> {
    (0..cases)
        .map(|i| {
            let (mut net, xs, ts, loss, description) = random_case(i);
            let (checked, worst_relative) = check_gradients(&mut net, &xs, &ts, loss, 1e-5);
            GradReport {
                description,
                checked,
                worst_relative,
            }
        })
        .collect()
}

/// KL(N(μ, e^γ) ‖ N(0, 1)) by composite Simpson quadrature of
/// p(x)·(log p(x) − log q(x)) over μ ± 14σ.
pub fn kl_quadrature(mu: f64, gamma: f64) -> f64 {
    let sd = (0.5 * gamma).exp();
    let (a, b) = (mu - 14.0 * sd, mu + 14.0 * sd);
    let n = 40_000;
    let h = (b - a) / n as f64;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let f = |x: f64| {
        let z = (x - mu) / sd;
        let log_p = -0.5 * z * z - sd.ln() - 0.5 * ln2pi;
        let log_q = -0.5 * x * x - 0.5 * ln2pi;
        log_p.exp() * (log_p - log_q)
    };
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// 100 (μ, γ) pairs with μ ∈ [−3, 3], γ ∈ [−4, 3].
pub fn kl_pairs() -> Vec<(f64, f64)> {
    let mut r = rng::seeded(77);
    (0..100).map(|_| (r.random_range(-3.0..3.0), r.random_range(-4.0..3.0))).collect()
}

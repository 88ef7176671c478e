mod common;

use common::{check_gradients, kl_pairs, kl_quadrature, random_case, run_gradcheck};
use raman_core::nn::{Activation, LayerParams, LayerSpec, LossKind, Network, NetworkSpec, NetworkState};
use raman_core::synthesis::latent_loss;

#[test]
fn analytic_gradients_match_central_differences() {
    let reports = run_gradcheck(30);
    for r in &reports {
        assert!(r.worst_relative <= 1e-4, "{}: relative error {:e}", r.description, r.worst_relative);
    }
    let local = reports.iter().filter(|r| r.description.starts_with("locally")).count();
    assert!(local >= 10 && reports.len() - local >= 10);
}

#[test]
fn every_activation_is_covered() {
    for act in Activation::ALL {
        let covered = (0..30).any(|i| random_case(i).4.contains(&format!("{act:?} hidden")));
        assert!(covered, "{act:?}");
    }
}

/// A locally-connected layer equals a dense layer whose weights outside
/// the diagonal blocks are zero.
#[test]
fn locally_connected_equals_masked_dense() {
    let (fields, rf) = (4, 3);
    let lc_spec = NetworkSpec::new(vec![
        LayerSpec::locally_connected(fields * rf, fields, Activation::Tanh).unwrap(),
        LayerSpec::dense(fields, 1, Activation::Sigmoid),
    ])
    .unwrap();
    let lc = Network::init(lc_spec, 5);
    let mut dense_w = vec![0.0; fields * fields * rf];
    for j in 0..fields {
        for k in 0..rf {
            dense_w[j * fields * rf + j * rf + k] = lc.state().layers[0].weights[j * rf + k];
        }
    }
    let dense_spec = NetworkSpec::new(vec![
        LayerSpec::dense(fields * rf, fields, Activation::Tanh),
        LayerSpec::dense(fields, 1, Activation::Sigmoid),
    ])
    .unwrap();
    let state = NetworkState {
        layers: vec![
            LayerParams {
                weights: dense_w,
                bias: lc.state().layers[0].bias.clone(),
            },
            lc.state().layers[1].clone(),
        ],
    };
    let dense = Network::new(dense_spec, state).unwrap();
    for i in 0..10 {
        let x: Vec<f64> = (0..fields * rf).map(|k| ((i * 13 + k * 7) % 11) as f64 / 10.0).collect();
        let a = lc.forward(&x).unwrap()[0];
        let b = dense.forward(&x).unwrap()[0];
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn l1_subgradient_is_exact_away_from_zero() {
    let spec = NetworkSpec::new(vec![LayerSpec::dense(3, 1, Activation::Identity).with_l1(0.5)]).unwrap();
    let mut net = Network::new(
        spec,
        NetworkState {
            layers: vec![LayerParams {
                weights: vec![0.3, -0.2, 0.7],
                bias: vec![0.1],
            }],
        },
    )
    .unwrap();
    let (_, worst) = check_gradients(&mut net, &[vec![0.5, 0.1, 0.9]], &[vec![0.2]], LossKind::MeanSquaredError, 1e-5);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn latent_loss_matches_quadrature() {
    for (mu, gamma) in kl_pairs() {
        let closed = latent_loss(&[mu], &[gamma]);
        let numeric = kl_quadrature(mu, gamma);
        assert!((closed - numeric).abs() < 1e-6, "mu {mu} gamma {gamma}: {closed} vs {numeric}");
    }
    assert!((latent_loss(&[1.0], &[0.0]) - 0.5).abs() < 1e-15);
}

use serde::{Deserialize, Serialize};

use super::{Activation, ForwardCache, Network, NetworkState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Cross-entropy against a single 0/1 target.
    BinaryCrossEntropy,
    /// Per-feature cross-entropy against an input in [0, 1], averaged.
    ReconstructionCrossEntropy,
    /// Per-feature squared error, averaged.
    MeanSquaredError,
}

const CLAMP: f64 = 1e-12;

impl LossKind {
    pub fn check_target(self, target: &[f64]) -> Result<()> {
        match self {
            LossKind::BinaryCrossEntropy | LossKind::ReconstructionCrossEntropy => {
                if let Some(t) = target.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                    return Err(Error::Argument(format!(
                        "cross-entropy target {t} outside [0, 1]"
                    )));
                }
            }
            LossKind::MeanSquaredError => {
                if target.iter().any(|t| !t.is_finite()) {
                    return Err(Error::Argument("non-finite regression target".into()));
                }
            }
        }
        Ok(())
    }

    /// Per-example loss, writing `dL/dz` of the output layer into `delta`.
    /// Cross-entropy on a sigmoid output is evaluated from `z` directly so
    /// saturated outputs stay finite.
    pub fn evaluate(
        self,
        activation: Activation,
        z: &[f64],
        a: &[f64],
        target: &[f64],
        delta: &mut [f64],
    ) -> f64 {
        let n = a.len() as f64;
        let mut total = 0.0;
        match self {
            LossKind::BinaryCrossEntropy | LossKind::ReconstructionCrossEntropy => {
                for i in 0..a.len() {
                    let y = target[i];
                    if activation == Activation::Sigmoid {
                        let zi = z[i];
                        total += zi.max(0.0) - zi * y + (-zi.abs()).exp().ln_1p();
                        delta[i] = (a[i] - y) / n;
                    } else {
                        let ai = a[i].clamp(CLAMP, 1.0 - CLAMP);
                        total -= y * ai.ln() + (1.0 - y) * (1.0 - ai).ln();
                        let dl_da = (ai - y) / (ai * (1.0 - ai));
                        delta[i] = dl_da * activation.derivative(z[i], a[i]) / n;
                    }
                }
            }
            LossKind::MeanSquaredError => {
                for i in 0..a.len() {
                    let r = a[i] - target[i];
                    total += r * r;
                    delta[i] = 2.0 * r * activation.derivative(z[i], a[i]) / n;
                }
            }
        }
        total / n
    }
}

/// Mean per-example loss over the batch plus the L1 penalty, with exact
/// gradients of that total.
pub fn loss_and_gradients(
    net: &Network,
    inputs: &[&[f64]],
    targets: &[&[f64]],
    loss: LossKind,
) -> Result<(f64, NetworkState)> {
    if inputs.is_empty() {
        return Err(Error::Argument("empty batch".into()));
    }
    if inputs.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} inputs but {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let mut grads = NetworkState::zeros(net.spec());
    let mut cache = ForwardCache::default();
    let total = accumulate_batch(net, inputs, targets, loss, &mut cache, &mut grads)?;
    let b = inputs.len() as f64;
    grads.scale(1.0 / b);
    net.add_l1_gradient(&mut grads);
    Ok((total / b + net.l1_penalty(), grads))
}

/// Sums the per-example losses and unscaled gradients over a batch.
pub(crate) fn accumulate_batch(
    net: &Network,
    inputs: &[&[f64]],
    targets: &[&[f64]],
    loss: LossKind,
    cache: &mut ForwardCache,
    grads: &mut NetworkState,
) -> Result<f64> {
    let out_width = net.spec().output_width();
    if loss == LossKind::BinaryCrossEntropy && out_width != 1 {
        return Err(Error::Shape(format!(
            "binary cross-entropy needs a single output, network has {out_width}"
        )));
    }
    let act = net.spec().output_activation();
    let mut delta = vec![0.0; out_width];
    let mut total = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        if t.len() != out_width {
            return Err(Error::Shape(format!(
                "target width {} does not match output width {out_width}",
                t.len()
            )));
        }
        loss.check_target(t)?;
        net.forward_cached(x, cache)?;
        total += loss.evaluate(
            act,
            cache.output_pre_activation(),
            cache.output(),
            t,
            &mut delta,
        );
        net.backward_from_pre(cache, &delta, grads, false);
    }
    Ok(total)
}

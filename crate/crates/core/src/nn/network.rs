use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{LayerKind, LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// Dense: row-major `out x in`. Locally connected: `out` blocks of
    /// `receptive_field` weights, block `j` covering inputs `j*field..`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Trainable parameters of a network; also used for gradients and
/// optimizer moments, which share the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub layers: Vec<LayerParams>,
}

impl NetworkState {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self {
            layers: spec
                .layers()
                .iter()
                .map(|l| LayerParams {
                    weights: vec![0.0; l.weight_count()],
                    bias: vec![0.0; l.out_width],
                })
                .collect(),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(spec: &NetworkSpec, rng: &mut Rng) -> Self {
        let mut state = Self::zeros(spec);
        for (l, p) in spec.layers().iter().zip(&mut state.layers) {
            let (fan_in, fan_out) = l.fans();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut p.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        state
    }

    pub fn check_shapes(&self, spec: &NetworkSpec) -> Result<()> {
        if self.layers.len() != spec.layers().len() {
            return Err(Error::Shape(format!(
                "state has {} layers, spec has {}",
                self.layers.len(),
                spec.layers().len()
            )));
        }
        for (i, (l, p)) in spec.layers().iter().zip(&self.layers).enumerate() {
            if p.weights.len() != l.weight_count() || p.bias.len() != l.out_width {
                return Err(Error::Shape(format!(
                    "layer {i}: expected {} weights and {} biases, found {} and {}",
                    l.weight_count(),
                    l.out_width,
                    p.weights.len(),
                    p.bias.len()
                )));
            }
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|p| p.weights.len() + p.bias.len())
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|p| p.weights.iter().chain(p.bias.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|p| p.weights.iter_mut().chain(p.bias.iter_mut()))
    }

    pub fn fill(&mut self, value: f64) {
        self.iter_mut().for_each(|v| *v = value);
    }

    pub fn scale(&mut self, factor: f64) {
        self.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// Per-layer activations and pre-activations from one forward pass, plus
/// scratch space reused by the backward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// `acts[0]` is the input, `acts[l + 1]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn output_pre_activation(&self) -> &[f64] {
        self.pre.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn activations(&self, layer: usize) -> &[f64] {
        &self.acts[layer + 1]
    }

    fn ensure(&mut self, spec: &NetworkSpec) {
        let n = spec.layers().len();
        if self.pre.len() == n && self.acts.len() == n + 1 {
            return;
        }
        self.acts = std::iter::once(vec![0.0; spec.input_width()])
            .chain(spec.layers().iter().map(|l| vec![0.0; l.out_width]))
            .collect();
        self.pre = spec.layers().iter().map(|l| vec![0.0; l.out_width]).collect();
        self.delta = self.pre.clone();
    }
}

fn layer_forward(l: &LayerSpec, p: &LayerParams, x: &[f64], z: &mut [f64], a: &mut [f64]) {
    match l.kind {
        LayerKind::Dense => {
            for (j, row) in p.weights.chunks_exact(l.in_width).enumerate() {
                z[j] = p.bias[j] + dot(row, x);
            }
        }
        LayerKind::LocallyConnected { receptive_field } => {
            for (j, (w, field)) in p
                .weights
                .chunks_exact(receptive_field)
                .zip(x.chunks_exact(receptive_field))
                .enumerate()
            {
                z[j] = p.bias[j] + dot(w, field);
            }
        }
    }
    for (ai, &zi) in a.iter_mut().zip(z.iter()) {
        *ai = l.activation.apply(zi);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Accumulates parameter gradients for one layer given `delta = dL/dz`,
/// optionally writing `dL/dx` into `grad_in`.
fn layer_backward(
    l: &LayerSpec,
    p: &LayerParams,
    x: &[f64],
    delta: &[f64],
    g: &mut LayerParams,
    grad_in: Option<&mut [f64]>,
) {
    for (gb, d) in g.bias.iter_mut().zip(delta) {
        *gb += d;
    }
    match l.kind {
        LayerKind::Dense => {
            for (j, grow) in g.weights.chunks_exact_mut(l.in_width).enumerate() {
                let d = delta[j];
                if d != 0.0 {
                    for (gw, xi) in grow.iter_mut().zip(x) {
                        *gw += d * xi;
                    }
                }
            }
            if let Some(gi) = grad_in {
                gi.fill(0.0);
                for (j, row) in p.weights.chunks_exact(l.in_width).enumerate() {
                    let d = delta[j];
                    if d != 0.0 {
                        for (g, w) in gi.iter_mut().zip(row) {
                            *g += w * d;
                        }
                    }
                }
            }
        }
        LayerKind::LocallyConnected { receptive_field } => {
            for ((gw, field), d) in g
                .weights
                .chunks_exact_mut(receptive_field)
                .zip(x.chunks_exact(receptive_field))
                .zip(delta)
            {
                for (g, xi) in gw.iter_mut().zip(field) {
                    *g += d * xi;
                }
            }
            if let Some(gi) = grad_in {
                for ((gi, w), d) in gi
                    .chunks_exact_mut(receptive_field)
                    .zip(p.weights.chunks_exact(receptive_field))
                    .zip(delta)
                {
                    for (g, wi) in gi.iter_mut().zip(w) {
                        *g = wi * d;
                    }
                }
            }
        }
    }
}

/// A spec together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    spec: NetworkSpec,
    state: NetworkState,
}

impl Network {
    pub fn new(spec: NetworkSpec, state: NetworkState) -> Result<Self> {
        state.check_shapes(&spec)?;
        Ok(Self { spec, state })
    }

    /// Glorot-initialized network from a seed.
    pub fn init(spec: NetworkSpec, seed: u64) -> Self {
        let state = NetworkState::glorot(&spec, &mut rng::stream(seed, &[0x1417]));
        Self { spec, state }
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut NetworkState {
        &mut self.state
    }

    pub fn into_parts(self) -> (NetworkSpec, NetworkState) {
        (self.spec, self.state)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut cache = ForwardCache::default();
        self.forward_cached(x, &mut cache)?;
        Ok(cache.output().to_vec())
    }

    pub fn forward_cached(&self, x: &[f64], cache: &mut ForwardCache) -> Result<()> {
        if x.len() != self.spec.input_width() {
            return Err(Error::Shape(format!(
                "input has width {}, network expects {}",
                x.len(),
                self.spec.input_width()
            )));
        }
        cache.ensure(&self.spec);
        cache.acts[0].copy_from_slice(x);
        for (i, (l, p)) in self.spec.layers().iter().zip(&self.state.layers).enumerate() {
            let (before, after) = cache.acts.split_at_mut(i + 1);
            layer_forward(l, p, &before[i], &mut cache.pre[i], &mut after[0]);
        }
        Ok(())
    }

    /// Backpropagates `dL/da` of the output layer. Gradients accumulate
    /// into `grads`; returns `dL/dx` when `input_grad` is set.
    pub fn backward(
        &self,
        cache: &mut ForwardCache,
        grad_output: &[f64],
        grads: &mut NetworkState,
        input_grad: bool,
    ) -> Option<Vec<f64>> {
        let last = self.spec.layers().len() - 1;
        let act = self.spec.layers()[last].activation;
        let delta: Vec<f64> = grad_output
            .iter()
            .zip(cache.pre[last].iter().zip(&cache.acts[last + 1]))
            .map(|(&g, (&z, &a))| g * act.derivative(z, a))
            .collect();
        self.backward_from_pre(cache, &delta, grads, input_grad)
    }

    /// Same as [`Network::backward`] but starting from `dL/dz` of the
    /// output layer, which lets losses fuse the output activation.
    pub fn backward_from_pre(
        &self,
        cache: &mut ForwardCache,
        delta_out: &[f64],
        grads: &mut NetworkState,
        input_grad: bool,
    ) -> Option<Vec<f64>> {
        let layers = self.spec.layers();
        let last = layers.len() - 1;
        cache.delta[last].copy_from_slice(delta_out);
        let mut input = None;
        for i in (0..=last).rev() {
            let (prev, cur) = cache.delta.split_at_mut(i);
            let delta = &cur[0];
            if i > 0 {
                let gin = &mut prev[i - 1];
                layer_backward(
                    &layers[i],
                    &self.state.layers[i],
                    &cache.acts[i],
                    delta,
                    &mut grads.layers[i],
                    Some(gin),
                );
                let act = layers[i - 1].activation;
                for ((g, &z), &a) in gin.iter_mut().zip(&cache.pre[i - 1]).zip(&cache.acts[i]) {
                    *g *= act.derivative(z, a);
                }
            } else if input_grad {
                let mut gin = vec![0.0; layers[0].in_width];
                layer_backward(
                    &layers[0],
                    &self.state.layers[0],
                    &cache.acts[0],
                    delta,
                    &mut grads.layers[0],
                    Some(&mut gin),
                );
                input = Some(gin);
            } else {
                layer_backward(
                    &layers[0],
                    &self.state.layers[0],
                    &cache.acts[0],
                    delta,
                    &mut grads.layers[0],
                    None,
                );
            }
        }
        input
    }

    /// Σ λ·‖W‖₁ over layers with a positive λ. Biases are not penalized.
    pub fn l1_penalty(&self) -> f64 {
        self.spec
            .layers()
            .iter()
            .zip(&self.state.layers)
            .filter(|(l, _)| l.l1_lambda > 0.0)
            .map(|(l, p)| l.l1_lambda * p.weights.iter().map(|w| w.abs()).sum::<f64>())
            .sum()
    }

    /// Adds the L1 subgradient λ·sign(w), taking sign(0) = 0.
    pub fn add_l1_gradient(&self, grads: &mut NetworkState) {
        for ((l, p), g) in self
            .spec
            .layers()
            .iter()
            .zip(&self.state.layers)
            .zip(&mut grads.layers)
        {
            if l.l1_lambda > 0.0 {
                for (gw, &w) in g.weights.iter_mut().zip(&p.weights) {
                    if w > 0.0 {
                        *gw += l.l1_lambda;
                    } else if w < 0.0 {
                        *gw -= l.l1_lambda;
                    }
                }
            }
        }
    }
}

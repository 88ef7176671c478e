use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerKind {
    Dense,
    /// Each output node sees its own contiguous, non-overlapping block of
    /// `receptive_field` inputs, with unshared weights.
    LocallyConnected { receptive_field: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_width: usize,
    pub out_width: usize,
    pub activation: Activation,
    #[serde(default)]
    pub l1_lambda: f64,
}

impl LayerSpec {
    pub fn dense(in_width: usize, out_width: usize, activation: Activation) -> Self {
        Self {
            kind: LayerKind::Dense,
            in_width,
            out_width,
            activation,
            l1_lambda: 0.0,
        }
    }

    /// Locally-connected layer with `out_width` fields tiling `in_width`.
    pub fn locally_connected(
        in_width: usize,
        out_width: usize,
        activation: Activation,
    ) -> Result<Self> {
        if out_width == 0 || in_width % out_width != 0 {
            return Err(Error::Shape(format!(
                "{in_width} inputs cannot be tiled by {out_width} non-overlapping fields"
            )));
        }
        Ok(Self {
            kind: LayerKind::LocallyConnected {
                receptive_field: in_width / out_width,
            },
            in_width,
            out_width,
            activation,
            l1_lambda: 0.0,
        })
    }

    pub fn with_l1(mut self, lambda: f64) -> Self {
        self.l1_lambda = lambda;
        self
    }

    pub fn receptive_field(&self) -> Option<usize> {
        match self.kind {
            LayerKind::Dense => None,
            LayerKind::LocallyConnected { receptive_field } => Some(receptive_field),
        }
    }

    pub fn weight_count(&self) -> usize {
        match self.kind {
            LayerKind::Dense => self.in_width * self.out_width,
            LayerKind::LocallyConnected { receptive_field } => self.out_width * receptive_field,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weight_count() + self.out_width
    }

    /// (fan_in, fan_out) used for weight initialization.
    pub fn fans(&self) -> (usize, usize) {
        match self.kind {
            LayerKind::Dense => (self.in_width, self.out_width),
            LayerKind::LocallyConnected { receptive_field } => (receptive_field, 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_width == 0 || self.out_width == 0 {
            return Err(Error::Shape("layer widths must be positive".into()));
        }
        if !(self.l1_lambda >= 0.0) || !self.l1_lambda.is_finite() {
            return Err(Error::Argument(format!(
                "l1_lambda must be a non-negative number, got {}",
                self.l1_lambda
            )));
        }
        if let LayerKind::LocallyConnected { receptive_field } = self.kind {
            if receptive_field == 0 || self.in_width != self.out_width * receptive_field {
                return Err(Error::Shape(format!(
                    "locally-connected layer needs in_width = out_width x field ({} != {} x {})",
                    self.in_width, self.out_width, receptive_field
                )));
            }
        }
        Ok(())
    }
}

/// Ordered layer topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            l.validate().map_err(|e| e.context(format!("layer {i}")))?;
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].out_width != w[1].in_width {
                return Err(Error::Shape(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    i,
                    w[0].out_width,
                    i + 1,
                    w[1].in_width
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].in_width
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].out_width
    }

    pub fn output_activation(&self) -> Activation {
        self.layers[self.layers.len() - 1].activation
    }

    pub fn activations(&self) -> Vec<Activation> {
        self.layers.iter().map(|l| l.activation).collect()
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.layers.clone()).map(|_| ())
    }
}

/// Dense layers contribute `in x out + out`, locally-connected layers
/// `out x (field + 1)`.
pub fn parameter_count(spec: &NetworkSpec) -> usize {
    spec.layers.iter().map(LayerSpec::parameter_count).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_dense_counts_three() {
        let spec = NetworkSpec::new(vec![LayerSpec::dense(2, 1, Activation::Sigmoid)]).unwrap();
        assert_eq!(parameter_count(&spec), 3);
    }

    #[test]
    fn lc_requires_exact_tiling() {
        assert!(LayerSpec::locally_connected(10, 3, Activation::Tanh).is_err());
        let l = LayerSpec::locally_connected(2470, 10, Activation::Tanh).unwrap();
        assert_eq!(l.receptive_field(), Some(247));
        assert_eq!(l.parameter_count(), 2480);
    }

    #[test]
    fn widths_must_chain() {
        let err = NetworkSpec::new(vec![
            LayerSpec::dense(4, 3, Activation::Tanh),
            LayerSpec::dense(2, 1, Activation::Sigmoid),
        ]);
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn negative_l1_rejected() {
        let l = LayerSpec::dense(2, 2, Activation::Relu).with_l1(-1.0);
        assert!(NetworkSpec::new(vec![l]).is_err());
    }
}

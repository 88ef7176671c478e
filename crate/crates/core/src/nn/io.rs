//! Versioned JSON weights files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Network, NetworkSpec, NetworkState};
use crate::error::{Error, Result};

pub const WEIGHTS_FORMAT: &str = "raman-weights";
pub const WEIGHTS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub format: String,
    pub version: u32,
    pub spec: NetworkSpec,
    pub state: NetworkState,
}

impl WeightsFile {
    pub fn new(net: &Network) -> Self {
        Self {
            format: WEIGHTS_FORMAT.into(),
            version: WEIGHTS_VERSION,
            spec: net.spec().clone(),
            state: net.state().clone(),
        }
    }

    /// Validates the header, the echoed spec and the parameter shapes.
    pub fn into_network(self) -> Result<Network> {
        if self.format != WEIGHTS_FORMAT {
            return Err(Error::Format(format!("not a weights file (format {:?})", self.format)));
        }
        if self.version != WEIGHTS_VERSION {
            return Err(Error::Format(format!(
                "unsupported weights version {} (expected {WEIGHTS_VERSION})",
                self.version
            )));
        }
        self.spec.validate()?;
        if !self.state.is_finite() {
            return Err(Error::Format("weights contain non-finite values".into()));
        }
        Network::new(self.spec, self.state)
    }
}

pub fn save_network(path: impl AsRef<Path>, net: &Network) -> Result<()> {
    let text = serde_json::to_string(&WeightsFile::new(net))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let text = std::fs::read_to_string(path)?;
    let file: WeightsFile = serde_json::from_str(&text)?;
    file.into_network()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LayerSpec};

    #[test]
    fn roundtrip_and_shape_validation() {
        let spec = NetworkSpec::new(vec![
            LayerSpec::locally_connected(6, 2, Activation::Tanh).unwrap().with_l1(1e-5),
            LayerSpec::dense(2, 1, Activation::Sigmoid),
        ])
        .unwrap();
        let net = Network::init(spec, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        save_network(&path, &net).unwrap();
        assert_eq!(load_network(&path).unwrap(), net);

        let mut file = WeightsFile::new(&net);
        file.state.layers[1].weights.pop();
        assert!(matches!(file.into_network(), Err(Error::Shape(_))));
        let mut file = WeightsFile::new(&net);
        file.version = 9;
        assert!(matches!(file.into_network(), Err(Error::Format(_))));
    }
}

//! Versioned JSON checkpoints: architecture header plus flat parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StudentError};
use crate::mlp::Mlp;

pub const FORMAT: &str = "teachkit-mlp";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub sizes: Vec<usize>,
    pub hidden_activation: String,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn from_net(net: &Mlp) -> Self {
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            sizes: net.sizes.clone(),
            hidden_activation: "tanh".into(),
            params: net.params(),
        }
    }

    pub fn into_net(self) -> Result<Mlp> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(StudentError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.hidden_activation != "tanh" || self.sizes.len() < 2 {
            return Err(StudentError::Checkpoint("unsupported architecture".into()));
        }
        let mut net = Mlp::new(&self.sizes, 0);
        if self.params.len() != net.num_params() {
            return Err(StudentError::Checkpoint(format!(
                "expected {} parameters, found {}",
                net.num_params(),
                self.params.len()
            )));
        }
        net.set_params(&self.params);
        Ok(net)
    }
}

pub fn save(net: &Mlp, path: &Path) -> Result<()> {
    teachkit_core::io::write_json(path, &Checkpoint::from_net(net))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Mlp> {
    let c: Checkpoint = teachkit_core::io::read_json(path)?;
    c.into_net()
}

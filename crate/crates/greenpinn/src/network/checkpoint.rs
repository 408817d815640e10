//! Checkpoint serialization.
//!
//! A checkpoint is a single JSON file holding the network spec, the init
//! seed, the layout map, and the flat value array. Values rely on the
//! shortest-round-trip decimal encoding, so reloading reproduces every f64
//! bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetworkSpec, ParamBlock, ParamSet};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub spec: NetworkSpec,
    pub seed: u64,
    pub layout: Vec<ParamBlock>,
    pub values: Vec<f64>,
}

impl Checkpoint {
    pub fn new(spec: &NetworkSpec, seed: u64, params: &ParamSet) -> Self {
        Checkpoint {
            spec: spec.clone(),
            seed,
            layout: params.layout.clone(),
            values: params.values.clone(),
        }
    }

    pub fn into_params(self) -> ParamSet {
        ParamSet::from_parts(self.values, self.layout)
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> crate::Result<()> {
    let json = serde_json::to_string(ckpt)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> crate::Result<Checkpoint> {
    let data = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&data)?)
}

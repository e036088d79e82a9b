//! Dataset file format.
//!
//! ```json
//! {"T": 2, "M": 1, "k": 2,
//!  "constraints": [[{"kind": "affine", "alpha": [1, 2], "b": 1, "a_t": 0, "beta": [0, 0]}], ...],
//!  "strategies":  [[{"samples": [[0.5, 0.25]]}], ...]}
//! ```
//!
//! `constraints[t][i]` and `strategies[t][i]` are indexed by period then agent.
//! Doubles are written in shortest round-trip form, so write/read is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ConstraintFunction, EmpiricalStrategy, RpDataset};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    #[serde(rename = "T")]
    t: usize,
    #[serde(rename = "M")]
    m: usize,
    k: usize,
    constraints: Vec<Vec<ConstraintFunction>>,
    strategies: Vec<Vec<EmpiricalStrategy>>,
}

pub fn dataset_to_json(d: &RpDataset) -> String {
    let file = DatasetFile {
        t: d.periods(),
        m: d.agents(),
        k: d.action_dim(),
        constraints: d.constraints().to_vec(),
        strategies: d.strategies().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("dataset serialization cannot fail")
}

pub fn dataset_from_json(text: &str) -> Result<RpDataset> {
    let file: DatasetFile = serde_json::from_str(text)?;
    if file.constraints.len() != file.t || file.strategies.len() != file.t {
        return invalid(format!("field T = {} does not match the number of periods", file.t));
    }
    if file.constraints.iter().any(|row| row.len() != file.m) || file.strategies.iter().any(|row| row.len() != file.m) {
        return invalid(format!("field M = {} does not match the number of agents", file.m));
    }
    if file.constraints.iter().flatten().any(|c| c.dim() != file.k) {
        return invalid(format!("field k = {} does not match constraint dimensions", file.k));
    }
    RpDataset::new(file.constraints, file.strategies)
}

pub fn write_dataset(path: &Path, d: &RpDataset) -> Result<()> {
    std::fs::write(path, dataset_to_json(d))?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<RpDataset> {
    dataset_from_json(&std::fs::read_to_string(path)?)
}

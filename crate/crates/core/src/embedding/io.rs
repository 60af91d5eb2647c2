//! Versioned JSON form of a trained model.
//!
//! ```json
//! {"version":1,"kind":"regular","hidden_dim":6,"input_dim":1,
//!  "params":{"w_z":[...],"u_z":[...],...,"input_mean":[...],"input_scale":[...],
//!            "time_scale":[...],"h0":[...]}}
//! ```
//!
//! Matrices are flattened row-major. Numbers are written with the shortest
//! decimal form that reads back to the identical double.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layout::Layout;
use super::EmbeddingModel;
use crate::error::{RenalError, Result};
use crate::sequence::SequenceKind;

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: u32,
    kind: SequenceKind,
    hidden_dim: usize,
    input_dim: usize,
    params: BTreeMap<String, Vec<f64>>,
}

fn bad(msg: impl Into<String>) -> RenalError {
    RenalError::invalid(format!("model document: {}", msg.into()))
}

impl EmbeddingModel {
    fn to_doc(&self) -> ModelDoc {
        let mut params: BTreeMap<String, Vec<f64>> = self
            .layout
            .blocks()
            .into_iter()
            .map(|b| (b.name.to_string(), self.params[b.range()].to_vec()))
            .collect();
        params.insert("input_mean".into(), self.input_mean.clone());
        params.insert("input_scale".into(), self.input_scale.clone());
        params.insert("time_scale".into(), vec![self.time_scale]);
        params.insert("h0".into(), self.h0.clone());
        ModelDoc {
            version: FORMAT_VERSION,
            kind: self.kind,
            hidden_dim: self.hidden_dim(),
            input_dim: self.input_dim(),
            params,
        }
    }

    fn from_doc(mut doc: ModelDoc) -> Result<Self> {
        if doc.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported version {}", doc.version)));
        }
        let mut model = Self::new(doc.kind, doc.input_dim, doc.hidden_dim)?;
        let mut take = |name: &str, len: usize| -> Result<Vec<f64>> {
            let v = doc.params.remove(name).ok_or_else(|| bad(format!("missing `{name}`")))?;
            if v.len() != len {
                return Err(bad(format!("`{name}` has {} entries, expected {len}", v.len())));
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(bad(format!("`{name}` contains non-finite values")));
            }
            Ok(v)
        };
        let layout: Layout = model.layout.clone();
        for b in layout.blocks() {
            let v = take(b.name, b.len())?;
            model.params[b.range()].copy_from_slice(&v);
        }
        model.input_mean = take("input_mean", doc.input_dim)?;
        model.input_scale = take("input_scale", doc.input_dim)?;
        model.time_scale = take("time_scale", 1)?[0];
        model.h0 = take("h0", doc.hidden_dim)?;
        if let Some(extra) = doc.params.keys().next() {
            return Err(bad(format!("unknown parameter `{extra}`")));
        }
        if model.input_scale.iter().any(|s| *s <= 0.0) || model.time_scale <= 0.0 {
            return Err(bad("scales must be positive"));
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| RenalError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RenalError::io(path, e))?;
        Self::from_json(&text)
    }
}

//! JSON file formats for instances and subsets.
//!
//! Instance: `{"d": int, "vectors": [[...], ...], "meta": {...}}` with every
//! real written to 17 significant digits. Subset: a sorted JSON array of
//! 0-based indices.

use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::instance::{Instance, InstanceError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("subset is not a strictly ascending list of indices")]
    UnsortedSubset,
}

#[derive(Deserialize)]
struct InstanceFile {
    d: usize,
    vectors: Vec<Vec<f64>>,
    #[serde(default)]
    meta: Option<Value>,
}

/// Formats a real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes an instance; `meta` is emitted only when it is a JSON object.
pub fn instance_to_json(inst: &Instance, meta: Option<&Value>) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"d\": {}, \"vectors\": [", inst.dim());
    for (i, v) in inst.vectors().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for (j, x) in v.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&format_real(*x));
        }
        out.push(']');
    }
    out.push(']');
    if let Some(meta @ Value::Object(_)) = meta {
        let _ = write!(out, ", \"meta\": {meta}");
    }
    out.push_str("}\n");
    out
}

/// Parses an instance file. The result is not yet validated and `alpha` is
/// recomputed from the vectors.
pub fn instance_from_json(text: &str) -> Result<(Instance, Option<Value>), FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let inst = Instance::new(file.d, file.vectors)?;
    Ok((inst, file.meta))
}

pub fn subset_to_json(subset: &[usize]) -> String {
    let mut s = serde_json::to_string(subset).expect("index list serializes");
    s.push('\n');
    s
}

pub fn subset_from_json(text: &str) -> Result<Vec<usize>, FormatError> {
    let s: Vec<usize> = serde_json::from_str(text)?;
    if s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FormatError::UnsortedSubset);
    }
    Ok(s)
}

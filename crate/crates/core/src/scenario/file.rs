//! JSON exchange format for scenarios.
//!
//! ```json
//! {
//!   "dim": 4,
//!   "pre": [[1.0, 0.0], ...],
//!   "post": [[0.3333333333333333, 0.0], ...],
//!   "projectors": [{ "label": "alpha", "state": [[0.0, 0.0], ...] }],
//!   "contexts": [["alpha", "beta+", "gamma+", "delta+"]],
//!   "exclusive_pairs": [["delta+", "delta-"]],
//!   "metadata": { "name": "cabello" }
//! }
//! ```
//!
//! Amplitudes are `[re, im]` pairs written in shortest round-trip decimal
//! form, so `load(save(s))` reproduces every amplitude bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Context, LabeledProjector, PrePostScenario, Result, ScenarioError};
use crate::hilbert::{Amplitude, StateVector, TOL_CHECK};

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Ignore unknown fields instead of rejecting them.
    pub lax: bool,
    /// Normalization tolerance for the loaded states.
    pub tol: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            lax: false,
            tol: TOL_CHECK,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    dim: usize,
    pre: Vec<[f64; 2]>,
    post: Vec<[f64; 2]>,
    projectors: Vec<RawProjector>,
    contexts: Vec<Vec<String>>,
    #[serde(default)]
    exclusive_pairs: Vec<[String; 2]>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct RawProjector {
    label: String,
    state: Vec<[f64; 2]>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

fn encode(s: &StateVector) -> Vec<[f64; 2]> {
    s.amps().iter().map(|a| [a.re, a.im]).collect()
}

fn decode(name: &str, raw: &[[f64; 2]], dim: usize, tol: f64) -> Result<StateVector> {
    if raw.len() != dim {
        return Err(ScenarioError::WrongDimension {
            name: name.to_string(),
            got: raw.len(),
            expected: dim,
        });
    }
    let amps = raw.iter().map(|&[re, im]| Amplitude::new(re, im)).collect();
    StateVector::with_tolerance(amps, tol).map_err(|source| ScenarioError::BadState {
        name: name.to_string(),
        source,
    })
}

/// Serializes a scenario as pretty-printed JSON with a trailing newline.
pub fn save(s: &PrePostScenario) -> String {
    let raw = RawScenario {
        dim: s.dim(),
        pre: encode(s.pre()),
        post: encode(s.post()),
        projectors: s
            .projectors()
            .iter()
            .map(|p| RawProjector {
                label: p.label().to_string(),
                state: encode(p.state()),
                extra: BTreeMap::new(),
            })
            .collect(),
        contexts: s.contexts().iter().map(|c| c.members.clone()).collect(),
        exclusive_pairs: s
            .exclusive_pairs()
            .iter()
            .map(|(a, b)| [a.clone(), b.clone()])
            .collect(),
        metadata: s.metadata().clone(),
        extra: BTreeMap::new(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("scenario serialization cannot fail");
    out.push('\n');
    out
}

pub fn load(text: &str) -> Result<PrePostScenario> {
    load_with(text, LoadOptions::default())
}

pub fn load_with(text: &str, opts: LoadOptions) -> Result<PrePostScenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    if !opts.lax {
        if let Some(field) = raw.extra.keys().next() {
            return Err(ScenarioError::UnknownField {
                path: "scenario".into(),
                field: field.clone(),
            });
        }
        for (i, p) in raw.projectors.iter().enumerate() {
            if let Some(field) = p.extra.keys().next() {
                return Err(ScenarioError::UnknownField {
                    path: format!("projectors[{i}]"),
                    field: field.clone(),
                });
            }
        }
    }

    let dim = raw.dim;
    let pre = decode("pre", &raw.pre, dim, opts.tol)?;
    let post = decode("post", &raw.post, dim, opts.tol)?;
    let projectors = raw
        .projectors
        .iter()
        .map(|p| decode(&p.label, &p.state, dim, opts.tol).map(|st| LabeledProjector::new(&p.label, st)))
        .collect::<Result<Vec<_>>>()?;
    let contexts = raw.contexts.into_iter().map(Context::new).collect();
    let pairs = raw.exclusive_pairs.into_iter().map(|[a, b]| (a, b)).collect();
    PrePostScenario::new(pre, post, projectors, contexts, pairs, raw.metadata)
}

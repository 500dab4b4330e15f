use std::collections::HashMap;

use thiserror::Error;

use super::Slot;
use crate::cost::{rational_from_json, Cost, Rational};
use crate::liveness::{VarId, VarTable};
use crate::spl::{EdgeKey, SplGraph, VertexId};

/// Edge cost oracle `c(e, f)`. Implementations see `f` only through its
/// restriction to the variables live on `e`.
pub trait CostModel {
    fn edge_cost(&self, edge: EdgeKey, live: &[(VarId, Slot)]) -> Cost;

    /// True when any spill of a live variable costs `+inf`.
    fn forbids_spill(&self) -> bool {
        false
    }

    /// True when costs are unchanged by permuting register names.
    fn renaming_invariant(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroCost;

impl CostModel for ZeroCost {
    fn edge_cost(&self, _: EdgeKey, _: &[(VarId, Slot)]) -> Cost {
        Cost::ZERO
    }

    fn renaming_invariant(&self) -> bool {
        true
    }
}

/// `+inf` as soon as a live variable is spilled, zero otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct SpillFree;

impl CostModel for SpillFree {
    fn edge_cost(&self, _: EdgeKey, live: &[(VarId, Slot)]) -> Cost {
        if live.iter().any(|(_, s)| s.is_spill()) {
            Cost::Infinite
        } else {
            Cost::ZERO
        }
    }

    fn forbids_spill(&self) -> bool {
        true
    }

    fn renaming_invariant(&self) -> bool {
        true
    }
}

/// `c(e, f) = Σ w(e, v)` over live variables spilled by `f`.
#[derive(Clone, Debug)]
pub struct SpillWeights {
    default: Rational,
    weights: HashMap<(EdgeKey, VarId), Rational>,
}

#[derive(Debug, Error)]
pub enum CostFileError {
    #[error("cost file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cost file: {0}")]
    Schema(String),
}

impl SpillWeights {
    pub fn uniform(weight: Rational) -> SpillWeights {
        SpillWeights { default: weight, weights: HashMap::new() }
    }

    pub fn unit() -> SpillWeights {
        SpillWeights::uniform(Rational::from_integer(1))
    }

    pub fn set(&mut self, edge: EdgeKey, var: VarId, weight: Rational) {
        self.weights.insert((edge, var), weight);
    }

    pub fn weight(&self, edge: EdgeKey, var: VarId) -> Rational {
        self.weights.get(&(edge, var)).copied().unwrap_or(self.default)
    }

    /// Reads `{"default_weight": w, "weights": [{"edge": [s, d], "var": "x", "w": w}]}`.
    /// Both keys are optional; the default weight defaults to 1.
    pub fn from_json(text: &str, graph: &SplGraph, vars: &VarTable) -> Result<SpillWeights, CostFileError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let schema = |msg: String| CostFileError::Schema(msg);
        let obj = value.as_object().ok_or_else(|| schema("top level must be an object".into()))?;
        let weight_of = |v: &serde_json::Value, what: &str| -> Result<Rational, CostFileError> {
            let w = rational_from_json(v).ok_or_else(|| schema(format!("{what} must be a number")))?;
            if w < Rational::from_integer(0) {
                return Err(schema(format!("{what} must be non-negative")));
            }
            Ok(w)
        };
        let mut model = SpillWeights::unit();
        if let Some(d) = obj.get("default_weight") {
            model.default = weight_of(d, "default_weight")?;
        }
        let entries = match obj.get("weights") {
            None => &[][..],
            Some(serde_json::Value::Array(items)) => &items[..],
            Some(_) => return Err(schema("weights must be an array".into())),
        };
        for (i, entry) in entries.iter().enumerate() {
            let edge = entry
                .get("edge")
                .and_then(|e| e.as_array())
                .filter(|e| e.len() == 2)
                .and_then(|e| Some((e[0].as_u64()?, e[1].as_u64()?)))
                .ok_or_else(|| schema(format!("weights[{i}].edge must be [src, dst]")))?;
            let key = (VertexId(edge.0 as u32), VertexId(edge.1 as u32));
            if graph.edge(key).is_none() {
                return Err(schema(format!("weights[{i}]: no edge {} -> {}", edge.0, edge.1)));
            }
            let name = entry
                .get("var")
                .and_then(|v| v.as_str())
                .ok_or_else(|| schema(format!("weights[{i}].var must be a string")))?;
            let var = vars.id(name).ok_or_else(|| schema(format!("weights[{i}]: unknown variable {name}")))?;
            let w = weight_of(entry.get("w").unwrap_or(&serde_json::Value::Null), &format!("weights[{i}].w"))?;
            model.set(key, var, w);
        }
        Ok(model)
    }
}

impl CostModel for SpillWeights {
    fn edge_cost(&self, edge: EdgeKey, live: &[(VarId, Slot)]) -> Cost {
        live.iter().filter(|(_, s)| s.is_spill()).map(|(v, _)| Cost::Finite(self.weight(edge, *v))).sum()
    }

    fn renaming_invariant(&self) -> bool {
        true
    }
}

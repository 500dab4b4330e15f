use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::CostK;
use crate::frontend::Expr;
use crate::spl::{EdgeKey, LabelKind, SplGraph, StmtLabel, VertexId};

/// Use set, invalidating set and the two cost functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LospreInstance {
    pub uses: BTreeSet<VertexId>,
    pub invalidating: BTreeSet<VertexId>,
    pub edge_default: CostK,
    pub vertex_default: CostK,
    pub edge_costs: HashMap<EdgeKey, CostK>,
    pub vertex_costs: HashMap<VertexId, CostK>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("instance is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("instance: {0}")]
    Schema(String),
    #[error("instance refers to vertex {0}, which is not in the graph")]
    UnknownVertex(VertexId),
    #[error("instance refers to edge {0} -> {1}, which is not in the graph")]
    UnknownEdge(VertexId, VertexId),
}

impl LospreInstance {
    /// Instance with uniform costs. The program entry and exit are added to
    /// the invalidating set.
    pub fn new(
        graph: &SplGraph,
        uses: BTreeSet<VertexId>,
        invalidating: BTreeSet<VertexId>,
        edge_default: CostK,
        vertex_default: CostK,
    ) -> LospreInstance {
        let mut invalidating = invalidating;
        invalidating.insert(graph.boundary().s);
        invalidating.insert(graph.boundary().t);
        LospreInstance {
            uses,
            invalidating,
            edge_default,
            vertex_default,
            edge_costs: HashMap::new(),
            vertex_costs: HashMap::new(),
        }
    }

    pub fn edge_cost(&self, e: EdgeKey) -> CostK {
        self.edge_costs.get(&e).copied().unwrap_or(self.edge_default)
    }

    pub fn vertex_cost(&self, v: VertexId) -> CostK {
        self.vertex_costs.get(&v).copied().unwrap_or(self.vertex_default)
    }

    /// Checks that every referenced vertex and edge exists.
    pub fn validate(&self, graph: &SplGraph) -> Result<(), InstanceError> {
        let vertices = self.uses.iter().chain(&self.invalidating).chain(self.vertex_costs.keys());
        if let Some(v) = vertices.into_iter().find(|v| !graph.contains_vertex(**v)) {
            return Err(InstanceError::UnknownVertex(*v));
        }
        if let Some((x, y)) = self.edge_costs.keys().find(|e| graph.edge(**e).is_none()) {
            return Err(InstanceError::UnknownEdge(*x, *y));
        }
        Ok(())
    }

    /// Parses the instance file format:
    ///
    /// ```json
    /// {"use": [2, 4], "invalidate": [6], "edge_cost_default": [1, 0],
    ///  "vertex_cost_default": [0, 1], "edge_costs": [{"edge": [1, 2], "cost": [3, 0]}],
    ///  "vertex_costs": [{"vertex": 3, "cost": [0, 2]}]}
    /// ```
    ///
    /// Costs are `[primary, secondary]` pairs or plain numbers. Missing
    /// defaults are `[1, 0]` per edge and `[0, 1]` per vertex.
    pub fn from_json(text: &str, graph: &SplGraph) -> Result<LospreInstance, InstanceError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let schema = |msg: &str| InstanceError::Schema(msg.to_string());
        let obj = value.as_object().ok_or_else(|| schema("top level must be an object"))?;
        let vertex = |v: &serde_json::Value| -> Result<VertexId, InstanceError> {
            v.as_u64().map(|n| VertexId(n as u32)).ok_or_else(|| schema("vertex ids must be non-negative integers"))
        };
        let vertex_list = |key: &str| -> Result<BTreeSet<VertexId>, InstanceError> {
            match obj.get(key) {
                None => Ok(BTreeSet::new()),
                Some(serde_json::Value::Array(items)) => items.iter().map(vertex).collect(),
                Some(_) => Err(InstanceError::Schema(format!("{key} must be an array"))),
            }
        };
        let cost = |v: Option<&serde_json::Value>, default: CostK, what: &str| -> Result<CostK, InstanceError> {
            let Some(v) = v else { return Ok(default) };
            let c = CostK::from_json(v).ok_or_else(|| InstanceError::Schema(format!("{what} must be a cost")))?;
            if c < CostK::ZERO || c.secondary < CostK::ZERO.secondary {
                return Err(InstanceError::Schema(format!("{what} must be non-negative")));
            }
            Ok(c)
        };
        let items = |key: &str| -> Result<&[serde_json::Value], InstanceError> {
            match obj.get(key) {
                None => Ok(&[]),
                Some(serde_json::Value::Array(items)) => Ok(items),
                Some(_) => Err(InstanceError::Schema(format!("{key} must be an array"))),
            }
        };

        let mut inst = LospreInstance::new(
            graph,
            vertex_list("use")?,
            vertex_list("invalidate")?,
            cost(obj.get("edge_cost_default"), CostK::ints(1, 0), "edge_cost_default")?,
            cost(obj.get("vertex_cost_default"), CostK::ints(0, 1), "vertex_cost_default")?,
        );
        for (i, item) in items("edge_costs")?.iter().enumerate() {
            let edge = item
                .get("edge")
                .and_then(|e| e.as_array())
                .filter(|e| e.len() == 2)
                .ok_or_else(|| InstanceError::Schema(format!("edge_costs[{i}].edge must be [src, dst]")))?;
            let key = (vertex(&edge[0])?, vertex(&edge[1])?);
            let c = cost(item.get("cost"), inst.edge_default, &format!("edge_costs[{i}].cost"))?;
            inst.edge_costs.insert(key, c);
        }
        for (i, item) in items("vertex_costs")?.iter().enumerate() {
            let v = vertex(item.get("vertex").unwrap_or(&serde_json::Value::Null))?;
            let c = cost(item.get("cost"), inst.vertex_default, &format!("vertex_costs[{i}].cost"))?;
            inst.vertex_costs.insert(v, c);
        }
        inst.validate(graph)?;
        Ok(inst)
    }
}

/// Builds the instance for expression `e`: the target of every edge that
/// computes `e` (as a subterm of a right-hand side or condition) is a use;
/// the target of every edge assigning a variable of `e` invalidates it.
pub fn derive_instance(graph: &SplGraph, e: &Expr, edge_default: CostK, vertex_default: CostK) -> LospreInstance {
    let operands = e.vars();
    let mut uses = BTreeSet::new();
    let mut invalidating = BTreeSet::new();
    for edge in graph.edges() {
        for label in &edge.labels {
            match &label.kind {
                LabelKind::Stmt(StmtLabel::Assign { target, expr }) => {
                    if expr.contains_subterm(e) {
                        uses.insert(edge.dst);
                    }
                    if operands.contains(target) {
                        invalidating.insert(edge.dst);
                    }
                }
                LabelKind::Cond { expr, .. } if expr.contains_subterm(e) => {
                    uses.insert(edge.dst);
                }
                _ => {}
            }
        }
    }
    LospreInstance::new(graph, uses, invalidating, edge_default, vertex_default)
}

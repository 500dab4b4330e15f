use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    /// Binding strength; all binary operators are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expr {
    Var { name: String },
    Int { value: i64 },
    Neg { operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var { name: name.into() }
    }

    pub fn int(value: i64) -> Expr {
        Expr::Int { value }
    }

    pub fn negate(operand: Expr) -> Expr {
        Expr::Neg { operand: Box::new(operand) }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    /// The set of identifiers referenced by the expression.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var { name } => {
                out.insert(name.clone());
            }
            Expr::Int { .. } => {}
            Expr::Neg { operand } => operand.collect_vars(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    /// True if `needle` occurs as a subterm of `self` (including `self`).
    pub fn contains_subterm(&self, needle: &Expr) -> bool {
        if self == needle {
            return true;
        }
        match self {
            Expr::Var { .. } | Expr::Int { .. } => false,
            Expr::Neg { operand } => operand.contains_subterm(needle),
            Expr::Binary { lhs, rhs, .. } => lhs.contains_subterm(needle) || rhs.contains_subterm(needle),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg { .. } => 4,
            Expr::Var { .. } | Expr::Int { .. } => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var { name } => f.write_str(name),
            Expr::Int { value } => write!(f, "{value}"),
            Expr::Neg { operand } => {
                if operand.precedence() < 4 || matches!(**operand, Expr::Neg { .. }) {
                    write!(f, "-({operand})")
                } else {
                    write!(f, "-{operand}")
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let prec = op.precedence();
                if lhs.precedence() < prec {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                // left-associative: an equal-precedence right operand needs parens
                if rhs.precedence() <= prec {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Skip,
    Assign { target: String, expr: Expr },
    Break,
    Continue,
    Seq { left: NodeId, right: NodeId },
    If { cond: Expr, then_branch: NodeId, else_branch: NodeId },
    While { cond: Expr, body: NodeId },
}

impl Stmt {
    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match self {
            Stmt::Seq { left, right } => (Some(*left), Some(*right)),
            Stmt::If { then_branch, else_branch, .. } => (Some(*then_branch), Some(*else_branch)),
            Stmt::While { body, .. } => (Some(*body), None),
            _ => (None, None),
        };
        a.into_iter().chain(b)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Stmt::Skip => "Skip",
            Stmt::Assign { .. } => "Assign",
            Stmt::Break => "Break",
            Stmt::Continue => "Continue",
            Stmt::Seq { .. } => "Seq",
            Stmt::If { .. } => "If",
            Stmt::While { .. } => "While",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AstNode {
    pub stmt: Stmt,
    pub span: Span,
}

/// Syntax tree stored as an arena. Children always precede their parent,
/// so index order is a valid post-order.
#[derive(Clone, Debug)]
pub struct Ast {
    nodes: Vec<AstNode>,
    root: NodeId,
}

impl Ast {
    pub(crate) fn from_parts(nodes: Vec<AstNode>, root: NodeId) -> Ast {
        Ast { nodes, root }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &AstNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i as u32), n))
    }

    /// True iff every `break`/`continue` has a `while` ancestor.
    pub fn is_closed(&self) -> bool {
        // loop depth per node, filled top-down; parents sit after children
        let mut inside = vec![false; self.nodes.len()];
        for idx in (0..self.nodes.len()).rev() {
            let node = &self.nodes[idx];
            let here = inside[idx];
            match &node.stmt {
                Stmt::Break | Stmt::Continue if !here => return false,
                Stmt::While { body, .. } => inside[body.index()] = true,
                stmt => {
                    for child in stmt.children() {
                        inside[child.index()] = here;
                    }
                }
            }
        }
        true
    }

    /// Structural equality ignoring spans and arena layout.
    pub fn same_shape(&self, other: &Ast) -> bool {
        let mut stack = vec![(self.root, other.root)];
        while let Some((a, b)) = stack.pop() {
            let (na, nb) = (&self.node(a).stmt, &other.node(b).stmt);
            match (na, nb) {
                (Stmt::Skip, Stmt::Skip) | (Stmt::Break, Stmt::Break) | (Stmt::Continue, Stmt::Continue) => {}
                (Stmt::Assign { target: t1, expr: e1 }, Stmt::Assign { target: t2, expr: e2 }) => {
                    if t1 != t2 || e1 != e2 {
                        return false;
                    }
                }
                (Stmt::Seq { left: l1, right: r1 }, Stmt::Seq { left: l2, right: r2 }) => {
                    stack.push((*l1, *l2));
                    stack.push((*r1, *r2));
                }
                (
                    Stmt::If { cond: c1, then_branch: t1, else_branch: e1 },
                    Stmt::If { cond: c2, then_branch: t2, else_branch: e2 },
                ) => {
                    if c1 != c2 {
                        return false;
                    }
                    stack.push((*t1, *t2));
                    stack.push((*e1, *e2));
                }
                (Stmt::While { cond: c1, body: b1 }, Stmt::While { cond: c2, body: b2 }) => {
                    if c1 != c2 {
                        return false;
                    }
                    stack.push((*b1, *b2));
                }
                _ => return false,
            }
        }
        true
    }

    /// Compact constructor-style rendering, e.g. `While(If(Seq(Assign,Break),Skip))`.
    pub fn outline(&self) -> String {
        self.outline_of(self.root)
    }

    fn outline_of(&self, id: NodeId) -> String {
        let stmt = &self.node(id).stmt;
        let children: Vec<String> = stmt.children().map(|c| self.outline_of(c)).collect();
        if children.is_empty() {
            stmt.kind_name().to_string()
        } else {
            format!("{}({})", stmt.kind_name(), children.join(","))
        }
    }

    /// All variables mentioned anywhere in the program.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for node in &self.nodes {
            match &node.stmt {
                Stmt::Assign { target, expr } => {
                    out.insert(target.clone());
                    out.extend(expr.vars());
                }
                Stmt::If { cond, .. } | Stmt::While { cond, .. } => out.extend(cond.vars()),
                _ => {}
            }
        }
        out
    }

    /// Number of primitive statements (skip/assign/break/continue).
    pub fn statement_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.stmt, Stmt::Skip | Stmt::Assign { .. } | Stmt::Break | Stmt::Continue))
            .count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let mut built: Vec<Option<serde_json::Value>> = vec![None; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            let mut take = |id: &NodeId| built[id.index()].take().unwrap_or(serde_json::Value::Null);
            let span = json!([node.span.start, node.span.end]);
            let value = match &node.stmt {
                Stmt::Skip => json!({"kind": "Skip", "span": span}),
                Stmt::Break => json!({"kind": "Break", "span": span}),
                Stmt::Continue => json!({"kind": "Continue", "span": span}),
                Stmt::Assign { target, expr } => {
                    json!({"kind": "Assign", "target": target, "expr": expr.to_string(), "span": span})
                }
                Stmt::Seq { left, right } => {
                    let l = take(left);
                    let r = take(right);
                    json!({"kind": "Seq", "span": span, "children": [l, r]})
                }
                Stmt::If { cond, then_branch, else_branch } => {
                    let t = take(then_branch);
                    let e = take(else_branch);
                    json!({"kind": "If", "cond": cond.to_string(), "span": span, "children": [t, e]})
                }
                Stmt::While { cond, body } => {
                    let b = take(body);
                    json!({"kind": "While", "cond": cond.to_string(), "span": span, "children": [b]})
                }
            };
            built[idx] = Some(value);
        }
        built[self.root.index()].take().unwrap_or(serde_json::Value::Null)
    }
}

/// True iff every `break`/`continue` in `ast` sits inside a `while` body.
pub fn check_closed(ast: &Ast) -> bool {
    ast.is_closed()
}

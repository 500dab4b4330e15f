use super::ast::{Ast, NodeId, Stmt};

/// Renders the program in canonical concrete syntax. Re-parsing the output
/// yields a tree with the same shape.
pub fn pretty(ast: &Ast) -> String {
    let mut out = String::new();
    write_program(ast, ast.root(), 0, &mut out);
    out.push('\n');
    out
}

/// Flattens the left spine of nested `Seq` nodes into statement order.
fn sequence(ast: &Ast, id: NodeId) -> Vec<NodeId> {
    let mut items = Vec::new();
    let mut pending = vec![id];
    while let Some(current) = pending.pop() {
        match &ast.node(current).stmt {
            Stmt::Seq { left, right } => {
                pending.push(*right);
                pending.push(*left);
            }
            _ => items.push(current),
        }
    }
    items
}

fn write_program(ast: &Ast, id: NodeId, depth: usize, out: &mut String) {
    // Parsed trees are left-nested, so flattening and re-joining with `;`
    // reproduces the same Seq shape.
    for (i, stmt) in sequence(ast, id).into_iter().enumerate() {
        if i > 0 {
            out.push_str(";\n");
        }
        write_stmt(ast, stmt, depth, out);
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_stmt(ast: &Ast, id: NodeId, depth: usize, out: &mut String) {
    indent(depth, out);
    match &ast.node(id).stmt {
        Stmt::Skip => out.push_str("skip"),
        Stmt::Break => out.push_str("break"),
        Stmt::Continue => out.push_str("continue"),
        Stmt::Assign { target, expr } => {
            out.push_str(target);
            out.push_str(" := ");
            out.push_str(&expr.to_string());
        }
        Stmt::If { cond, then_branch, else_branch } => {
            out.push_str(&format!("if {cond} then\n"));
            write_program(ast, *then_branch, depth + 1, out);
            out.push('\n');
            indent(depth, out);
            out.push_str("else\n");
            write_program(ast, *else_branch, depth + 1, out);
            out.push('\n');
            indent(depth, out);
            out.push_str("fi");
        }
        Stmt::While { cond, body } => {
            out.push_str(&format!("while {cond} do\n"));
            write_program(ast, *body, depth + 1, out);
            out.push('\n');
            indent(depth, out);
            out.push_str("od");
        }
        Stmt::Seq { .. } => unreachable!("sequences are flattened by write_program"),
    }
}

use super::ast::{Ast, AstNode, BinOp, Expr, NodeId, Stmt};
use super::lexer::{tokenize, Token, TokenKind};
use super::{Span, SyntaxError};

const STMT_START: &[&str] = &["skip", "break", "continue", "identifier", "if", "while"];
const EXPR_START: &[&str] = &["identifier", "integer", "(", "-"];

/// Parses a complete program. The whole input must be consumed.
pub fn parse(source: &str) -> Result<Ast, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { source, tokens, pos: 0, nodes: Vec::new() };
    let root = parser.program()?;
    parser.expect_end(&[";"])?;
    Ok(Ast::from_parts(parser.nodes, root))
}

/// Parses a standalone expression, e.g. the target of a LOSPRE query.
pub fn parse_expr(source: &str) -> Result<Expr, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { source, tokens, pos: 0, nodes: Vec::new() };
    let expr = parser.expr()?;
    parser.expect_end(&[])?;
    Ok(expr)
}

struct Parser<'a> {
    source: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    nodes: Vec<AstNode>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        let tok = self.peek();
        SyntaxError::at(
            self.source,
            tok.span.start,
            expected.iter().map(|s| format!("`{s}`")).collect(),
            tok.kind.describe(),
        )
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, SyntaxError> {
        if self.peek().kind == kind {
            Ok(self.bump())
        } else {
            Err(self.error(&[kind.spelling()]))
        }
    }

    fn expect_end(&self, also: &[&str]) -> Result<(), SyntaxError> {
        if self.peek().kind == TokenKind::Eof {
            Ok(())
        } else {
            let mut expected = also.to_vec();
            expected.push("end of input");
            Err(self.error(&expected))
        }
    }

    fn push(&mut self, stmt: Stmt, span: Span) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(AstNode { stmt, span });
        id
    }

    fn span_of(&self, id: NodeId) -> Span {
        self.nodes[id.index()].span
    }

    /// `stmt { ";" stmt }`, folded to the left.
    fn program(&mut self) -> Result<NodeId, SyntaxError> {
        let mut acc = self.stmt()?;
        while self.peek().kind == TokenKind::Semi {
            self.bump();
            let next = self.stmt()?;
            let span = self.span_of(acc).join(self.span_of(next));
            acc = self.push(Stmt::Seq { left: acc, right: next }, span);
        }
        Ok(acc)
    }

    /// Parses a nested program and then its closing keyword, reporting both
    /// `;` and the keyword when neither is found.
    fn block(&mut self, closer: TokenKind) -> Result<(NodeId, Token), SyntaxError> {
        let body = self.program()?;
        if self.peek().kind == closer {
            Ok((body, self.bump()))
        } else {
            Err(self.error(&[";", closer.spelling()]))
        }
    }

    fn stmt(&mut self) -> Result<NodeId, SyntaxError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Skip => {
                self.bump();
                Ok(self.push(Stmt::Skip, tok.span))
            }
            TokenKind::Break => {
                self.bump();
                Ok(self.push(Stmt::Break, tok.span))
            }
            TokenKind::Continue => {
                self.bump();
                Ok(self.push(Stmt::Continue, tok.span))
            }
            TokenKind::Ident(name) => {
                self.bump();
                self.expect(TokenKind::Assign)?;
                let start = self.peek().span.start;
                let expr = self.expr()?;
                let end = self.tokens[self.pos - 1].span.end.max(start);
                Ok(self.push(Stmt::Assign { target: name, expr }, Span::new(tok.span.start, end)))
            }
            TokenKind::If => {
                self.bump();
                let cond = self.expr()?;
                self.expect(TokenKind::Then)?;
                let (then_branch, _) = self.block(TokenKind::Else)?;
                let (else_branch, fi) = self.block(TokenKind::Fi)?;
                Ok(self.push(Stmt::If { cond, then_branch, else_branch }, tok.span.join(fi.span)))
            }
            TokenKind::While => {
                self.bump();
                let cond = self.expr()?;
                self.expect(TokenKind::Do)?;
                let (body, od) = self.block(TokenKind::Od)?;
                Ok(self.push(Stmt::While { cond, body }, tok.span.join(od.span)))
            }
            _ => Err(self.error(STMT_START)),
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        Some(match self.peek().kind {
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Slash => BinOp::Div,
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            _ => return None,
        })
    }

    /// Precedence climbing over left-associative binary operators.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.peek().kind == TokenKind::Minus {
            self.bump();
            return Ok(Expr::negate(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().kind.clone() {
            TokenKind::Ident(name) => {
                self.bump();
                Ok(Expr::var(name))
            }
            TokenKind::Int(value) => {
                self.bump();
                Ok(Expr::int(value))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            _ => Err(self.error(EXPR_START)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skip_is_a_single_node() {
        let ast = parse("skip").unwrap();
        assert_eq!(ast.len(), 1);
        assert_eq!(ast.outline(), "Skip");
    }

    #[test]
    fn sequencing_is_left_associative() {
        let ast = parse("x := 1; y := 2; z := x + y").unwrap();
        assert_eq!(ast.outline(), "Seq(Seq(Assign,Assign),Assign)");
        // hand-built reference for the same string
        let root = ast.node(ast.root());
        let Stmt::Seq { left, right } = &root.stmt else { panic!("root must be Seq") };
        assert_eq!(
            ast.node(*right).stmt,
            Stmt::Assign { target: "z".into(), expr: Expr::binary(BinOp::Add, Expr::var("x"), Expr::var("y")) }
        );
        let Stmt::Seq { left: a, right: b } = &ast.node(*left).stmt else { panic!("left must be Seq") };
        assert_eq!(ast.node(*a).stmt, Stmt::Assign { target: "x".into(), expr: Expr::int(1) });
        assert_eq!(ast.node(*b).stmt, Stmt::Assign { target: "y".into(), expr: Expr::int(2) });
    }

    #[test]
    fn decompo_example_has_the_expected_tree() {
        let src = "while x >= 1 do if x >= y then x := x - y; break else y := y - x; continue fi od";
        let ast = parse(src).unwrap();
        assert_eq!(ast.outline(), "While(If(Seq(Assign,Break),Seq(Assign,Continue)))");
    }

    #[test]
    fn operator_precedence() {
        let e = parse_expr("a + b * c - -d >= 2").unwrap();
        let expected = Expr::binary(
            BinOp::Ge,
            Expr::binary(
                BinOp::Sub,
                Expr::binary(BinOp::Add, Expr::var("a"), Expr::binary(BinOp::Mul, Expr::var("b"), Expr::var("c"))),
                Expr::negate(Expr::var("d")),
            ),
            Expr::int(2),
        );
        assert_eq!(e, expected);
        assert_eq!(e.vars().into_iter().collect::<Vec<_>>(), vec!["a", "b", "c", "d"]);
    }

    #[test]
    fn spans_nest() {
        let src = "while x >= 1 do if x then a := 1 else skip fi; b := 2 od";
        let ast = parse(src).unwrap();
        for (_, node) in ast.nodes() {
            for child in node.stmt.children() {
                assert!(node.span.contains(&ast.node(child).span));
            }
        }
        assert_eq!(ast.node(ast.root()).span, Span::new(0, src.len()));
    }

    #[test]
    fn while_without_condition_reports_expression_tokens() {
        let err = parse("while do").unwrap_err();
        assert_eq!((err.line, err.column), (1, 7));
        assert!(err.expected.contains(&"`identifier`".to_string()));
        assert_eq!(err.found, "`do`");
    }

    #[test]
    fn one_armed_if_is_rejected() {
        let err = parse("if c then skip fi").unwrap_err();
        assert_eq!(err.expected, vec!["`;`", "`else`"]);
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let err = parse("skip skip").unwrap_err();
        assert!(err.expected.contains(&"`end of input`".to_string()));
        assert!(parse("skip;").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn closedness() {
        assert!(!parse("break").unwrap().is_closed());
        assert!(!parse("if c then break else skip fi").unwrap().is_closed());
        assert!(parse("while c do if c then break else continue fi od").unwrap().is_closed());
        assert!(!parse("while c do skip od; continue").unwrap().is_closed());
        assert!(parse("x := 1").unwrap().is_closed());
    }
}

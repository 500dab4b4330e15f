//! Lexing, parsing and pretty-printing of the structured mini-language.
//!
//! ```text
//! program := stmt { ";" stmt }
//! stmt    := "skip" | "break" | "continue" | ident ":=" expr
//!          | "if" expr "then" program "else" program "fi"
//!          | "while" expr "do" program "od"
//! ```
//!
//! `;` is left-associative, so `a; b; c` parses as `Seq(Seq(a, b), c)`.

mod ast;
mod lexer;
mod parser;
mod pretty;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use ast::{check_closed, Ast, AstNode, BinOp, Expr, NodeId, Stmt};
pub use lexer::is_keyword;
pub use parser::{parse, parse_expr};
pub use pretty::pretty;

/// Half-open byte range into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: syntax error: expected {}, found {found}", .expected.join(" or "))]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl SyntaxError {
    pub(crate) fn at(source: &str, offset: usize, expected: Vec<String>, found: String) -> SyntaxError {
        let (line, column) = line_column(source, offset);
        SyntaxError { line, column, offset, expected, found }
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_column(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |p| p + 1);
    let column = source[line_start..offset].chars().count() + 1;
    (line, column)
}

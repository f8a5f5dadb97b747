//! Lexing, parsing and desugaring of `.cup` source text.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod span;

pub use ast::{Expr, ExprKind, NodeId, Program};
pub use desugar::desugar;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_expr, parse_file, parse_type};
pub use pretty::{pretty_expr, pretty_print};
pub use span::SourceSpan;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrontendError {
    #[error("lex error: {message} at {span}")]
    Lex { message: String, span: SourceSpan },
    #[error("parse error: {message}{} at {span}", expected_suffix(.expected))]
    Parse {
        message: String,
        expected: Vec<String>,
        span: SourceSpan,
    },
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(" or "))
    }
}

impl FrontendError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            FrontendError::Lex { span, .. } | FrontendError::Parse { span, .. } => span,
        }
    }
}

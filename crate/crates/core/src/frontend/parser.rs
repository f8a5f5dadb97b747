//! Recursive-descent parser producing a [`Program`].

use std::sync::Arc;

use super::ast::*;
use super::lexer::{self, Token, TokenKind};
use super::span::SourceSpan;
use super::FrontendError;

pub fn parse(source: &str) -> Result<Program, FrontendError> {
    parse_file(source, "<input>")
}

pub fn parse_file(source: &str, file: &str) -> Result<Program, FrontendError> {
    parse_file_from(source, file, 0)
}

/// Parse with node ids starting at `first_id`, so trees from several files
/// can be merged without id collisions.
pub fn parse_file_from(source: &str, file: &str, first_id: NodeId) -> Result<Program, FrontendError> {
    let tokens = lexer::tokenize_file(source, file)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        next_id: first_id,
        file: Arc::from(file),
        eof: source.len(),
    };
    p.program()
}

/// Parse a single expression (used by tests and tooling).
pub fn parse_expr(source: &str) -> Result<Expr, FrontendError> {
    let tokens = lexer::tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        next_id: 0,
        file: Arc::from("<input>"),
        eof: source.len(),
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.unexpected(&["end of input"]));
    }
    Ok(e)
}

/// Parse a surface type expression.
pub fn parse_type(source: &str) -> Result<TypeExpr, FrontendError> {
    let tokens = lexer::tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        next_id: 0,
        file: Arc::from("<input>"),
        eof: source.len(),
    };
    let t = p.ty()?;
    if p.peek().is_some() {
        return Err(p.unexpected(&["end of input"]));
    }
    Ok(t)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_id: NodeId,
    file: Arc<str>,
    eof: usize,
}

const BASE_TYPES: &[&str] = &["int", "real", "bool", "unit", "string"];

fn is_upper(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_nth(&self, n: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + n).map(|t| &t.kind)
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn here(&self) -> SourceSpan {
        match self.tokens.get(self.pos) {
            Some(t) => t.span.clone(),
            None => {
                let mut s = self
                    .tokens
                    .last()
                    .map(|t| t.span.clone())
                    .unwrap_or_else(|| SourceSpan::synthetic(&self.file));
                s.start = self.eof;
                s.end = self.eof;
                s.start_line = s.end_line;
                s.start_col = s.end_col;
                s
            }
        }
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos - 1].span.clone()
    }

    fn unexpected(&self, expected: &[&str]) -> FrontendError {
        let found = match self.peek() {
            Some(k) => k.describe(),
            None => "end of input".to_string(),
        };
        FrontendError::Parse {
            message: format!("unexpected {found}"),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            span: self.here(),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, FrontendError> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[&kind.describe()]))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), FrontendError> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let t = self.bump();
                match t.kind {
                    TokenKind::Ident(name) => Ok((name, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn node(&mut self, span: SourceSpan, kind: ExprKind) -> Expr {
        let id = self.next_id;
        self.next_id += 1;
        Expr { id, span, kind }
    }

    fn starts_binding(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::Ident(_)))
            && matches!(self.peek_nth(1), Some(TokenKind::Arrow) | Some(TokenKind::Eq))
    }

    // ---- program ----------------------------------------------------------

    fn program(&mut self) -> Result<Program, FrontendError> {
        let mut type_decls = Vec::new();
        let mut bindings: Vec<Binding> = Vec::new();
        loop {
            if self.at(&TokenKind::Type) {
                if !bindings.is_empty() {
                    return Err(FrontendError::Parse {
                        message: "type declarations must precede all value bindings".into(),
                        expected: vec![],
                        span: self.here(),
                    });
                }
                type_decls.push(self.type_decl()?);
            } else if self.starts_binding() {
                let (name, start) = self.ident()?;
                self.bump();
                let expr = self.expr()?;
                self.expect(TokenKind::Semi)?;
                if bindings.iter().any(|b| b.name == name) {
                    return Err(FrontendError::Parse {
                        message: format!("duplicate top-level binding `{name}`"),
                        expected: vec![],
                        span: start,
                    });
                }
                let span = start.to(&expr.span);
                bindings.push(Binding {
                    name,
                    expr,
                    span,
                    prelude: false,
                });
            } else {
                break;
            }
        }
        if self.peek().is_none() {
            return Err(FrontendError::Parse {
                message: "program has no final expression".into(),
                expected: vec!["expression".into()],
                span: self.here(),
            });
        }
        let result = self.expr()?;
        self.eat(&TokenKind::Semi);
        if self.peek().is_some() {
            return Err(self.unexpected(&["end of input"]));
        }
        Ok(Program {
            type_decls,
            bindings,
            result,
            next_id: self.next_id,
        })
    }

    fn type_decl(&mut self) -> Result<TypeDecl, FrontendError> {
        let start = self.expect(TokenKind::Type)?.span;
        let (name, _) = self.ident()?;
        let mut params = Vec::new();
        while let Some(TokenKind::TypeVar(v)) = self.peek() {
            params.push(v.clone());
            self.bump();
        }
        self.expect(TokenKind::Colon)?;
        self.expect(TokenKind::LParen)?;
        self.expect(TokenKind::Plus)?;
        let mut ctors = Vec::new();
        while self.eat(&TokenKind::LParen) {
            let (ctor, span) = self.ident()?;
            if !is_upper(&ctor) {
                return Err(FrontendError::Parse {
                    message: format!("constructor `{ctor}` must start with an uppercase letter"),
                    expected: vec![],
                    span,
                });
            }
            self.expect(TokenKind::Colon)?;
            let payload = self.ty()?;
            self.expect(TokenKind::RParen)?;
            ctors.push((ctor, payload));
        }
        if ctors.is_empty() {
            return Err(self.unexpected(&["`(`"]));
        }
        self.expect(TokenKind::RParen)?;
        let end = self.expect(TokenKind::Semi)?.span;
        Ok(TypeDecl {
            name,
            params,
            ctors,
            span: start.to(&end),
        })
    }

    // ---- types ------------------------------------------------------------

    fn ty(&mut self) -> Result<TypeExpr, FrontendError> {
        let lhs = self.ty_app()?;
        if self.eat(&TokenKind::FatArrow) || self.eat(&TokenKind::RArrow) {
            let rhs = self.ty()?;
            return Ok(TypeExpr::Fun(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn starts_ty_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(TokenKind::Ident(_))
                | Some(TokenKind::TypeVar(_))
                | Some(TokenKind::LParen)
                | Some(TokenKind::LBracket)
                | Some(TokenKind::Tilde)
        )
    }

    fn ty_app(&mut self) -> Result<TypeExpr, FrontendError> {
        let head = self.ty_atom()?;
        if let TypeExpr::App(name, args) = &head {
            if args.is_empty() && self.starts_ty_atom() {
                let name = name.clone();
                let mut args = Vec::new();
                while self.starts_ty_atom() {
                    args.push(self.ty_atom()?);
                }
                return Ok(TypeExpr::App(name, args));
            }
        }
        Ok(head)
    }

    fn ty_atom(&mut self) -> Result<TypeExpr, FrontendError> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let (name, _) = self.ident()?;
                Ok(if BASE_TYPES.contains(&name.as_str()) {
                    TypeExpr::Base(name)
                } else if is_upper(&name) {
                    TypeExpr::App(name, vec![])
                } else {
                    TypeExpr::Var(name)
                })
            }
            Some(TokenKind::TypeVar(v)) => {
                let v = v.clone();
                self.bump();
                Ok(TypeExpr::Var(v))
            }
            Some(TokenKind::Tilde) => {
                self.bump();
                Ok(TypeExpr::Dist(Box::new(self.ty_atom()?)))
            }
            Some(TokenKind::LBracket) => {
                self.bump();
                let t = self.ty()?;
                self.expect(TokenKind::RBracket)?;
                Ok(TypeExpr::Vector(Box::new(t)))
            }
            Some(TokenKind::LParen) => {
                self.bump();
                if self.eat(&TokenKind::RParen) {
                    return Ok(TypeExpr::Base("unit".into()));
                }
                let first = self.ty()?;
                if self.eat(&TokenKind::RParen) {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat(&TokenKind::Comma) {
                    items.push(self.ty()?);
                }
                self.expect(TokenKind::RParen)?;
                Ok(TypeExpr::Tuple(items))
            }
            _ => Err(self.unexpected(&["type"])),
        }
    }

    // ---- expressions ------------------------------------------------------

    pub fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.or_expr()
    }

    fn binary(
        &mut self,
        next: fn(&mut Self) -> Result<Expr, FrontendError>,
        ops: &[(TokenKind, BinOp)],
    ) -> Result<Expr, FrontendError> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, op) in ops {
                if self.at(tok) {
                    self.bump();
                    let rhs = next(self)?;
                    let span = lhs.span.to(&rhs.span);
                    lhs = self.node(span, ExprKind::BinOp(*op, Box::new(lhs), Box::new(rhs)));
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(Self::and_expr, &[(TokenKind::OrOr, BinOp::Or)])
    }

    fn and_expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(Self::cmp_expr, &[(TokenKind::AndAnd, BinOp::And)])
    }

    fn cmp_expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(
            Self::add_expr,
            &[
                (TokenKind::EqEq, BinOp::Eq),
                (TokenKind::NotEq, BinOp::Ne),
                (TokenKind::Le, BinOp::Le),
                (TokenKind::Lt, BinOp::Lt),
                (TokenKind::Ge, BinOp::Ge),
                (TokenKind::Gt, BinOp::Gt),
            ],
        )
    }

    fn add_expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(
            Self::mul_expr,
            &[(TokenKind::Plus, BinOp::Add), (TokenKind::Minus, BinOp::Sub)],
        )
    }

    fn mul_expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(
            Self::unary,
            &[
                (TokenKind::Star, BinOp::Mul),
                (TokenKind::Slash, BinOp::Div),
                (TokenKind::Percent, BinOp::Mod),
            ],
        )
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let op = match self.peek() {
            Some(TokenKind::Minus) => UnOp::Neg,
            Some(TokenKind::Bang) => UnOp::Not,
            _ => return self.postfix(),
        };
        let start = self.bump().span;
        let operand = self.unary()?;
        let span = start.to(&operand.span);
        Ok(self.node(span, ExprKind::UnOp(op, Box::new(operand))))
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        loop {
            if self.at(&TokenKind::LParen) {
                self.bump();
                let args = self.comma_list(TokenKind::RParen)?;
                let span = e.span.to(&self.prev_span());
                e = self.node(span, ExprKind::Apply(Box::new(e), args));
            } else if self.at(&TokenKind::LBracket) {
                self.bump();
                let idx = self.expr()?;
                self.expect(TokenKind::RBracket)?;
                let span = e.span.to(&self.prev_span());
                e = self.node(span, ExprKind::Index(Box::new(e), Box::new(idx)));
            } else {
                return Ok(e);
            }
        }
    }

    /// Comma separated expressions up to (and consuming) `close`.
    fn comma_list(&mut self, close: TokenKind) -> Result<Vec<Expr>, FrontendError> {
        let mut items = Vec::new();
        if self.eat(&close) {
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(close)?;
            return Ok(items);
        }
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let start = self.here();
        let lit = |p: &mut Self, l: Literal| {
            let span = p.bump().span;
            Ok(p.node(span, ExprKind::Literal(l)))
        };
        match self.peek().cloned() {
            Some(TokenKind::Int(i)) => lit(self, Literal::Int(i)),
            Some(TokenKind::Real(r)) => lit(self, Literal::Real(r)),
            Some(TokenKind::Str(s)) => lit(self, Literal::Str(s)),
            Some(TokenKind::True) => lit(self, Literal::Bool(true)),
            Some(TokenKind::False) => lit(self, Literal::Bool(false)),
            Some(TokenKind::LParen) => {
                self.bump();
                if self.eat(&TokenKind::RParen) {
                    let span = start.to(&self.prev_span());
                    return Ok(self.node(span, ExprKind::Literal(Literal::Unit)));
                }
                let first = self.expr()?;
                if self.eat(&TokenKind::RParen) {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat(&TokenKind::Comma) {
                    items.push(self.expr()?);
                }
                self.expect(TokenKind::RParen)?;
                let span = start.to(&self.prev_span());
                Ok(self.node(span, ExprKind::Tuple(items)))
            }
            Some(TokenKind::LBracket) => {
                self.bump();
                let items = self.comma_list(TokenKind::RBracket)?;
                let span = start.to(&self.prev_span());
                Ok(self.node(span, ExprKind::VectorLit(items)))
            }
            Some(TokenKind::LBrace) => self.block(),
            Some(TokenKind::Function) => self.lambda(),
            Some(TokenKind::If) => self.if_expr(),
            Some(TokenKind::Case) => self.case_expr(),
            Some(TokenKind::Shift) => self.shift_expr(),
            Some(TokenKind::Reset) => {
                self.bump();
                let body = if self.at(&TokenKind::LBrace) {
                    self.block()?
                } else {
                    self.expect(TokenKind::LParen)?;
                    let b = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    b
                };
                let span = start.to(&self.prev_span());
                Ok(self.node(span, ExprKind::Reset(Box::new(body))))
            }
            Some(TokenKind::Ident(name)) => {
                self.bump();
                if is_upper(&name) {
                    let args = if self.eat(&TokenKind::LParen) {
                        self.comma_list(TokenKind::RParen)?
                    } else {
                        Vec::new()
                    };
                    let span = start.to(&self.prev_span());
                    Ok(self.node(span, ExprKind::Construct(name, args)))
                } else {
                    Ok(self.node(start, ExprKind::Var(name)))
                }
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    /// `{ stmt; ...; expr }`. A block with no statements is its final
    /// expression.
    fn block(&mut self) -> Result<Expr, FrontendError> {
        let start = self.expect(TokenKind::LBrace)?.span;
        let mut stmts = Vec::new();
        let last = loop {
            if self.at(&TokenKind::RBrace) {
                match stmts.pop() {
                    Some(Stmt::Expr(e)) => break e,
                    _ => return Err(self.unexpected(&["expression"])),
                }
            }
            if self.starts_binding() {
                let (name, _) = self.ident()?;
                self.bump();
                let rhs = self.expr()?;
                self.expect(TokenKind::Semi)?;
                stmts.push(Stmt::Bind(name, rhs));
                continue;
            }
            let e = self.expr()?;
            if self.eat(&TokenKind::Semi) {
                stmts.push(Stmt::Expr(e));
                continue;
            }
            if !self.at(&TokenKind::RBrace) {
                return Err(self.unexpected(&["`;`", "`}`"]));
            }
            break e;
        };
        self.expect(TokenKind::RBrace)?;
        if stmts.is_empty() {
            return Ok(last);
        }
        let span = start.to(&self.prev_span());
        Ok(self.node(span, ExprKind::Block(stmts, Box::new(last))))
    }

    fn lambda(&mut self) -> Result<Expr, FrontendError> {
        let start = self.expect(TokenKind::Function)?.span;
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            loop {
                let (name, _) = self.ident()?;
                let ty = if self.eat(&TokenKind::Colon) {
                    Some(self.ty()?)
                } else {
                    None
                };
                params.push(Param { name, ty });
                if self.eat(&TokenKind::Comma) {
                    continue;
                }
                self.expect(TokenKind::RParen)?;
                break;
            }
        }
        let ret = if self.eat(&TokenKind::Colon) {
            Some(self.ty()?)
        } else {
            None
        };
        let body = self.block()?;
        let span = start.to(&self.prev_span());
        Ok(self.node(
            span,
            ExprKind::Lambda(Lambda {
                params,
                ret,
                body: Box::new(body),
            }),
        ))
    }

    fn if_expr(&mut self) -> Result<Expr, FrontendError> {
        let start = self.expect(TokenKind::If)?.span;
        let cond = self.expr()?;
        let then = if self.eat(&TokenKind::Then) {
            self.expr()?
        } else if self.at(&TokenKind::LBrace) {
            self.block()?
        } else {
            return Err(self.unexpected(&["`then`", "`{`"]));
        };
        self.expect(TokenKind::Else)?;
        let els = self.expr()?;
        let span = start.to(&els.span);
        Ok(self.node(span, ExprKind::If(Box::new(cond), Box::new(then), Box::new(els))))
    }

    fn case_expr(&mut self) -> Result<Expr, FrontendError> {
        let start = self.expect(TokenKind::Case)?.span;
        let scrutinee = self.expr()?;
        self.expect(TokenKind::LBrace)?;
        let mut arms = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            let (ctor, span) = self.ident()?;
            if !is_upper(&ctor) {
                return Err(FrontendError::Parse {
                    message: format!("expected a constructor, found `{ctor}`"),
                    expected: vec!["constructor".into()],
                    span,
                });
            }
            let pattern = match self.peek() {
                Some(TokenKind::LParen) => {
                    self.bump();
                    let mut names = Vec::new();
                    loop {
                        names.push(self.ident()?.0);
                        if self.eat(&TokenKind::Comma) {
                            continue;
                        }
                        self.expect(TokenKind::RParen)?;
                        break;
                    }
                    if names.len() == 1 {
                        Pattern::Bind(names.pop().unwrap())
                    } else {
                        Pattern::Tuple(names)
                    }
                }
                Some(TokenKind::Ident(_)) => Pattern::Bind(self.ident()?.0),
                _ => Pattern::Empty,
            };
            if !(self.eat(&TokenKind::Eq) || self.eat(&TokenKind::FatArrow)) {
                return Err(self.unexpected(&["`=`"]));
            }
            let body = self.expr()?;
            arms.push(CaseArm { ctor, pattern, body });
            while self.eat(&TokenKind::Semi) || self.eat(&TokenKind::Bar) || self.eat(&TokenKind::Comma) {}
        }
        if arms.is_empty() {
            return Err(self.unexpected(&["case arm"]));
        }
        self.expect(TokenKind::RBrace)?;
        let span = start.to(&self.prev_span());
        Ok(self.node(span, ExprKind::Case(Box::new(scrutinee), arms)))
    }

    /// All of `shift(k, e)`, `shift k { e }` and `shift (k : t1) : t2 { e }`.
    fn shift_expr(&mut self) -> Result<Expr, FrontendError> {
        let start = self.expect(TokenKind::Shift)?.span;
        let check = |name: &str, span: SourceSpan| {
            if lexer::is_reserved(name) {
                Err(FrontendError::Parse {
                    message: format!("`{name}` is reserved and cannot bind a continuation"),
                    expected: vec!["identifier".into()],
                    span,
                })
            } else {
                Ok(())
            }
        };
        let (k, k_ty) = if self.eat(&TokenKind::LParen) {
            let (k, span) = self.ident()?;
            check(&k, span)?;
            if self.eat(&TokenKind::Comma) {
                let body = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let span = start.to(&self.prev_span());
                return Ok(self.node(
                    span,
                    ExprKind::Shift(Shift {
                        k,
                        k_ty: None,
                        body_ty: None,
                        body: Box::new(body),
                    }),
                ));
            }
            let k_ty = if self.eat(&TokenKind::Colon) {
                Some(self.ty()?)
            } else {
                None
            };
            self.expect(TokenKind::RParen)?;
            (k, k_ty)
        } else {
            let (k, span) = self.ident()?;
            check(&k, span)?;
            (k, None)
        };
        let body_ty = if self.eat(&TokenKind::Colon) {
            Some(self.ty()?)
        } else {
            None
        };
        let body = self.block()?;
        let span = start.to(&self.prev_span());
        Ok(self.node(
            span,
            ExprKind::Shift(Shift {
                k,
                k_ty,
                body_ty,
                body: Box::new(body),
            }),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(src: &str) -> ExprKind {
        parse_expr(src).unwrap().kind
    }

    fn var(n: &str) -> Expr {
        parse_expr(n).unwrap()
    }

    #[test]
    fn shift_reset_example() {
        let got = parse_expr("reset(1 + shift(k, k(2)))").unwrap();
        let expect = ExprKind::Reset(Box::new(parse_expr("1 + shift(k, k(2))").unwrap()));
        assert_eq!(got.kind, expect);
        let ExprKind::Reset(inner) = got.kind else { unreachable!() };
        let ExprKind::BinOp(BinOp::Add, l, r) = inner.kind else { panic!() };
        assert_eq!(l.kind, ExprKind::Literal(Literal::Int(1)));
        let ExprKind::Shift(s) = r.kind else { panic!() };
        assert_eq!(s.k, "k");
        assert_eq!(
            s.body.kind,
            ExprKind::Apply(Box::new(var("k")), vec![parse_expr("2").unwrap()])
        );
    }

    #[test]
    fn identity_lambda() {
        let ExprKind::Lambda(l) = e("function (x) { x }") else { panic!() };
        assert_eq!(l.params, vec![Param { name: "x".into(), ty: None }]);
        assert_eq!(l.body.kind, ExprKind::Var("x".into()));
    }

    #[test]
    fn list_type_declaration() {
        let p = parse("type List 'a : (+ (Nil : unit) (Cons : ('a, (List 'a))));\n0").unwrap();
        let d = &p.type_decls[0];
        assert_eq!(d.name, "List");
        assert_eq!(d.params, vec!["a".to_string()]);
        assert_eq!(
            d.ctors,
            vec![
                ("Nil".to_string(), TypeExpr::Base("unit".into())),
                (
                    "Cons".to_string(),
                    TypeExpr::Tuple(vec![
                        TypeExpr::Var("a".into()),
                        TypeExpr::App("List".into(), vec![TypeExpr::Var("a".into())])
                    ])
                )
            ]
        );
    }

    #[test]
    fn three_shift_spellings_agree() {
        let a = parse_expr("shift(k, k(1))").unwrap();
        let b = parse_expr("shift k { k(1) }").unwrap();
        let c = parse_expr("shift (k : int => int) : int { k(1) }").unwrap();
        assert_eq!(a, b);
        let (ExprKind::Shift(sa), ExprKind::Shift(sc)) = (&a.kind, &c.kind) else { panic!() };
        assert_eq!(sa.body, sc.body);
        assert_eq!(sa.k, sc.k);
        assert!(sc.k_ty.is_some() && sc.body_ty.is_some());
    }

    #[test]
    fn blocks_and_bindings() {
        let ExprKind::Block(stmts, last) = e("{ a <- 1; b = 2; a }") else { panic!() };
        assert_eq!(stmts.len(), 2);
        assert_eq!(last.kind, ExprKind::Var("a".into()));
    }

    #[test]
    fn regression_model_parses() {
        let src = "model <- function() {\n n <- sample(uniform-discrete(2,5));\n line <- repeat(\n function(i) { sample(normal(0.0,10.0)) },\n n);\n factor(-distance(line, data));\n line\n};\nmodel";
        let p = parse(src).unwrap();
        assert_eq!(p.bindings.len(), 1);
    }

    #[test]
    fn prefix_case_arms() {
        let src = "case (lst) {\n Nil = shift(k, Nil())\n Cons (a, rst) = Cons(a, rst)\n }";
        let ExprKind::Case(_, arms) = e(src) else { panic!() };
        assert_eq!(arms.len(), 2);
        assert_eq!(arms[0].pattern, Pattern::Empty);
        assert_eq!(arms[1].pattern, Pattern::Tuple(vec!["a".into(), "rst".into()]));
    }

    #[test]
    fn parse_errors() {
        match parse("x <- ;\n1") {
            Err(FrontendError::Parse { expected, span, .. }) => {
                assert!(expected.contains(&"expression".to_string()));
                assert_eq!((span.start_line, span.start_col), (1, 6));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("x <- 1;").is_err());
        assert!(parse("x <- 1;\ntype T : (+ (A : unit));\nx").is_err());
        assert!(parse("x <- 1;\nx <- 2;\nx").is_err());
        assert!(parse_expr("case x { }").is_err());
        assert!(parse_expr("shift(reset, 1)").is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(e("1 + 2 * 3"), e("1 + (2 * 3)"));
        assert_eq!(e("a - b - c"), e("(a - b) - c"));
        assert_eq!(e("a < b && c || d"), e("((a < b) && c) || d"));
        assert_eq!(e("-f(x)"), e("-(f(x))"));
    }
}

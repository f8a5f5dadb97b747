//! Surface rewrites applied before typing:
//! `observe(d, x)` becomes `factor(dist-score(d, x))`, and statement blocks
//! become nested `Bind` nodes. Expression statements bind the name `_`.

use super::ast::*;

pub const DISCARD: &str = "_";

pub fn desugar(mut program: Program) -> Program {
    let mut next = program.next_id;
    for b in &mut program.bindings {
        rewrite(&mut b.expr, &mut next);
    }
    rewrite(&mut program.result, &mut next);
    program.next_id = next;
    program
}

/// Desugar a lone expression; fresh node ids are drawn from `next`.
pub fn desugar_expr(mut e: Expr, next: &mut NodeId) -> Expr {
    rewrite(&mut e, next);
    e
}

fn fresh(next: &mut NodeId) -> NodeId {
    let id = *next;
    *next += 1;
    id
}

fn rewrite(e: &mut Expr, next: &mut NodeId) {
    match &mut e.kind {
        ExprKind::Literal(_) | ExprKind::Var(_) => {}
        ExprKind::Lambda(l) => rewrite(&mut l.body, next),
        ExprKind::Apply(callee, args) => {
            rewrite(callee, next);
            args.iter_mut().for_each(|a| rewrite(a, next));
            let is_observe = matches!(&callee.kind, ExprKind::Var(n) if n == "observe");
            if is_observe && args.len() == 2 {
                let span = e.span.clone();
                let args = std::mem::take(args);
                let score = Expr {
                    id: fresh(next),
                    span: span.clone(),
                    kind: ExprKind::Apply(
                        Box::new(Expr {
                            id: fresh(next),
                            span: span.clone(),
                            kind: ExprKind::Var("dist-score".into()),
                        }),
                        args,
                    ),
                };
                let factor = Expr {
                    id: fresh(next),
                    span,
                    kind: ExprKind::Var("factor".into()),
                };
                e.kind = ExprKind::Apply(Box::new(factor), vec![score]);
            }
        }
        ExprKind::Bind(_, r, b) => {
            rewrite(r, next);
            rewrite(b, next);
        }
        ExprKind::If(c, t, f) => {
            rewrite(c, next);
            rewrite(t, next);
            rewrite(f, next);
        }
        ExprKind::Case(s, arms) => {
            rewrite(s, next);
            arms.iter_mut().for_each(|a| rewrite(&mut a.body, next));
        }
        ExprKind::Construct(_, xs) | ExprKind::VectorLit(xs) | ExprKind::Tuple(xs) => {
            xs.iter_mut().for_each(|x| rewrite(x, next))
        }
        ExprKind::Index(a, b) | ExprKind::BinOp(_, a, b) => {
            rewrite(a, next);
            rewrite(b, next);
        }
        ExprKind::UnOp(_, a) | ExprKind::Reset(a) => rewrite(a, next),
        ExprKind::Shift(s) => rewrite(&mut s.body, next),
        ExprKind::Block(stmts, last) => {
            let mut body = std::mem::replace(
                last.as_mut(),
                Expr {
                    id: 0,
                    span: e.span.clone(),
                    kind: ExprKind::Literal(Literal::Unit),
                },
            );
            rewrite(&mut body, next);
            let stmts = std::mem::take(stmts);
            let n = stmts.len();
            for (i, stmt) in stmts.into_iter().enumerate().rev() {
                let (name, mut rhs) = match stmt {
                    Stmt::Bind(name, rhs) => (name, rhs),
                    Stmt::Expr(rhs) => (DISCARD.to_string(), rhs),
                };
                rewrite(&mut rhs, next);
                let span = rhs.span.to(&body.span);
                let kind = ExprKind::Bind(name, Box::new(rhs), Box::new(body));
                body = if i == 0 && n > 0 {
                    Expr {
                        id: e.id,
                        span: e.span.clone(),
                        kind,
                    }
                } else {
                    Expr {
                        id: fresh(next),
                        span,
                        kind,
                    }
                };
            }
            *e = body;
        }
    }
}

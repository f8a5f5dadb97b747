//! Canonical source printer. Output re-parses to a structurally equal tree.

use std::fmt::Write;

use super::ast::*;
use super::desugar::DISCARD;

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.type_decls {
        let _ = write!(out, "type {}", d.name);
        for v in &d.params {
            let _ = write!(out, " '{v}");
        }
        out.push_str(" : (+");
        for (c, t) in &d.ctors {
            let _ = write!(out, " ({c} : {})", pretty_type(t));
        }
        out.push_str(");\n");
    }
    for b in &p.bindings {
        let _ = writeln!(out, "{} <- {};", b.name, pretty_expr(&b.expr));
    }
    out.push_str(&pretty_expr(&p.result));
    out.push('\n');
    out
}

pub fn pretty_type(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Base(b) => b.clone(),
        TypeExpr::Var(v) => format!("'{v}"),
        TypeExpr::Dist(t) => format!("~{}", type_atom(t)),
        TypeExpr::Vector(t) => format!("[{}]", pretty_type(t)),
        TypeExpr::Tuple(ts) => {
            let items: Vec<_> = ts.iter().map(pretty_type).collect();
            format!("({})", items.join(", "))
        }
        TypeExpr::App(n, args) if args.is_empty() => n.clone(),
        TypeExpr::App(n, args) => {
            let items: Vec<_> = args.iter().map(type_atom).collect();
            format!("({n} {})", items.join(" "))
        }
        TypeExpr::Fun(a, b) => format!("({} => {})", pretty_type(a), pretty_type(b)),
    }
}

fn type_atom(t: &TypeExpr) -> String {
    // every compound form already prints its own parentheses
    pretty_type(t)
}

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(e, &mut out);
    out
}

fn is_atom(e: &Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::Literal(_)
            | ExprKind::Var(_)
            | ExprKind::Apply(..)
            | ExprKind::Index(..)
            | ExprKind::Construct(..)
            | ExprKind::VectorLit(_)
            | ExprKind::Tuple(_)
            | ExprKind::Reset(_)
    ) && !matches!(e.kind, ExprKind::Literal(Literal::Int(i)) if i < 0)
        && !matches!(e.kind, ExprKind::Literal(Literal::Real(r)) if r.is_sign_negative())
}

fn atom(e: &Expr, out: &mut String) {
    if is_atom(e) {
        expr(e, out);
    } else {
        out.push('(');
        expr(e, out);
        out.push(')');
    }
}

fn list(xs: &[Expr], out: &mut String) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(x, out);
    }
}

fn literal(l: &Literal, out: &mut String) {
    match l {
        Literal::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Literal::Real(r) => {
            let _ = write!(out, "{r:?}");
        }
        Literal::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Literal::Unit => out.push_str("()"),
        Literal::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    '\\' => out.push_str("\\\\"),
                    '"' => out.push_str("\\\""),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
    }
}

fn block_items(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Bind(name, rhs, body) => {
            if name != DISCARD {
                let _ = write!(out, "{name} <- ");
            }
            expr(rhs, out);
            out.push_str("; ");
            block_items(body, out);
        }
        _ => expr(e, out),
    }
}

fn expr(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Literal(l) => literal(l, out),
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Lambda(l) => {
            out.push_str("function (");
            for (i, p) in l.params.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&p.name);
                if let Some(t) = &p.ty {
                    let _ = write!(out, " : {}", pretty_type(t));
                }
            }
            out.push(')');
            if let Some(t) = &l.ret {
                let _ = write!(out, " : {}", pretty_type(t));
            }
            out.push_str(" { ");
            expr(&l.body, out);
            out.push_str(" }");
        }
        ExprKind::Apply(f, args) => {
            atom(f, out);
            out.push('(');
            list(args, out);
            out.push(')');
        }
        ExprKind::Bind(..) => {
            out.push_str("{ ");
            block_items(e, out);
            out.push_str(" }");
        }
        ExprKind::Block(stmts, last) => {
            out.push_str("{ ");
            for s in stmts {
                match s {
                    Stmt::Bind(n, rhs) => {
                        let _ = write!(out, "{n} <- ");
                        expr(rhs, out);
                    }
                    Stmt::Expr(rhs) => expr(rhs, out),
                }
                out.push_str("; ");
            }
            expr(last, out);
            out.push_str(" }");
        }
        ExprKind::If(c, t, f) => {
            out.push_str("if ");
            atom(c, out);
            out.push_str(" then ");
            atom(t, out);
            out.push_str(" else ");
            atom(f, out);
        }
        ExprKind::Case(s, arms) => {
            out.push_str("case ");
            atom(s, out);
            out.push_str(" {");
            for arm in arms {
                let _ = write!(out, " {}", arm.ctor);
                match &arm.pattern {
                    Pattern::Empty => {}
                    Pattern::Bind(x) => {
                        let _ = write!(out, " {x}");
                    }
                    Pattern::Tuple(xs) => {
                        let _ = write!(out, " ({})", xs.join(", "));
                    }
                }
                out.push_str(" = ");
                atom(&arm.body, out);
                out.push(';');
            }
            out.push_str(" }");
        }
        ExprKind::Construct(c, args) => {
            out.push_str(c);
            out.push('(');
            list(args, out);
            out.push(')');
        }
        ExprKind::VectorLit(xs) => {
            out.push('[');
            list(xs, out);
            out.push(']');
        }
        ExprKind::Tuple(xs) => {
            out.push('(');
            list(xs, out);
            out.push(')');
        }
        ExprKind::Index(v, i) => {
            atom(v, out);
            out.push('[');
            expr(i, out);
            out.push(']');
        }
        ExprKind::BinOp(op, l, r) => {
            atom(l, out);
            let _ = write!(out, " {} ", op.symbol());
            atom(r, out);
        }
        ExprKind::UnOp(op, a) => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            atom(a, out);
        }
        ExprKind::Shift(s) => {
            if s.k_ty.is_none() && s.body_ty.is_none() {
                let _ = write!(out, "shift({}, ", s.k);
                expr(&s.body, out);
                out.push(')');
            } else {
                out.push_str("shift (");
                out.push_str(&s.k);
                if let Some(t) = &s.k_ty {
                    let _ = write!(out, " : {}", pretty_type(t));
                }
                out.push(')');
                if let Some(t) = &s.body_ty {
                    let _ = write!(out, " : {}", pretty_type(t));
                }
                out.push_str(" { ");
                expr(&s.body, out);
                out.push_str(" }");
            }
        }
        ExprKind::Reset(b) => {
            out.push_str("reset(");
            expr(b, out);
            out.push(')');
        }
    }
}

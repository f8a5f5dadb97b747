use std::collections::BTreeSet;

use crate::builtins::Builtin;
use crate::frontend::ast::{Expr, ExprKind, Pattern, Stmt};

/// Every name referenced but not bound inside `e`, in first-occurrence
/// order. Includes names that may resolve to globals or builtins.
pub fn free_names(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    let mut bound = Vec::new();
    collect(e, &mut bound, &mut out);
    out
}

/// Free names of `e` that would become part of a closure environment:
/// builtins are resolved, not captured.
pub fn free_variables(e: &Expr) -> Vec<String> {
    free_names(e)
        .into_iter()
        .filter(|n| Builtin::from_name(n).is_none())
        .collect()
}

/// Unordered variant used for liveness.
pub fn free_name_set(e: &Expr) -> BTreeSet<String> {
    free_names(e).into_iter().collect()
}

fn note(name: &str, bound: &[String], out: &mut Vec<String>) {
    if !bound.iter().any(|b| b == name) && !out.iter().any(|o| o == name) {
        out.push(name.to_string());
    }
}

fn with_bound(bound: &mut Vec<String>, names: &[String], f: impl FnOnce(&mut Vec<String>)) {
    let n = bound.len();
    bound.extend(names.iter().cloned());
    f(bound);
    bound.truncate(n);
}

fn collect(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match &e.kind {
        ExprKind::Literal(_) => {}
        ExprKind::Var(n) => note(n, bound, out),
        ExprKind::Lambda(l) => {
            let names: Vec<String> = l.params.iter().map(|p| p.name.clone()).collect();
            with_bound(bound, &names, |b| collect(&l.body, b, out));
        }
        ExprKind::Apply(c, args) => {
            collect(c, bound, out);
            for a in args {
                collect(a, bound, out);
            }
        }
        ExprKind::Bind(x, rhs, body) => {
            collect(rhs, bound, out);
            with_bound(bound, std::slice::from_ref(x), |b| collect(body, b, out));
        }
        ExprKind::If(c, t, f) => {
            collect(c, bound, out);
            collect(t, bound, out);
            collect(f, bound, out);
        }
        ExprKind::Case(s, arms) => {
            collect(s, bound, out);
            for arm in arms {
                let names = match &arm.pattern {
                    Pattern::Empty => vec![],
                    Pattern::Bind(x) => vec![x.clone()],
                    Pattern::Tuple(xs) => xs.clone(),
                };
                with_bound(bound, &names, |b| collect(&arm.body, b, out));
            }
        }
        ExprKind::Construct(_, xs) | ExprKind::VectorLit(xs) | ExprKind::Tuple(xs) => {
            for x in xs {
                collect(x, bound, out);
            }
        }
        ExprKind::Index(a, b) | ExprKind::BinOp(_, a, b) => {
            collect(a, bound, out);
            collect(b, bound, out);
        }
        ExprKind::UnOp(_, a) | ExprKind::Reset(a) => collect(a, bound, out),
        ExprKind::Shift(s) => {
            with_bound(bound, std::slice::from_ref(&s.k), |b| collect(&s.body, b, out));
        }
        ExprKind::Block(stmts, last) => {
            let n = bound.len();
            for s in stmts {
                match s {
                    Stmt::Bind(x, rhs) => {
                        collect(rhs, bound, out);
                        bound.push(x.clone());
                    }
                    Stmt::Expr(x) => collect(x, bound, out),
                }
            }
            collect(last, bound, out);
            bound.truncate(n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_expr;

    fn fv(src: &str) -> Vec<String> {
        let e = parse_expr(src).unwrap();
        match &e.kind {
            ExprKind::Lambda(l) => free_variables(&l.body)
                .into_iter()
                .filter(|n| !l.params.iter().any(|p| &p.name == n))
                .collect(),
            _ => free_variables(&e),
        }
    }

    #[test]
    fn single_free_variable() {
        assert_eq!(fv("function (x) { x + y }"), vec!["y"]);
    }

    #[test]
    fn closed_term() {
        assert!(fv("function (x) { x }").is_empty());
    }

    #[test]
    fn builtins_are_not_captured() {
        assert!(fv("function (i) { sample*(normal(0, 10)) }").is_empty());
        assert_eq!(fv("function (i) { sample(normal(mu, 10)) }"), vec!["sample", "mu"]);
    }

    #[test]
    fn first_occurrence_order() {
        assert_eq!(fv("function (x) { b + a + b + { a <- 1; a + c } }"), vec!["b", "a", "c"]);
    }

    #[test]
    fn binders_scope_over_their_bodies() {
        let e = parse_expr("shift (k) { k(z) }").unwrap();
        assert_eq!(free_variables(&e), vec!["z"]);
    }
}

use std::collections::BTreeSet;

use super::{TyVar, Type, TypeError, TypedProgram};

/// A variable or `Pure` in value position that no generalization
/// quantified. Answer slots of arrows are not inspected: an unconstrained
/// answer type means "no control effect" and defaults to pure.
fn first_unresolved(t: &Type, generalized: &BTreeSet<TyVar>) -> bool {
    match t {
        Type::Var(v) => !generalized.contains(v),
        Type::Pure => true,
        Type::Base(_) => false,
        Type::Vector(e) | Type::Dist(e) => first_unresolved(e, generalized),
        Type::Tuple(ts) | Type::App(_, ts) => ts.iter().any(|t| first_unresolved(t, generalized)),
        Type::Fun(f) => first_unresolved(&f.param, generalized) || first_unresolved(&f.ret, generalized),
    }
}

/// Every expression must have a concrete type, up to variables quantified
/// by a polymorphic binding (those are specialized at each use).
pub fn check_monomorphic(tp: &TypedProgram) -> Result<(), TypeError> {
    let mut err = None;
    tp.program.for_each_expr(|e| {
        if err.is_some() {
            return;
        }
        if let Some(t) = tp.node_types.get(&e.id) {
            if first_unresolved(t, &tp.generalized) {
                err = Some(TypeError::NotConcrete {
                    ty: t.to_string(),
                    span: e.span.clone(),
                });
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if first_unresolved(&tp.result_type, &BTreeSet::new()) {
        return Err(TypeError::NotConcrete {
            ty: tp.result_type.to_string(),
            span: tp.program.result.span.clone(),
        });
    }
    Ok(())
}

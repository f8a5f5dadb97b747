use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Substitution, TyVar, TypeScheme};

#[derive(Debug)]
struct Node {
    name: String,
    scheme: TypeScheme,
    next: Option<Arc<Node>>,
}

/// Persistent environment: extension shares the existing chain.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    head: Option<Arc<Node>>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&self, name: impl Into<String>, scheme: TypeScheme) -> TypeEnv {
        TypeEnv {
            head: Some(Arc::new(Node {
                name: name.into(),
                scheme,
                next: self.head.clone(),
            })),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&TypeScheme> {
        let mut cur = self.head.as_deref();
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.scheme);
            }
            cur = node.next.as_deref();
        }
        None
    }

    /// Variables free in the environment after applying `s`.
    pub fn free_vars(&self, s: &Substitution) -> BTreeSet<TyVar> {
        let mut out = BTreeSet::new();
        let mut cur = self.head.as_deref();
        while let Some(node) = cur {
            let applied = TypeScheme {
                vars: node.scheme.vars.clone(),
                ty: s.apply(&node.scheme.ty),
            };
            applied.free_vars(&mut out);
            cur = node.next.as_deref();
        }
        out
    }

    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self.head.as_deref();
        while let Some(node) = cur {
            out.push(node.name.as_str());
            cur = node.next.as_deref();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Type;

    #[test]
    fn extension_is_persistent() {
        let base = TypeEnv::new().extend("x", TypeScheme::mono(Type::INT));
        let shadow = base.extend("x", TypeScheme::mono(Type::BOOL));
        assert_eq!(base.lookup("x").unwrap().ty, Type::INT);
        assert_eq!(shadow.lookup("x").unwrap().ty, Type::BOOL);
        assert!(base.lookup("y").is_none());
    }
}

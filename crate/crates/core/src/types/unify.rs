use std::collections::HashMap;
use std::ops::BitOr;

use super::{BaseType, Type, TyVar};

/// Constraints carried by a type variable through unification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VarFlags(u8);

impl VarFlags {
    pub const NONE: VarFlags = VarFlags(0);
    /// Must resolve to `int` or `real`.
    pub const NUMERIC: VarFlags = VarFlags(1);
    /// An answer type that may not become `Pure` (a shift's context).
    pub const NONPURE: VarFlags = VarFlags(2);

    pub fn contains(self, other: VarFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl BitOr for VarFlags {
    type Output = VarFlags;
    fn bitor(self, rhs: VarFlags) -> VarFlags {
        VarFlags(self.0 | rhs.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnifyError {
    #[error("cannot unify {0} with {1}")]
    Mismatch(Type, Type),
    #[error("occurs check: variable {0} in {1}")]
    Occurs(TyVar, Type),
    #[error("{0} is not numeric")]
    NotNumeric(Type),
    #[error("answer type escapes to the top level")]
    Escape,
}

/// A triangular substitution; [`Substitution::apply`] resolves fully.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Substitution {
    map: HashMap<TyVar, Type>,
    flags: HashMap<TyVar, VarFlags>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn flags(&self, v: TyVar) -> VarFlags {
        self.flags.get(&v).copied().unwrap_or_default()
    }

    pub fn add_flags(&mut self, v: TyVar, f: VarFlags) {
        if !f.is_empty() {
            let e = self.flags.entry(v).or_default();
            *e = *e | f;
        }
    }

    /// Follow variable bindings at the root only.
    pub fn shallow(&self, t: &Type) -> Type {
        let mut t = t.clone();
        while let Type::Var(v) = t {
            match self.map.get(&v) {
                Some(next) => t = next.clone(),
                None => break,
            }
        }
        t
    }

    pub fn apply(&self, t: &Type) -> Type {
        match t {
            Type::Var(v) => match self.map.get(v) {
                Some(u) => self.apply(u),
                None => t.clone(),
            },
            Type::Base(_) | Type::Pure => t.clone(),
            Type::Vector(e) => Type::vector(self.apply(e)),
            Type::Dist(e) => Type::dist(self.apply(e)),
            Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| self.apply(t)).collect()),
            Type::App(n, ts) => Type::App(n.clone(), ts.iter().map(|t| self.apply(t)).collect()),
            Type::Fun(f) => Type::fun(
                self.apply(&f.param),
                self.apply(&f.param_answer),
                self.apply(&f.ret),
                self.apply(&f.ret_answer),
            ),
        }
    }

    /// The substitution as an explicit, fully resolved map.
    pub fn resolved(&self) -> HashMap<TyVar, Type> {
        self.map.keys().map(|v| (*v, self.apply(&Type::Var(*v)))).collect()
    }

    fn occurs(&self, v: TyVar, t: &Type) -> bool {
        match t {
            Type::Var(w) => {
                if *w == v {
                    return true;
                }
                match self.map.get(w) {
                    Some(u) => self.occurs(v, u),
                    None => false,
                }
            }
            Type::Base(_) | Type::Pure => false,
            Type::Vector(e) | Type::Dist(e) => self.occurs(v, e),
            Type::Tuple(ts) | Type::App(_, ts) => ts.iter().any(|t| self.occurs(v, t)),
            Type::Fun(f) => {
                self.occurs(v, &f.param)
                    || self.occurs(v, &f.param_answer)
                    || self.occurs(v, &f.ret)
                    || self.occurs(v, &f.ret_answer)
            }
        }
    }

    /// Bind an unbound variable `v` to `t` (already shallow-resolved).
    fn bind(&mut self, v: TyVar, t: Type) -> Result<(), UnifyError> {
        if let Type::Var(w) = t {
            if w == v {
                return Ok(());
            }
            let f = self.flags(v);
            self.add_flags(w, f);
            self.map.insert(v, t);
            return Ok(());
        }
        if self.occurs(v, &t) {
            return Err(UnifyError::Occurs(v, self.apply(&t)));
        }
        let f = self.flags(v);
        if f.contains(VarFlags::NUMERIC)
            && !matches!(t, Type::Base(BaseType::Int) | Type::Base(BaseType::Real))
        {
            return Err(UnifyError::NotNumeric(self.apply(&t)));
        }
        if f.contains(VarFlags::NONPURE) && t == Type::Pure {
            return Err(UnifyError::Escape);
        }
        self.map.insert(v, t);
        Ok(())
    }

    pub fn unify(&mut self, a: &Type, b: &Type) -> Result<(), UnifyError> {
        let a = self.shallow(a);
        let b = self.shallow(b);
        match (&a, &b) {
            (Type::Var(v), _) => self.bind(*v, b),
            (_, Type::Var(v)) => self.bind(*v, a),
            (Type::Base(x), Type::Base(y)) if x == y => Ok(()),
            (Type::Pure, Type::Pure) => Ok(()),
            (Type::Vector(x), Type::Vector(y)) | (Type::Dist(x), Type::Dist(y)) => self.unify(x, y),
            (Type::Tuple(xs), Type::Tuple(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            (Type::App(n, xs), Type::App(m, ys)) if n == m && xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            (Type::Fun(f), Type::Fun(g)) => {
                self.unify(&f.param, &g.param)?;
                self.unify(&f.param_answer, &g.param_answer)?;
                self.unify(&f.ret, &g.ret)?;
                self.unify(&f.ret_answer, &g.ret_answer)
            }
            _ => Err(UnifyError::Mismatch(self.apply(&a), self.apply(&b))),
        }
    }
}

/// Functional form: the extension of `s` that unifies `t1` and `t2`.
pub fn unify(t1: &Type, t2: &Type, s: &Substitution) -> Result<Substitution, UnifyError> {
    let mut s = s.clone();
    s.unify(t1, t2)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: Type = Type::Var(0);

    #[test]
    fn binds_variable() {
        let s = unify(&A, &Type::INT, &Substitution::new()).unwrap();
        assert_eq!(s.resolved(), HashMap::from([(0, Type::INT)]));
    }

    #[test]
    fn answer_slots_unify_componentwise() {
        let (p, q) = (Type::Var(1), Type::Var(2));
        let l = Type::fun(Type::INT, p.clone(), Type::BOOL, p.clone());
        let r = Type::fun(Type::INT, q.clone(), Type::BOOL, Type::STR);
        let s = unify(&l, &r, &Substitution::new()).unwrap();
        assert_eq!(s.resolved(), HashMap::from([(1, Type::STR), (2, Type::STR)]));
        assert_eq!(s.apply(&l), s.apply(&r));
    }

    #[test]
    fn occurs_check() {
        let t = Type::fun(A, Type::Var(9), Type::INT, Type::Var(9));
        assert!(matches!(
            unify(&A, &t, &Substitution::new()),
            Err(UnifyError::Occurs(0, _))
        ));
    }

    #[test]
    fn pure_never_meets_concrete() {
        assert!(unify(&Type::Pure, &Type::INT, &Substitution::new()).is_err());
        assert!(unify(&Type::Pure, &Type::Pure, &Substitution::new()).is_ok());
    }

    #[test]
    fn flags_propagate() {
        let mut s = Substitution::new();
        s.add_flags(0, VarFlags::NUMERIC);
        s.unify(&A, &Type::Var(1)).unwrap();
        assert_eq!(
            s.unify(&Type::Var(1), &Type::BOOL),
            Err(UnifyError::NotNumeric(Type::BOOL))
        );
        let mut s = Substitution::new();
        s.add_flags(3, VarFlags::NONPURE);
        assert_eq!(s.unify(&Type::Pure, &Type::Var(3)), Err(UnifyError::Escape));
    }

    fn arb_type() -> impl Strategy<Value = Type> {
        let leaf = prop_oneof![
            Just(Type::INT),
            Just(Type::BOOL),
            Just(Type::REAL),
            (0u32..6).prop_map(Type::Var),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Type::vector),
                proptest::collection::vec(inner.clone(), 2..3).prop_map(Type::Tuple),
                (inner.clone(), inner.clone(), inner.clone(), inner)
                    .prop_map(|(a, b, c, d)| Type::fun(a, b, c, d)),
            ]
        })
    }

    proptest! {
        #[test]
        fn apply_is_idempotent(pairs in proptest::collection::vec((arb_type(), arb_type()), 1..6), probe in arb_type()) {
            let mut s = Substitution::new();
            for (a, b) in &pairs {
                let _ = s.clone().unify(a, b).map(|_| s.unify(a, b));
            }
            let once = s.apply(&probe);
            prop_assert_eq!(s.apply(&once), once);
        }

        #[test]
        fn unifier_equates(a in arb_type(), b in arb_type()) {
            if let Ok(s) = unify(&a, &b, &Substitution::new()) {
                prop_assert_eq!(s.apply(&a), s.apply(&b));
            }
        }
    }
}

//! Hindley–Milner inference with answer types.
//!
//! A judgment carries a value type and an incoming/outgoing answer-type pair.
//! Function arrows record the answer types of their body:
//! `t1/a1 -> t2/a2`. The pseudo-type [`Type::Pure`] marks the answer type of
//! a context with no enclosing delimiter.

mod builtins;
mod check;
mod env;
mod infer;
mod unify;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::frontend::{NodeId, Program, SourceSpan};

pub use builtins::builtin_scheme;
pub use check::check_monomorphic;
pub use env::TypeEnv;
pub use infer::{infer_expr, infer_program, Inference};
pub use unify::{unify, Substitution, UnifyError, VarFlags};

pub type TyVar = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseType {
    Int,
    Real,
    Bool,
    Unit,
    Str,
}

impl BaseType {
    pub fn name(self) -> &'static str {
        match self {
            BaseType::Int => "int",
            BaseType::Real => "real",
            BaseType::Bool => "bool",
            BaseType::Unit => "unit",
            BaseType::Str => "string",
        }
    }

    pub fn from_name(s: &str) -> Option<BaseType> {
        Some(match s {
            "int" => BaseType::Int,
            "real" => BaseType::Real,
            "bool" => BaseType::Bool,
            "unit" => BaseType::Unit,
            "string" => BaseType::Str,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Base(BaseType),
    Vector(Box<Type>),
    Tuple(Vec<Type>),
    /// A declared sum type applied to its arguments.
    App(String, Vec<Type>),
    Dist(Box<Type>),
    /// `param/param_answer -> ret/ret_answer`
    Fun(Box<FunType>),
    Var(TyVar),
    /// The empty answer type: no enclosing reset.
    Pure,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunType {
    pub param: Type,
    pub param_answer: Type,
    pub ret: Type,
    pub ret_answer: Type,
}

/// Answer types share the representation of value types plus `Pure`.
pub type AnswerType = Type;

impl Type {
    pub const INT: Type = Type::Base(BaseType::Int);
    pub const REAL: Type = Type::Base(BaseType::Real);
    pub const BOOL: Type = Type::Base(BaseType::Bool);
    pub const UNIT: Type = Type::Base(BaseType::Unit);
    pub const STR: Type = Type::Base(BaseType::Str);

    pub fn fun(param: Type, param_answer: Type, ret: Type, ret_answer: Type) -> Type {
        Type::Fun(Box::new(FunType {
            param,
            param_answer,
            ret,
            ret_answer,
        }))
    }

    pub fn vector(t: Type) -> Type {
        Type::Vector(Box::new(t))
    }

    pub fn dist(t: Type) -> Type {
        Type::Dist(Box::new(t))
    }

    /// Parameter type of a function taking `params` surface arguments.
    pub fn params(mut params: Vec<Type>) -> Type {
        match params.len() {
            0 => Type::UNIT,
            1 => params.pop().unwrap(),
            _ => Type::Tuple(params),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<TyVar>) {
        match self {
            Type::Var(v) => {
                out.insert(*v);
            }
            Type::Base(_) | Type::Pure => {}
            Type::Vector(t) | Type::Dist(t) => t.free_vars(out),
            Type::Tuple(ts) | Type::App(_, ts) => ts.iter().for_each(|t| t.free_vars(out)),
            Type::Fun(f) => {
                f.param.free_vars(out);
                f.param_answer.free_vars(out);
                f.ret.free_vars(out);
                f.ret_answer.free_vars(out);
            }
        }
    }

    pub fn occurs(&self, v: TyVar) -> bool {
        match self {
            Type::Var(w) => *w == v,
            Type::Base(_) | Type::Pure => false,
            Type::Vector(t) | Type::Dist(t) => t.occurs(v),
            Type::Tuple(ts) | Type::App(_, ts) => ts.iter().any(|t| t.occurs(v)),
            Type::Fun(f) => {
                f.param.occurs(v)
                    || f.param_answer.occurs(v)
                    || f.ret.occurs(v)
                    || f.ret_answer.occurs(v)
            }
        }
    }

    /// Replace variables according to `map`, leaving others untouched.
    pub fn rename(&self, map: &HashMap<TyVar, Type>) -> Type {
        match self {
            Type::Var(v) => map.get(v).cloned().unwrap_or(Type::Var(*v)),
            Type::Base(_) | Type::Pure => self.clone(),
            Type::Vector(t) => Type::vector(t.rename(map)),
            Type::Dist(t) => Type::dist(t.rename(map)),
            Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| t.rename(map)).collect()),
            Type::App(n, ts) => Type::App(n.clone(), ts.iter().map(|t| t.rename(map)).collect()),
            Type::Fun(f) => Type::fun(
                f.param.rename(map),
                f.param_answer.rename(map),
                f.ret.rename(map),
                f.ret_answer.rename(map),
            ),
        }
    }

    /// Alpha-equivalence: equal up to a bijective renaming of variables.
    pub fn alpha_eq(&self, other: &Type) -> bool {
        fn go(a: &Type, b: &Type, fw: &mut HashMap<TyVar, TyVar>, bw: &mut HashMap<TyVar, TyVar>) -> bool {
            match (a, b) {
                (Type::Var(x), Type::Var(y)) => {
                    let f = *fw.entry(*x).or_insert(*y);
                    let g = *bw.entry(*y).or_insert(*x);
                    f == *y && g == *x
                }
                (Type::Base(x), Type::Base(y)) => x == y,
                (Type::Pure, Type::Pure) => true,
                (Type::Vector(x), Type::Vector(y)) | (Type::Dist(x), Type::Dist(y)) => go(x, y, fw, bw),
                (Type::Tuple(xs), Type::Tuple(ys)) => {
                    xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fw, bw))
                }
                (Type::App(n, xs), Type::App(m, ys)) => {
                    n == m && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fw, bw))
                }
                (Type::Fun(f), Type::Fun(g)) => {
                    go(&f.param, &g.param, fw, bw)
                        && go(&f.param_answer, &g.param_answer, fw, bw)
                        && go(&f.ret, &g.ret, fw, bw)
                        && go(&f.ret_answer, &g.ret_answer, fw, bw)
                }
                _ => false,
            }
        }
        go(self, other, &mut HashMap::new(), &mut HashMap::new())
    }
}

/// Names type variables `'a`, `'b`, … in order of first appearance.
#[derive(Default)]
pub struct TypePrinter {
    names: BTreeMap<TyVar, String>,
}

impl TypePrinter {
    pub fn new() -> Self {
        Self::default()
    }

    fn var_name(&mut self, v: TyVar) -> String {
        let n = self.names.len();
        self.names
            .entry(v)
            .or_insert_with(|| {
                let letter = (b'a' + (n % 26) as u8) as char;
                if n < 26 {
                    format!("'{letter}")
                } else {
                    format!("'{letter}{}", n / 26)
                }
            })
            .clone()
    }

    pub fn print(&mut self, t: &Type) -> String {
        match t {
            Type::Base(b) => b.name().to_string(),
            Type::Pure => "pure".to_string(),
            Type::Var(v) => self.var_name(*v),
            Type::Vector(t) => format!("[{}]", self.print(t)),
            Type::Dist(t) => format!("~{}", self.atom(t)),
            Type::Tuple(ts) => {
                let items: Vec<_> = ts.iter().map(|t| self.print(t)).collect();
                format!("({})", items.join(", "))
            }
            Type::App(n, ts) if ts.is_empty() => n.clone(),
            Type::App(n, ts) => {
                let items: Vec<_> = ts.iter().map(|t| self.atom(t)).collect();
                format!("({n} {})", items.join(" "))
            }
            Type::Fun(f) => {
                let p = self.atom(&f.param);
                let pa = self.atom(&f.param_answer);
                let r = self.atom(&f.ret);
                let ra = self.atom(&f.ret_answer);
                format!("{p}/{pa} -> {r}/{ra}")
            }
        }
    }

    fn atom(&mut self, t: &Type) -> String {
        match t {
            Type::Fun(_) => format!("({})", self.print(t)),
            _ => self.print(t),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&TypePrinter::new().print(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeScheme {
    pub vars: Vec<TyVar>,
    pub ty: Type,
}

impl TypeScheme {
    pub fn mono(ty: Type) -> Self {
        TypeScheme { vars: vec![], ty }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<TyVar>) {
        let mut inner = BTreeSet::new();
        self.ty.free_vars(&mut inner);
        for v in inner {
            if !self.vars.contains(&v) {
                out.insert(v);
            }
        }
    }
}

impl fmt::Display for TypeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ty)
    }
}

/// How `e[i]` was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Project(usize),
    VectorGet,
}

/// A constructor of a declared sum type.
#[derive(Debug, Clone, PartialEq)]
pub struct CtorInfo {
    pub type_name: String,
    pub tag: u32,
    /// Number of payload fields when the payload is a tuple, 0 for unit, else 1.
    pub fields: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TypeError {
    #[error("type mismatch in rule {rule}: expected {expected}, found {found} at {span}")]
    Mismatch {
        expected: String,
        found: String,
        rule: &'static str,
        span: SourceSpan,
    },
    #[error("infinite type: {var} occurs in {ty} (rule {rule}) at {span}")]
    Occurs {
        var: String,
        ty: String,
        rule: &'static str,
        span: SourceSpan,
    },
    #[error("unbound identifier `{name}` at {span}")]
    Unbound { name: String, span: SourceSpan },
    #[error("shift outside reset: its answer type escapes the top level at {span}")]
    ShiftOutsideReset { span: SourceSpan },
    #[error("could not statically determine the concrete type of the expression ({ty}) at {span}")]
    NotConcrete { ty: String, span: SourceSpan },
    #[error("{ty} is not numeric at {span}")]
    NotNumeric { ty: String, span: SourceSpan },
    #[error("{message} at {span}")]
    Declaration { message: String, span: SourceSpan },
    #[error("{message} at {span}")]
    Pattern { message: String, span: SourceSpan },
}

impl TypeError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            TypeError::Mismatch { span, .. }
            | TypeError::Occurs { span, .. }
            | TypeError::Unbound { span, .. }
            | TypeError::ShiftOutsideReset { span }
            | TypeError::NotConcrete { span, .. }
            | TypeError::NotNumeric { span, .. }
            | TypeError::Declaration { span, .. }
            | TypeError::Pattern { span, .. } => span,
        }
    }

    /// Short kind name used by diagnostics and test expectations.
    pub fn kind(&self) -> &'static str {
        match self {
            TypeError::Mismatch { .. } => "TypeError",
            TypeError::Occurs { .. } => "OccursError",
            TypeError::Unbound { .. } => "UnboundError",
            TypeError::ShiftOutsideReset { .. } => "ShiftOutsideReset",
            TypeError::NotConcrete { .. } => "NotConcreteError",
            TypeError::NotNumeric { .. } => "TypeError",
            TypeError::Declaration { .. } => "TypeError",
            TypeError::Pattern { .. } => "TypeError",
        }
    }
}

/// Result of typing a whole program.
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    /// Fully resolved value type of every expression node.
    pub node_types: HashMap<NodeId, Type>,
    pub index_kinds: HashMap<NodeId, IndexKind>,
    pub ctors: HashMap<String, CtorInfo>,
    /// Scheme of each top-level binding, in program order.
    pub schemes: Vec<(String, TypeScheme)>,
    pub result_type: Type,
    /// Variables quantified by some generalization.
    pub generalized: BTreeSet<TyVar>,
}

impl TypedProgram {
    /// `name : type` lines for user bindings.
    pub fn dump_types(&self) -> String {
        let mut out = String::new();
        for (b, (name, scheme)) in self.program.bindings.iter().zip(&self.schemes) {
            if b.prelude {
                continue;
            }
            out.push_str(&format!("{name} : {}\n", TypePrinter::new().print(&scheme.ty)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_arrow() {
        let t = Type::fun(Type::INT, Type::Var(7), Type::INT, Type::Var(7));
        assert_eq!(t.to_string(), "int/'a -> int/'a");
        let t = Type::fun(
            Type::fun(Type::UNIT, Type::Var(1), Type::Var(2), Type::Var(3)),
            Type::Pure,
            Type::App("List".into(), vec![Type::INT]),
            Type::Var(1),
        );
        assert_eq!(t.to_string(), "(unit/'a -> 'b/'c)/pure -> (List int)/'a");
    }

    #[test]
    fn alpha_equivalence() {
        let a = Type::fun(Type::Var(1), Type::Var(2), Type::Var(1), Type::Var(2));
        let b = Type::fun(Type::Var(5), Type::Var(9), Type::Var(5), Type::Var(9));
        let c = Type::fun(Type::Var(5), Type::Var(5), Type::Var(5), Type::Var(5));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
    }
}

#[cfg(test)]
mod infer_tests;

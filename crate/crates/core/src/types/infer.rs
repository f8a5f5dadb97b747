use std::collections::{BTreeSet, HashMap};

use crate::builtins::Builtin;
use crate::frontend::ast::*;
use crate::frontend::desugar::DISCARD;
use crate::frontend::SourceSpan;

use super::builtins::builtin_scheme;
use super::{
    CtorInfo, IndexKind, Substitution, TyVar, Type, TypeEnv, TypeError, TypeScheme, TypedProgram,
    UnifyError, VarFlags,
};

/// A judgment `e : ty` that moves the answer type from `ans_in` to `ans_out`.
#[derive(Debug, Clone)]
struct Judgment {
    ty: Type,
    ans_in: Type,
    ans_out: Type,
}

struct TypeDef {
    params: Vec<TyVar>,
}

/// Inference state for one program: substitution, fresh-variable supply and
/// per-node results.
pub struct Inference {
    pub subst: Substitution,
    next_var: TyVar,
    types: HashMap<String, TypeDef>,
    ctor_payload: HashMap<String, Type>,
    ctors: HashMap<String, CtorInfo>,
    node_types: HashMap<NodeId, Type>,
    index_kinds: HashMap<NodeId, IndexKind>,
    generalized: BTreeSet<TyVar>,
    numeric: Vec<Type>,
    /// Expected type of the lambda about to be inferred, taken from the
    /// callee it is passed to. Only moves unifications earlier, so that
    /// `p[0]` on a tuple-typed parameter resolves as a projection.
    lambda_hint: Option<Type>,
}

impl Default for Inference {
    fn default() -> Self {
        Self::new()
    }
}

impl Inference {
    pub fn new() -> Self {
        Inference {
            subst: Substitution::new(),
            next_var: 0,
            types: HashMap::new(),
            ctor_payload: HashMap::new(),
            ctors: HashMap::new(),
            node_types: HashMap::new(),
            index_kinds: HashMap::new(),
            generalized: BTreeSet::new(),
            numeric: Vec::new(),
            lambda_hint: None,
        }
    }

    pub fn fresh(&mut self) -> Type {
        let v = self.next_var;
        self.next_var += 1;
        Type::Var(v)
    }

    fn fresh_flagged(&mut self, f: VarFlags) -> Type {
        let t = self.fresh();
        if let Type::Var(v) = t {
            self.subst.add_flags(v, f);
        }
        t
    }

    fn pure(&mut self, ty: Type) -> Judgment {
        let g = self.fresh();
        Judgment {
            ty,
            ans_in: g.clone(),
            ans_out: g,
        }
    }

    fn unify_at(&mut self, a: &Type, b: &Type, rule: &'static str, span: &SourceSpan) -> Result<(), TypeError> {
        self.subst.unify(a, b).map_err(|e| match e {
            UnifyError::Mismatch(x, y) => TypeError::Mismatch {
                expected: x.to_string(),
                found: y.to_string(),
                rule,
                span: span.clone(),
            },
            UnifyError::Occurs(v, t) => TypeError::Occurs {
                var: Type::Var(v).to_string(),
                ty: t.to_string(),
                rule,
                span: span.clone(),
            },
            UnifyError::NotNumeric(t) => TypeError::NotNumeric {
                ty: t.to_string(),
                span: span.clone(),
            },
            UnifyError::Escape => TypeError::ShiftOutsideReset { span: span.clone() },
        })
    }

    /// Thread answer types through subexpressions evaluated left to right.
    fn seq(&mut self, parts: &[Judgment], ty: Type, span: &SourceSpan) -> Result<Judgment, TypeError> {
        if parts.is_empty() {
            return Ok(self.pure(ty));
        }
        for w in parts.windows(2) {
            self.unify_at(&w[0].ans_in, &w[1].ans_out, "expr", span)?;
        }
        Ok(Judgment {
            ty,
            ans_in: parts.last().unwrap().ans_in.clone(),
            ans_out: parts[0].ans_out.clone(),
        })
    }

    pub fn instantiate(&mut self, s: &TypeScheme) -> Type {
        if s.vars.is_empty() {
            return s.ty.clone();
        }
        let mut map = HashMap::new();
        for v in &s.vars {
            let f = self.subst.flags(*v);
            map.insert(*v, self.fresh_flagged(f));
        }
        s.ty.rename(&map)
    }

    pub fn generalize(&mut self, env: &TypeEnv, t: &Type) -> TypeScheme {
        let t = self.subst.apply(t);
        let mut fv = BTreeSet::new();
        t.free_vars(&mut fv);
        let env_fv = env.free_vars(&self.subst);
        let vars: Vec<TyVar> = fv.difference(&env_fv).copied().collect();
        self.generalized.extend(vars.iter().copied());
        TypeScheme { vars, ty: t }
    }

    fn instantiate_builtin(&mut self, b: Builtin) -> Type {
        let (scheme, flags) = builtin_scheme(b);
        let mut map = HashMap::new();
        for v in &scheme.vars {
            let f = flags
                .iter()
                .find(|(w, _)| w == v)
                .map(|(_, f)| *f)
                .unwrap_or_default();
            map.insert(*v, self.fresh_flagged(f));
        }
        scheme.ty.rename(&map)
    }

    fn require_numeric(&mut self, t: &Type, span: &SourceSpan) -> Result<(), TypeError> {
        match self.subst.shallow(t) {
            Type::Var(v) => {
                self.subst.add_flags(v, VarFlags::NUMERIC);
                self.numeric.push(Type::Var(v));
                Ok(())
            }
            Type::Base(super::BaseType::Int) | Type::Base(super::BaseType::Real) => Ok(()),
            other => Err(TypeError::NotNumeric {
                ty: self.subst.apply(&other).to_string(),
                span: span.clone(),
            }),
        }
    }

    // ---- declarations -----------------------------------------------------

    pub fn declare_types(&mut self, decls: &[TypeDecl]) -> Result<(), TypeError> {
        for d in decls {
            if self.types.contains_key(&d.name) {
                return Err(TypeError::Declaration {
                    message: format!("type `{}` declared twice", d.name),
                    span: d.span.clone(),
                });
            }
            let params = d
                .params
                .iter()
                .map(|_| match self.fresh() {
                    Type::Var(v) => v,
                    _ => unreachable!(),
                })
                .collect();
            self.types.insert(
                d.name.clone(),
                TypeDef { params },
            );
        }
        for d in decls {
            let params = self.types[&d.name].params.clone();
            let mut tvars: HashMap<String, Type> = d
                .params
                .iter()
                .cloned()
                .zip(params.iter().map(|v| Type::Var(*v)))
                .collect();
            for (tag, (ctor, payload)) in d.ctors.iter().enumerate() {
                if self.ctors.contains_key(ctor) {
                    return Err(TypeError::Declaration {
                        message: format!("constructor `{ctor}` declared twice"),
                        span: d.span.clone(),
                    });
                }
                let before = tvars.len();
                let ty = self.convert(payload, &mut tvars, &d.span)?;
                if tvars.len() != before {
                    return Err(TypeError::Declaration {
                        message: format!("type variable in `{ctor}` is not a parameter of `{}`", d.name),
                        span: d.span.clone(),
                    });
                }
                let fields = match &ty {
                    Type::Tuple(ts) => ts.len(),
                    Type::Base(super::BaseType::Unit) => 0,
                    _ => 1,
                };
                self.ctor_payload.insert(ctor.clone(), ty);
                self.ctors.insert(
                    ctor.clone(),
                    CtorInfo {
                        type_name: d.name.clone(),
                        tag: tag as u32,
                        fields,
                    },
                );
            }
        }
        Ok(())
    }

    /// Surface annotation to a type; named variables are shared through
    /// `tvars`.
    fn convert(
        &mut self,
        t: &TypeExpr,
        tvars: &mut HashMap<String, Type>,
        span: &SourceSpan,
    ) -> Result<Type, TypeError> {
        Ok(match t {
            TypeExpr::Base(b) => match super::BaseType::from_name(b) {
                Some(b) => Type::Base(b),
                None => {
                    return Err(TypeError::Declaration {
                        message: format!("unknown type `{b}`"),
                        span: span.clone(),
                    })
                }
            },
            TypeExpr::Var(v) => match tvars.get(v) {
                Some(t) => t.clone(),
                None => {
                    let t = self.fresh();
                    tvars.insert(v.clone(), t.clone());
                    t
                }
            },
            TypeExpr::Dist(t) => Type::dist(self.convert(t, tvars, span)?),
            TypeExpr::Vector(t) => Type::vector(self.convert(t, tvars, span)?),
            TypeExpr::Tuple(ts) => Type::Tuple(
                ts.iter()
                    .map(|t| self.convert(t, tvars, span))
                    .collect::<Result<_, _>>()?,
            ),
            TypeExpr::App(name, args) => {
                let Some(def) = self.types.get(name) else {
                    return Err(TypeError::Declaration {
                        message: format!("unknown type `{name}`"),
                        span: span.clone(),
                    });
                };
                if def.params.len() != args.len() {
                    return Err(TypeError::Declaration {
                        message: format!(
                            "type `{name}` expects {} argument(s), found {}",
                            def.params.len(),
                            args.len()
                        ),
                        span: span.clone(),
                    });
                }
                let args = args
                    .iter()
                    .map(|t| self.convert(t, tvars, span))
                    .collect::<Result<_, _>>()?;
                Type::App(name.clone(), args)
            }
            TypeExpr::Fun(a, b) => {
                let a = self.convert(a, tvars, span)?;
                let b = self.convert(b, tvars, span)?;
                let (x, y) = (self.fresh(), self.fresh());
                Type::fun(a, x, b, y)
            }
        })
    }

    /// Fresh instance of a sum type and the payload type of `ctor` in it.
    fn ctor_instance(&mut self, ctor: &str, span: &SourceSpan) -> Result<(Type, Type), TypeError> {
        let Some(info) = self.ctors.get(ctor) else {
            return Err(TypeError::Unbound {
                name: ctor.to_string(),
                span: span.clone(),
            });
        };
        let name = info.type_name.clone();
        let params = self.types[&name].params.clone();
        let mut map = HashMap::new();
        let mut args = Vec::new();
        for p in params {
            let f = self.fresh();
            map.insert(p, f.clone());
            args.push(f);
        }
        let payload = self.ctor_payload[ctor].rename(&map);
        Ok((Type::App(name, args), payload))
    }

    // ---- expressions ------------------------------------------------------

    fn infer(
        &mut self,
        env: &TypeEnv,
        e: &Expr,
        tvars: &mut HashMap<String, Type>,
    ) -> Result<Judgment, TypeError> {
        let j = self.infer_kind(env, e, tvars)?;
        self.node_types.insert(e.id, j.ty.clone());
        Ok(j)
    }

    fn infer_kind(
        &mut self,
        env: &TypeEnv,
        e: &Expr,
        tvars: &mut HashMap<String, Type>,
    ) -> Result<Judgment, TypeError> {
        let span = &e.span;
        match &e.kind {
            ExprKind::Literal(l) => {
                let ty = match l {
                    Literal::Int(_) => Type::INT,
                    Literal::Real(_) => Type::REAL,
                    Literal::Bool(_) => Type::BOOL,
                    Literal::Unit => Type::UNIT,
                    Literal::Str(_) => Type::STR,
                };
                Ok(self.pure(ty))
            }
            ExprKind::Var(name) => {
                let ty = if let Some(s) = env.lookup(name) {
                    let s = s.clone();
                    self.instantiate(&s)
                } else if let Some(b) = Builtin::from_name(name) {
                    self.instantiate_builtin(b)
                } else {
                    return Err(TypeError::Unbound {
                        name: name.clone(),
                        span: span.clone(),
                    });
                };
                Ok(self.pure(ty))
            }
            ExprKind::Lambda(l) => {
                let hint = self.lambda_hint.take();
                let mut inner = env.clone();
                let mut params = Vec::new();
                for p in &l.params {
                    let t = match &p.ty {
                        Some(t) => self.convert(t, tvars, span)?,
                        None => self.fresh(),
                    };
                    inner = inner.extend(p.name.clone(), TypeScheme::mono(t.clone()));
                    params.push(t);
                }
                if let Some(h) = hint {
                    if let Type::Fun(hf) = self.subst.shallow(&h) {
                        self.unify_at(&Type::params(params.clone()), &hf.param, "apply", span)?;
                    }
                }
                let jb = self.infer(&inner, &l.body, tvars)?;
                if let Some(r) = &l.ret {
                    let r = self.convert(r, tvars, span)?;
                    self.unify_at(&r, &jb.ty, "lambda", &l.body.span)?;
                }
                let ty = Type::fun(Type::params(params), jb.ans_in, jb.ty, jb.ans_out);
                Ok(self.pure(ty))
            }
            ExprKind::Apply(callee, args) => {
                let jc = self.infer(env, callee, tvars)?;
                let mut parts = vec![jc.clone()];
                let mut arg_tys = Vec::new();
                let hints: Vec<Type> = match self.subst.shallow(&jc.ty) {
                    Type::Fun(f) => match (self.subst.shallow(&f.param), args.len()) {
                        (p, 1) => vec![p],
                        (Type::Tuple(ts), n) if ts.len() == n => ts,
                        _ => vec![],
                    },
                    _ => vec![],
                };
                for (i, a) in args.iter().enumerate() {
                    if matches!(a.kind, ExprKind::Lambda(_)) {
                        self.lambda_hint = hints.get(i).cloned();
                    }
                    let ja = self.infer(env, a, tvars)?;
                    arg_tys.push(ja.ty.clone());
                    parts.push(ja);
                }
                let (alpha, ret, alpha2) = (self.fresh(), self.fresh(), self.fresh());
                let expected = Type::fun(Type::params(arg_tys), alpha.clone(), ret.clone(), alpha2.clone());
                self.unify_at(&jc.ty, &expected, "apply", span)?;
                parts.push(Judgment {
                    ty: ret.clone(),
                    ans_in: alpha,
                    ans_out: alpha2,
                });
                self.seq(&parts, ret, span)
            }
            ExprKind::Bind(name, rhs, body) => {
                let jr = self.infer(env, rhs, tvars)?;
                let inner = if name == DISCARD {
                    env.clone()
                } else {
                    let scheme = if rhs.is_syntactic_value() {
                        self.generalize(env, &jr.ty)
                    } else {
                        TypeScheme::mono(jr.ty.clone())
                    };
                    env.extend(name.clone(), scheme)
                };
                let jb = self.infer(&inner, body, tvars)?;
                let ty = jb.ty.clone();
                self.seq(&[jr, jb], ty, span)
            }
            ExprKind::If(c, t, f) => {
                let jc = self.infer(env, c, tvars)?;
                self.unify_at(&jc.ty, &Type::BOOL, "if", &c.span)?;
                let jt = self.infer(env, t, tvars)?;
                let jf = self.infer(env, f, tvars)?;
                self.unify_at(&jt.ty, &jf.ty, "if", &f.span)?;
                self.unify_at(&jt.ans_in, &jf.ans_in, "if", &f.span)?;
                self.unify_at(&jt.ans_out, &jf.ans_out, "if", &f.span)?;
                let ty = jt.ty.clone();
                self.seq(&[jc, jt], ty, span)
            }
            ExprKind::Case(scrutinee, arms) => {
                let js = self.infer(env, scrutinee, tvars)?;
                let first = &arms[0].ctor;
                let (sum_ty, _) = self.ctor_instance(first, span)?;
                let Type::App(type_name, _) = &sum_ty else { unreachable!() };
                let type_name = type_name.clone();
                self.unify_at(&js.ty, &sum_ty, "case", &scrutinee.span)?;
                let mut seen = BTreeSet::new();
                let mut result: Option<Judgment> = None;
                for arm in arms {
                    if !seen.insert(arm.ctor.clone()) {
                        return Err(TypeError::Pattern {
                            message: format!("duplicate case arm `{}`", arm.ctor),
                            span: arm.body.span.clone(),
                        });
                    }
                    let (arm_ty, payload) = self.ctor_instance(&arm.ctor, span)?;
                    if !matches!(&arm_ty, Type::App(n, _) if *n == type_name) {
                        return Err(TypeError::Pattern {
                            message: format!("constructor `{}` does not belong to `{type_name}`", arm.ctor),
                            span: arm.body.span.clone(),
                        });
                    }
                    self.unify_at(&arm_ty, &sum_ty, "case", span)?;
                    let inner = match &arm.pattern {
                        Pattern::Empty => env.clone(),
                        Pattern::Bind(x) => env.extend(x.clone(), TypeScheme::mono(payload)),
                        Pattern::Tuple(xs) => {
                            let Type::Tuple(fields) = self.subst.apply(&payload) else {
                                return Err(TypeError::Pattern {
                                    message: format!("constructor `{}` has no tuple payload", arm.ctor),
                                    span: arm.body.span.clone(),
                                });
                            };
                            if fields.len() != xs.len() {
                                return Err(TypeError::Pattern {
                                    message: format!(
                                        "constructor `{}` has {} fields, pattern binds {}",
                                        arm.ctor,
                                        fields.len(),
                                        xs.len()
                                    ),
                                    span: arm.body.span.clone(),
                                });
                            }
                            let mut inner = env.clone();
                            for (x, t) in xs.iter().zip(fields) {
                                inner = inner.extend(x.clone(), TypeScheme::mono(t));
                            }
                            inner
                        }
                    };
                    let ja = self.infer(&inner, &arm.body, tvars)?;
                    match &result {
                        None => result = Some(ja),
                        Some(r) => {
                            let r = r.clone();
                            self.unify_at(&r.ty, &ja.ty, "case", &arm.body.span)?;
                            self.unify_at(&r.ans_in, &ja.ans_in, "case", &arm.body.span)?;
                            self.unify_at(&r.ans_out, &ja.ans_out, "case", &arm.body.span)?;
                        }
                    }
                }
                let ja = result.unwrap();
                let ty = ja.ty.clone();
                self.seq(&[js, ja], ty, span)
            }
            ExprKind::Construct(ctor, args) => {
                let (ty, payload) = self.ctor_instance(ctor, span)?;
                let mut parts = Vec::new();
                let mut tys = Vec::new();
                for a in args {
                    let ja = self.infer(env, a, tvars)?;
                    tys.push(ja.ty.clone());
                    parts.push(ja);
                }
                self.unify_at(&payload, &Type::params(tys), "construct", span)?;
                self.seq(&parts, ty, span)
            }
            ExprKind::VectorLit(xs) => {
                let elem = self.fresh();
                let mut parts = Vec::new();
                for x in xs {
                    let jx = self.infer(env, x, tvars)?;
                    self.unify_at(&elem, &jx.ty, "vector", &x.span)?;
                    parts.push(jx);
                }
                self.seq(&parts, Type::vector(elem), span)
            }
            ExprKind::Tuple(xs) => {
                let mut parts = Vec::new();
                let mut tys = Vec::new();
                for x in xs {
                    let jx = self.infer(env, x, tvars)?;
                    tys.push(jx.ty.clone());
                    parts.push(jx);
                }
                self.seq(&parts, Type::Tuple(tys), span)
            }
            ExprKind::Index(v, i) => {
                let jv = self.infer(env, v, tvars)?;
                let ji = self.infer(env, i, tvars)?;
                let ty = match self.subst.shallow(&jv.ty) {
                    Type::Tuple(ts) => {
                        let ExprKind::Literal(Literal::Int(k)) = i.kind else {
                            return Err(TypeError::Pattern {
                                message: "tuple index must be an integer literal".into(),
                                span: i.span.clone(),
                            });
                        };
                        if k < 0 || k as usize >= ts.len() {
                            return Err(TypeError::Pattern {
                                message: format!("tuple index {k} out of range for {} fields", ts.len()),
                                span: i.span.clone(),
                            });
                        }
                        self.index_kinds.insert(e.id, IndexKind::Project(k as usize));
                        ts[k as usize].clone()
                    }
                    _ => {
                        let elem = self.fresh();
                        self.unify_at(&jv.ty, &Type::vector(elem.clone()), "index", &v.span)?;
                        self.unify_at(&ji.ty, &Type::INT, "index", &i.span)?;
                        self.index_kinds.insert(e.id, IndexKind::VectorGet);
                        elem
                    }
                };
                self.seq(&[jv, ji], ty, span)
            }
            ExprKind::BinOp(op, l, r) => {
                let jl = self.infer(env, l, tvars)?;
                let jr = self.infer(env, r, tvars)?;
                let ty = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        self.unify_at(&jl.ty, &jr.ty, "expr", span)?;
                        self.require_numeric(&jl.ty, span)?;
                        jl.ty.clone()
                    }
                    BinOp::Mod => {
                        self.unify_at(&jl.ty, &Type::INT, "expr", &l.span)?;
                        self.unify_at(&jr.ty, &Type::INT, "expr", &r.span)?;
                        Type::INT
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        self.unify_at(&jl.ty, &jr.ty, "expr", span)?;
                        self.require_numeric(&jl.ty, span)?;
                        Type::BOOL
                    }
                    BinOp::Eq | BinOp::Ne => {
                        self.unify_at(&jl.ty, &jr.ty, "expr", span)?;
                        Type::BOOL
                    }
                    BinOp::And | BinOp::Or => {
                        self.unify_at(&jl.ty, &Type::BOOL, "expr", &l.span)?;
                        self.unify_at(&jr.ty, &Type::BOOL, "expr", &r.span)?;
                        // the right operand may be skipped, so it must be pure
                        self.unify_at(&jr.ans_in, &jr.ans_out, "expr", &r.span)?;
                        Type::BOOL
                    }
                };
                self.seq(&[jl, jr], ty, span)
            }
            ExprKind::UnOp(op, a) => {
                let ja = self.infer(env, a, tvars)?;
                match op {
                    UnOp::Neg => self.require_numeric(&ja.ty, span)?,
                    UnOp::Not => self.unify_at(&ja.ty, &Type::BOOL, "expr", span)?,
                }
                Ok(ja)
            }
            ExprKind::Shift(s) => {
                let tau = self.fresh();
                let alpha = self.fresh_flagged(VarFlags::NONPURE);
                match &s.k_ty {
                    Some(TypeExpr::Fun(a, b)) => {
                        let a = self.convert(a, tvars, span)?;
                        let b = self.convert(b, tvars, span)?;
                        self.unify_at(&a, &tau, "shift", span)?;
                        self.unify_at(&b, &alpha, "shift", span)?;
                    }
                    Some(t) => {
                        let t = self.convert(t, tvars, span)?;
                        self.unify_at(&t, &tau, "shift", span)?;
                    }
                    None => {}
                }
                let t = self.fresh();
                let Type::Var(tv) = t else { unreachable!() };
                self.generalized.insert(tv);
                let k_scheme = TypeScheme {
                    vars: vec![tv],
                    ty: Type::fun(tau.clone(), t.clone(), alpha.clone(), t),
                };
                let inner = env.extend(s.k.clone(), k_scheme);
                let jb = self.infer(&inner, &s.body, tvars)?;
                self.unify_at(&jb.ty, &jb.ans_in, "shift", &s.body.span)?;
                if let Some(bt) = &s.body_ty {
                    let bt = self.convert(bt, tvars, span)?;
                    self.unify_at(&bt, &jb.ty, "shift", &s.body.span)?;
                }
                Ok(Judgment {
                    ty: tau,
                    ans_in: alpha,
                    ans_out: jb.ans_out,
                })
            }
            ExprKind::Reset(b) => {
                let jb = self.infer(env, b, tvars)?;
                self.unify_at(&jb.ty, &jb.ans_in, "reset", &b.span)?;
                Ok(self.pure(jb.ans_out))
            }
            ExprKind::Block(..) => {
                let mut next = u32::MAX / 2;
                let d = crate::frontend::desugar::desugar_expr(e.clone(), &mut next);
                self.infer_kind(env, &d, tvars)
            }
        }
    }

    /// Unresolved numeric variables that were never generalized become int.
    fn default_numeric(&mut self) {
        let pending = std::mem::take(&mut self.numeric);
        for t in pending {
            if let Type::Var(v) = self.subst.shallow(&t) {
                if !self.generalized.contains(&v) {
                    let _ = self.subst.unify(&Type::Var(v), &Type::INT);
                }
            }
        }
    }
}

/// Infer a closed expression against an incoming answer type. Returns the
/// value type, the outgoing answer type and the final substitution.
pub fn infer_expr(
    env: &TypeEnv,
    e: &Expr,
    incoming: &Type,
) -> Result<(Type, Type, Substitution), TypeError> {
    let mut inf = Inference::new();
    // keep fresh variables clear of anything already in the environment
    let mut fv = BTreeSet::new();
    for name in env.names() {
        if let Some(s) = env.lookup(name) {
            s.ty.free_vars(&mut fv);
            fv.extend(s.vars.iter().copied());
        }
    }
    inf.next_var = fv.last().map_or(0, |v| v + 1);
    incoming.free_vars(&mut fv);
    inf.next_var = inf.next_var.max(fv.last().map_or(0, |v| v + 1));
    let j = inf.infer(env, e, &mut HashMap::new())?;
    inf.unify_at(&j.ans_in, incoming, "expr", &e.span)?;
    let ty = inf.subst.apply(&j.ty);
    let out = inf.subst.apply(&j.ans_out);
    Ok((ty, out, inf.subst))
}

/// Type a whole program. Each top-level binding and the result are checked
/// with no enclosing delimiter.
pub fn infer_program(program: Program) -> Result<TypedProgram, TypeError> {
    let mut inf = Inference::new();
    inf.declare_types(&program.type_decls)?;
    let mut env = TypeEnv::new();
    let mut schemes = Vec::new();
    for b in &program.bindings {
        let mut tvars = HashMap::new();
        let is_fn = matches!(b.expr.kind, ExprKind::Lambda(_));
        let self_ty = inf.fresh();
        let rec_env = if is_fn {
            env.extend(b.name.clone(), TypeScheme::mono(self_ty.clone()))
        } else {
            env.clone()
        };
        let j = inf.infer(&rec_env, &b.expr, &mut tvars)?;
        if is_fn {
            inf.unify_at(&self_ty, &j.ty, "lambda", &b.span)?;
        }
        inf.unify_at(&j.ans_in, &Type::Pure, "expr", &b.span)?;
        inf.unify_at(&j.ans_out, &Type::Pure, "expr", &b.span)?;
        let scheme = if b.expr.is_syntactic_value() {
            inf.generalize(&env, &j.ty)
        } else {
            TypeScheme::mono(j.ty.clone())
        };
        env = env.extend(b.name.clone(), scheme.clone());
        schemes.push((b.name.clone(), scheme));
    }
    let j = inf.infer(&env, &program.result, &mut HashMap::new())?;
    inf.unify_at(&j.ans_in, &Type::Pure, "expr", &program.result.span)?;
    inf.unify_at(&j.ans_out, &Type::Pure, "expr", &program.result.span)?;
    inf.default_numeric();
    let node_types = inf
        .node_types
        .iter()
        .map(|(id, t)| (*id, inf.subst.apply(t)))
        .collect();
    let schemes = schemes
        .into_iter()
        .map(|(n, s)| {
            let ty = inf.subst.apply(&s.ty);
            (n, TypeScheme { vars: s.vars, ty })
        })
        .collect();
    let result_type = inf.subst.apply(&j.ty);
    Ok(TypedProgram {
        program,
        node_types,
        index_kinds: inf.index_kinds,
        ctors: inf.ctors,
        schemes,
        result_type,
        generalized: inf.generalized,
    })
}

use super::*;
use crate::frontend::{desugar, parse_expr, parser};

fn check_src(src: &str) -> Result<TypedProgram, TypeError> {
    let prelude = format!("{}()", crate::prelude::PRELUDE);
    let pre = parser::parse_file_from(&prelude, "<prelude>", 0).unwrap();
    let mut user = parser::parse_file_from(src, "t.cup", pre.next_id).unwrap();
    let mut bindings: Vec<_> = pre
        .bindings
        .into_iter()
        .map(|mut b| {
            b.prelude = true;
            b
        })
        .collect();
    bindings.append(&mut user.bindings);
    let p = desugar(Program {
        type_decls: user.type_decls,
        bindings,
        result: user.result,
        next_id: user.next_id,
    });
    let tp = infer_program(p)?;
    check_monomorphic(&tp)?;
    Ok(tp)
}

fn expr_type(src: &str) -> Result<(Type, Type), TypeError> {
    let mut next = 1_000_000;
    let e = crate::frontend::desugar::desugar_expr(parse_expr(src).unwrap(), &mut next);
    let (t, out, _) = infer_expr(&TypeEnv::new(), &e, &Type::Pure)?;
    Ok((t, out))
}

#[test]
fn reset_shift_is_int_and_pure() {
    assert_eq!(expr_type("reset(1 + shift(k, k(2)))").unwrap(), (Type::INT, Type::Pure));
    assert_eq!(expr_type("1 + reset(3 + shift(k, 1))").unwrap(), (Type::INT, Type::Pure));
}

#[test]
fn pure_lambda_arrow() {
    let (t, _) = expr_type("function (x) { x + 1 }").unwrap();
    let Type::Fun(f) = &t else { panic!("{t}") };
    assert_eq!(f.param, Type::INT);
    assert_eq!(f.ret, Type::INT);
    assert_eq!(f.param_answer, f.ret_answer);
    assert!(matches!(f.param_answer, Type::Var(_)));
    assert_eq!(t.to_string(), "int/'a -> int/'a");
}

#[test]
fn continuation_argument_mismatch() {
    let err = expr_type("reset(1 + shift(k, k(true)))").unwrap_err();
    assert!(matches!(err, TypeError::Mismatch { .. }), "{err}");
}

#[test]
fn answer_type_modification() {
    // the continuation returns int but the reset delivers a bool
    let (t, _) = expr_type("reset(1 + shift(k, k(2) == 3))").unwrap();
    assert_eq!(t, Type::BOOL);
}

#[test]
fn shift_without_reset_is_rejected() {
    let err = expr_type("shift(k, 1)").unwrap_err();
    assert!(matches!(err, TypeError::ShiftOutsideReset { .. }), "{err}");
    let err = check_src("x <- sample(bernoulli(0.5));\nx").unwrap_err();
    assert!(matches!(err, TypeError::ShiftOutsideReset { .. }), "{err}");
}

#[test]
fn prelude_types() {
    let tp = check_src("model <- function () { if sample(bernoulli(0.5)) then 1 else 0 };\nimportance(model, 10)").unwrap();
    let get = |n: &str| tp.schemes.iter().find(|(x, _)| x == n).unwrap().1.ty.to_string();
    assert_eq!(get("sample"), "~'a/'b -> 'a/'b");
    assert_eq!(get("factor"), "real/'a -> unit/'a");
    assert_eq!(get("model"), "unit/'a -> int/'a");
    assert_eq!(tp.result_type, Type::dist(Type::INT));
    assert_eq!(tp.dump_types(), "model : unit/'a -> int/'a\n");
}

#[test]
fn generalize_and_instantiate() {
    let mut inf = Inference::new();
    let a = inf.fresh();
    let b = inf.fresh();
    let id = Type::fun(a.clone(), b.clone(), a.clone(), b.clone());
    let s = inf.generalize(&TypeEnv::new(), &id);
    assert_eq!(s.vars.len(), 2);
    let t1 = inf.instantiate(&s);
    let t2 = inf.instantiate(&s);
    assert!(t1.alpha_eq(&id) && t2.alpha_eq(&id));
    let (mut f1, mut f2) = (BTreeSet::new(), BTreeSet::new());
    t1.free_vars(&mut f1);
    t2.free_vars(&mut f2);
    assert!(f1.is_disjoint(&f2));

    let env = TypeEnv::new().extend("x", TypeScheme::mono(a.clone()));
    let c = inf.fresh();
    let s = inf.generalize(&env, &Type::fun(a.clone(), b.clone(), c.clone(), b.clone()));
    let Type::Var(a_id) = a else { unreachable!() };
    assert!(!s.vars.contains(&a_id));
    assert_eq!(s.vars.len(), 2);
}

#[test]
fn monomorphic_checks() {
    let list = "type List 'a : (+ (Nil : unit) (Cons : ('a, (List 'a))));\n";
    assert!(check_src(&format!("{list}len <- function (l : (List int)) : int {{ case l {{ Nil = 0 Cons (a, r) = 1 + len(r) }} }};\nlen(Cons(1, Nil))")).is_ok());
    let err = check_src("id <- function (x) { x };\nid").unwrap_err();
    assert!(matches!(err, TypeError::NotConcrete { .. }), "{err}");
    assert!(check_src("1 + 2 * 3").is_ok());
}

#[test]
fn polymorphic_let_is_specialized_per_use() {
    let tp = check_src("id <- function (x) { x };\n(id(1), id(true))").unwrap();
    assert_eq!(tp.result_type, Type::Tuple(vec![Type::INT, Type::BOOL]));
}

#[test]
fn numeric_constraints() {
    assert!(check_src("1 + 2.0").is_err());
    assert!(check_src("true + true").is_err());
    let tp = check_src("add <- function (x, y) { x + y };\n(add(1, 2), add(1.5, 2.5))").unwrap();
    assert_eq!(tp.result_type, Type::Tuple(vec![Type::INT, Type::REAL]));
    assert!(check_src("add <- function (x, y) { x + y };\nadd(true, false)").is_err());
}

#[test]
fn pure_expression_has_equal_answers() {
    let mut next = 1_000_000;
    let e = crate::frontend::desugar::desugar_expr(
        parse_expr("{ f <- function (x) { x * 2 }; v <- [1, 2, 3]; map(f, v) }").unwrap(),
        &mut next,
    );
    let a = Type::Var(999_999);
    let (t, out, _) = infer_expr(&TypeEnv::new(), &e, &a).unwrap();
    assert_eq!(t, Type::vector(Type::INT));
    assert_eq!(out, a);
}

#[test]
fn principal_type_stable() {
    let src = "function (f, x) { f(f(x)) }";
    let (a, _) = expr_type(src).unwrap();
    let (b, _) = expr_type(src).unwrap();
    assert!(a.alpha_eq(&b));
}

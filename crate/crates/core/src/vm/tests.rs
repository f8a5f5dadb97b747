use std::sync::Arc;

use super::*;
use crate::pipeline::compile;

fn eval(src: &str) -> Result<Value, VmError> {
    let c = compile(src, "t.cup").unwrap_or_else(|e| panic!("{e}"));
    let ctx = VmContext::new(c.module.clone());
    run(&ctx, &mut PriorHandler, &mut Rng::new(0))
}

fn show(src: &str) -> String {
    eval(src).unwrap_or_else(|e| panic!("{e}: {}", e.detail())).to_string()
}

#[test]
fn shift_reset_examples() {
    assert_eq!(show("reset(1 + shift(k, k(2)))"), "3");
    assert_eq!(show("1 + reset(3 + shift(k, 1))"), "2");
}

#[test]
fn reset_of_value_is_value() {
    assert_eq!(show("reset(5)"), "5");
    assert_eq!(show("reset(true)"), "true");
}

#[test]
fn shift_discarding_k_returns_body() {
    assert_eq!(show("reset(10 * shift(k, 7))"), "7");
}

#[test]
fn multi_shot_continuation() {
    assert_eq!(show("reset(1 + shift(k, k(k(10))))"), "12");
    assert_eq!(show("reset([shift(k, concat(k(1), k(2)))])"), "[1, 2]");
}

#[test]
fn continuation_inside_function_call() {
    let src = "f <- function (x) { x + shift(k, k(k(x))) };\nreset(f(1) * 2)";
    // k = fun v -> (1 + v) * 2; k(k(1)) = k(4) = 10
    assert_eq!(show(src), "10");
}

pub(crate) const PREFIX: &str = r#"
type List : (+ (Cons : (int, List)) (Nil : unit));
append <- function (a, b) {
  case a { Cons (h, t) => Cons(h, append(t, b)); Nil => b }
};
visit <- function (lst) {
  case lst {
    Cons (a, rst) => Cons(a, shift(k, append(k(Nil()), reset(k(visit(rst))))));
    Nil => shift(k, Nil())
  }
};
prefix <- function (lst) { reset(visit(lst)) };
to-vec <- function (l) { case l { Cons (h, t) => concat([h], to-vec(t)); Nil => [] } };
to-vec(prefix(Cons(1, Cons(2, Cons(3, Nil())))))
"#;

#[test]
fn prefix_program() {
    assert_eq!(show(PREFIX), "[1, 1, 2, 1, 2, 3]");
}

#[test]
fn vector_builtins() {
    assert_eq!(show("repeat(function (i) { i }, 3)"), "[0, 1, 2]");
    assert_eq!(show("reduce(function (p) { p[0] + p[1] }, 0, [1, 1, 1, 1])"), "4");
    assert_eq!(show("filter(function (x) { x % 2 == 0 }, [1, 2, 3, 4])"), "[2, 4]");
    assert_eq!(show("map(function (x) { x * x }, [1, 2, 3])"), "[1, 4, 9]");
    assert_eq!(show("map(to-real, [1, 2])"), "[1.0, 2.0]");
}

#[test]
fn continuation_captured_inside_loop() {
    // the shift captures the rest of the loop, so every path is run twice
    let src = "reset(length(map(function (x) { shift(k, k(x) + k(x)) }, [1, 2, 3])))";
    assert_eq!(show(src), "24");
}

#[test]
fn recursion_and_case() {
    let src = "type L : (+ (C : (int, L)) (N : unit));\n\
               len <- function (l) { case l { C (h, t) => 1 + len(t); N => 0 } };\n\
               len(C(1, C(2, C(3, N()))))";
    assert_eq!(show(src), "3");
}

#[test]
fn runtime_errors_have_spans() {
    let e = eval("[1, 2][5]").unwrap_err();
    assert_eq!(e.kind.name(), "IndexOutOfBounds");
    assert_eq!(e.to_string(), "IndexOutOfBounds at t.cup:1:1");
    let e = eval("1 / 0").unwrap_err();
    assert_eq!(e.kind, VmErrorKind::DivisionByZero);
}

#[test]
fn stack_overflow_is_clean() {
    let c = compile("f <- function (n) { 1 + f(n + 1) };\nf(0)", "t.cup").unwrap();
    let ctx = VmContext::new(c.module.clone()).with_options(VmOptions {
        stack_slots: 4096,
        ..VmOptions::default()
    });
    let e = run(&ctx, &mut PriorHandler, &mut Rng::new(0)).unwrap_err();
    assert_eq!(e.kind, VmErrorKind::StackOverflow { limit: 4096 });
}

#[test]
fn step_limit() {
    let c = compile("f <- function (n) { if n > 0 { f(n) } else { f(n + 1) } };\nf(0) + 1", "t.cup").unwrap();
    let ctx = VmContext::new(c.module.clone()).with_options(VmOptions {
        max_steps: Some(10_000),
        ..VmOptions::default()
    });
    let e = run(&ctx, &mut PriorHandler, &mut Rng::new(0)).unwrap_err();
    assert_eq!(e.kind, VmErrorKind::StepLimitExceeded { limit: 10_000 });
}

#[test]
fn deterministic_sampling() {
    let src = "model <- function () { sample(normal(0.0, 1.0)) + sample(normal(0.0, 1.0)) };\ninfer-run(model)";
    assert_eq!(show(src), show(src));
}

fn machine() -> Machine {
    let c = compile("()", "t.cup").unwrap();
    Machine::new(VmContext::new(c.module.clone()))
}

#[test]
fn stack_save_and_restore() {
    let mut m = machine();
    for i in 0..3 {
        m.push(Value::Int(i)).unwrap();
    }
    let saved = m.stack_save(1).unwrap();
    assert_eq!(saved.slots, vec![Value::Int(1), Value::Int(2)]);
    assert_eq!(m.depth(), 1);
    m.stack_restore(&saved).unwrap();
    m.stack_restore(&saved).unwrap();
    assert_eq!(m.depth(), 5);
    let empty = m.stack_save(5).unwrap();
    assert_eq!(empty.count(), 0);
    m.stack_restore(&empty).unwrap();
    assert_eq!(m.depth(), 5);
    assert!(matches!(
        m.stack_save(9).unwrap_err().kind,
        VmErrorKind::BoundaryError { boundary: 9, depth: 5 }
    ));
}

#[test]
fn shadow_checks_run_during_execution() {
    let c = compile(PREFIX, "t.cup").unwrap();
    let mut m = Machine::new(VmContext::new(c.module.clone()));
    m.run_main(&mut PriorHandler, &mut Rng::new(0)).unwrap();
    assert!(m.stats.return_checks > 10);
    assert!(m.stats.reset_checks > 0);
    assert!(m.stats.restores > m.stats.captures);
}

#[test]
fn host_calls_follow_protocol() {
    let c = compile("double <- function (x) { x * 2 };\n()", "t.cup").unwrap();
    let mut m = Machine::new(VmContext::new(c.module.clone()));
    m.run_init(&mut PriorHandler, &mut Rng::new(0)).unwrap();
    let ctx = m.context().clone();
    let mut m2 = Machine::new(ctx);
    let out = m2.call_global("double", Value::Int(21), &mut PriorHandler, &mut Rng::new(0)).unwrap();
    assert!(matches!(out, Outcome::Done(Value::Int(42))));
    let _ = Arc::strong_count(&c.module);
}

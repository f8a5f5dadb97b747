use proptest::prelude::*;

use cup_core::infer::{prepare, run_enumeration, InferConfig};
use cup_core::pipeline::compile;
use cup_core::vm::{run, DistValue, Machine, PriorHandler, Rng, Value, VmContext, VmOptions};

#[derive(Debug, Clone)]
enum E {
    Lit(i64),
    Add(Box<E>, Box<E>),
    Sub(Box<E>, Box<E>),
    Mul(Box<E>, Box<E>),
    If(Box<E>, Box<E>, Box<E>),
}

impl E {
    fn src(&self) -> String {
        match self {
            E::Lit(n) if *n < 0 => format!("(0 - {})", -n),
            E::Lit(n) => n.to_string(),
            E::Add(a, b) => format!("({} + {})", a.src(), b.src()),
            E::Sub(a, b) => format!("({} - {})", a.src(), b.src()),
            E::Mul(a, b) => format!("({} * {})", a.src(), b.src()),
            E::If(c, a, b) => format!("(if {} < 0 {{ {} }} else {{ {} }})", c.src(), a.src(), b.src()),
        }
    }

    fn eval(&self) -> i64 {
        match self {
            E::Lit(n) => *n,
            E::Add(a, b) => a.eval().wrapping_add(b.eval()),
            E::Sub(a, b) => a.eval().wrapping_sub(b.eval()),
            E::Mul(a, b) => a.eval().wrapping_mul(b.eval()),
            E::If(c, a, b) => {
                if c.eval() < 0 {
                    a.eval()
                } else {
                    b.eval()
                }
            }
        }
    }
}

fn expr() -> impl Strategy<Value = E> {
    (-50i64..50).prop_map(E::Lit).prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone(), inner).prop_map(|(c, a, b)| E::If(Box::new(c), Box::new(a), Box::new(b))),
        ]
    })
}

fn eval(src: &str) -> Value {
    let c = compile(src, "p.cup").unwrap_or_else(|e| panic!("{e}\n{src}"));
    let mut m = Machine::new(VmContext::new(c.module));
    let v = m.run_main(&mut PriorHandler, &mut Rng::new(0)).unwrap_or_else(|e| panic!("{e}\n{src}"));
    assert!(m.stats.return_checks > 0);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arithmetic_matches_host_evaluation(e in expr()) {
        prop_assert_eq!(eval(&e.src()), Value::Int(e.eval()));
    }

    #[test]
    fn arithmetic_inside_called_function(e in expr(), x in -20i64..20) {
        // the expression is evaluated with an extra frame and a live local
        let src = format!("f <- function (y) {{ y + {} }};\nf({})", e.src(), E::Lit(x).src());
        prop_assert_eq!(eval(&src), Value::Int(x.wrapping_add(e.eval())));
    }

    #[test]
    fn two_shot_continuation_closed_form(a in -100i64..100, b in -100i64..100, c in -100i64..100, m in -5i64..5) {
        let src = format!(
            "reset({} + shift(k, k({}) * {} + k({})))",
            E::Lit(a).src(), E::Lit(b).src(), E::Lit(m).src(), E::Lit(c).src()
        );
        prop_assert_eq!(eval(&src), Value::Int((a + b) * m + (a + c)));
    }

    #[test]
    fn nested_resets_are_independent(xs in prop::collection::vec(-30i64..30, 1..6)) {
        // reset(x0 + shift(k, k(k(0)))) + ... : each term is 2 * x_i
        let src = xs
            .iter()
            .map(|x| format!("reset({} + shift(k, k(k(0))))", E::Lit(*x).src()))
            .collect::<Vec<_>>()
            .join(" + ");
        prop_assert_eq!(eval(&src), Value::Int(xs.iter().map(|x| 2 * x).sum()));
    }

    #[test]
    fn enumeration_of_independent_coins_is_a_convolution(ps in prop::collection::vec(0.05f64..0.95, 1..7)) {
        let flips = ps
            .iter()
            .map(|p| format!("(if sample(bernoulli({p:?})) {{ 1 }} else {{ 0 }})"))
            .collect::<Vec<_>>()
            .join(" + ");
        let src = format!("model <- function () {{ {flips} }};\ninfer-run(model)");
        let c = compile(&src, "p.cup").unwrap();
        let ctx = prepare(c.module, VmOptions::default(), InferConfig::default(), 0).unwrap();
        let model = ctx.global("model").cloned().unwrap();
        let d = run_enumeration(&ctx, &model, 1 << 10, None).unwrap();
        let mut pmf = vec![1.0];
        for p in &ps {
            let mut next = vec![0.0; pmf.len() + 1];
            for (k, q) in pmf.iter().enumerate() {
                next[k] += q * (1.0 - p);
                next[k + 1] += q * p;
            }
            pmf = next;
        }
        for (k, q) in pmf.iter().enumerate() {
            prop_assert!((d.prob(&Value::Int(k as i64)) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_draws_score_finitely(a in -20i64..20, w in 1i64..20, seed in any::<u64>()) {
        let d = DistValue::uniform_discrete(a, a + w).unwrap();
        let mut rng = Rng::new(seed);
        for _ in 0..16 {
            let x = d.sample(&mut rng).unwrap();
            let s = d.score(&x).unwrap();
            prop_assert!((s + (w as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_seeds_equal_draws(seed in any::<u64>()) {
        let src = "sample*(normal(0.0, 1.0)) + sample*(normal(0.0, 1.0))";
        let c = compile(src, "p.cup").unwrap();
        let ctx = VmContext::new(c.module);
        let a = run(&ctx, &mut PriorHandler, &mut Rng::new(seed)).unwrap();
        let b = run(&ctx, &mut PriorHandler, &mut Rng::new(seed)).unwrap();
        prop_assert_eq!(a, b);
    }
}

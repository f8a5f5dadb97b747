use std::collections::HashMap;

use proptest::prelude::*;

use super::*;
use crate::pipeline::compile;
use crate::vm::{Directive, DistValue, Handler, Machine, Outcome, Rng, VmErrorKind, VmOptions};

fn setup(bindings: &str) -> (VmContext, Value) {
    let src = format!("{bindings};\ninfer-run(model)");
    let c = compile(&src, "t.cup").unwrap_or_else(|e| panic!("{e}"));
    let ctx = prepare(c.module, VmOptions::default(), InferConfig::default(), 0).unwrap();
    let model = ctx.global("model").cloned().unwrap();
    (ctx, model)
}

fn prob(d: &EmpiricalDistribution, v: Value) -> f64 {
    d.prob(&v)
}

fn tv(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let mut keys: Vec<&Value> = a.support.iter().chain(&b.support).map(|(v, _)| v).collect();
    keys.dedup();
    let mut seen = std::collections::HashSet::new();
    keys.retain(|k| seen.insert(*k));
    0.5 * keys.iter().map(|k| (a.prob(k) - b.prob(k)).abs()).sum::<f64>()
}

const COIN: &str = "model <- function () { sample(bernoulli(0.3)) }";
const GEOM: &str = "geom <- function () { if sample(bernoulli(0.5)) { 0 } else { 1 + geom() } };\n\
                    model <- function () { geom() }";
const TWO_COINS: &str = "model <- function () {\n\
    pick <- sample(bernoulli(0.5));\n\
    x <- if pick { sample(bernoulli(0.2)) } else { sample(bernoulli(0.9)) };\n\
    observe(bernoulli(if x { 0.7 } else { 0.4 }), true);\n\
    (pick, x)\n\
}";
const BIASED: &str = "model <- function () {\n\
    p <- sample(beta(1.0, 1.0));\n\
    _ <- map(function (h) { observe(bernoulli(p), h) },\n\
        [true, true, false, true, true, true, false, true, true, true]);\n\
    p\n\
}";

#[test]
fn enumeration_of_single_choice() {
    let (ctx, model) = setup(COIN);
    let d = run_enumeration(&ctx, &model, 100, None).unwrap();
    assert!((prob(&d, Value::Bool(true)) - 0.3).abs() < 1e-15);
    assert!((prob(&d, Value::Bool(false)) - 0.7).abs() < 1e-15);
    assert_eq!(d.count, 2);
}

#[test]
fn enumeration_truncated_geometric() {
    let (ctx, model) = setup(GEOM);
    let r = enumerate_paths(&ctx, &model, 10_000, Some(20)).unwrap();
    let z: f64 = (0..20).map(|k| 0.5f64.powi(k + 1)).sum();
    for k in 0..20 {
        let want = 0.5f64.powi(k + 1) / z;
        assert!((r.posterior.prob(&Value::Int(k as i64)) - want).abs() < 1e-9, "k = {k}");
    }
    assert_eq!(r.posterior.support.len(), 20);
    assert_eq!(r.truncated, 1);
    assert!(!r.exhausted_budget);
}

#[test]
fn enumeration_budget_counts_completed_paths() {
    let (ctx, model) = setup(GEOM);
    let r = enumerate_paths(&ctx, &model, 5, None).unwrap();
    assert_eq!(r.posterior.count, 5);
    assert!(r.exhausted_budget);
}

#[test]
fn enumeration_applies_factors() {
    let (ctx, model) = setup(TWO_COINS);
    let d = run_enumeration(&ctx, &model, 100, None).unwrap();
    let joint = |pick: bool, x: bool| {
        let px = if pick { 0.2 } else { 0.9 };
        0.5 * if x { px } else { 1.0 - px } * if x { 0.7 } else { 0.4 }
    };
    let z: f64 = [(true, true), (true, false), (false, true), (false, false)]
        .iter()
        .map(|&(a, b)| joint(a, b))
        .sum();
    for (a, b) in [(true, true), (true, false), (false, true), (false, false)] {
        let v = Value::tuple(vec![Value::Bool(a), Value::Bool(b)]);
        assert!((d.prob(&v) - joint(a, b) / z).abs() < 1e-12);
    }
    assert!((d.log_z.unwrap() - z.ln()).abs() < 1e-12);
}

#[test]
fn enumeration_prunes_impossible_paths() {
    let (ctx, model) = setup("model <- function () { x <- sample(bernoulli(0.5)); factor(if x { 0.0 } else { log(0.0) }); x }");
    let d = run_enumeration(&ctx, &model, 100, None).unwrap();
    assert_eq!(d.support, vec![(Value::Bool(true), 1.0)]);
}

#[test]
fn enumeration_rejects_continuous() {
    let (ctx, model) = setup("model <- function () { sample(normal(0.0, 1.0)) }");
    let e = run_enumeration(&ctx, &model, 100, None).unwrap_err();
    assert_eq!(e.kind, VmErrorKind::ContinuousDist);
}

#[test]
fn importance_prior_only() {
    let (ctx, model) = setup("model <- function () { sample(bernoulli(0.5)) }");
    let d = run_importance(&ctx, &model, 100_000, 3, true).unwrap();
    assert!((prob(&d, Value::Bool(true)) - 0.5).abs() < 0.01);
    assert_eq!(d.count, 100_000);
}

#[test]
fn importance_biased_coin_posterior_mean() {
    let (ctx, model) = setup(BIASED);
    let d = run_importance(&ctx, &model, 100_000, 11, true).unwrap();
    // beta(1, 1) prior with 8 heads and 2 tails: posterior beta(9, 3)
    assert!((d.mean().unwrap() - 0.75).abs() < 0.02);
}

#[test]
fn importance_single_sample() {
    let (ctx, model) = setup(COIN);
    let d = run_importance(&ctx, &model, 1, 5, false).unwrap();
    assert_eq!(d.support.len(), 1);
    assert_eq!(d.support[0].1, 1.0);
}

#[test]
fn importance_parallel_matches_sequential() {
    let (ctx, model) = setup(BIASED);
    let a = run_importance(&ctx, &model, 2_000, 9, true).unwrap();
    let b = run_importance(&ctx, &model, 2_000, 9, false).unwrap();
    assert_eq!(a, b);
}

#[test]
fn importance_error_names_particle() {
    let (ctx, model) = setup("model <- function () { x <- sample(uniform-discrete(0, 3)); 10 / x }");
    let e = run_importance(&ctx, &model, 200, 1, false).unwrap_err();
    assert_eq!(e.kind, VmErrorKind::DivisionByZero);
    assert!(e.detail().contains("seed 1"), "{}", e.detail());
}

#[test]
fn lmh_prior_only() {
    let (ctx, model) = setup(COIN);
    let d = run_lmh(&ctx, &model, 100_000, 1, LmhOptions::default()).unwrap();
    assert!((prob(&d, Value::Bool(true)) - 0.3).abs() < 0.02);
}

#[test]
fn lmh_matches_enumeration() {
    let (ctx, model) = setup(TWO_COINS);
    let exact = run_enumeration(&ctx, &model, 100, None).unwrap();
    let d = run_lmh(&ctx, &model, 100_000, 2, LmhOptions::default()).unwrap();
    assert!(tv(&exact, &d) < 0.02, "tv = {}", tv(&exact, &d));
}

#[test]
fn lmh_single_sample_is_initial_trace() {
    let (ctx, model) = setup(GEOM);
    let chain = lmh_chain(&ctx, &model, 1, 8, LmhOptions::default()).unwrap();
    assert_eq!(chain.len(), 1);
    let d = run_lmh(&ctx, &model, 1, 8, LmhOptions::default()).unwrap();
    assert_eq!(d.support, vec![(chain[0].clone(), 1.0)]);
}

#[test]
fn lmh_burn_in_and_thin() {
    let (ctx, model) = setup(GEOM);
    let opts = LmhOptions { burn_in: 10, thin: 3 };
    let chain = lmh_chain(&ctx, &model, 50, 4, opts).unwrap();
    let full = lmh_chain(&ctx, &model, 10 + 3 * 49 + 1, 4, LmhOptions::default()).unwrap();
    let picked: Vec<Value> = full.iter().skip(10).step_by(3).cloned().collect();
    assert_eq!(chain, picked);
    assert!(lmh_chain(&ctx, &model, 5, 4, LmhOptions { burn_in: 0, thin: 0 }).is_err());
}

#[test]
fn equal_seeds_equal_posteriors() {
    let (ctx, model) = setup(TWO_COINS);
    assert_eq!(
        run_importance(&ctx, &model, 3_000, 21, true).unwrap(),
        run_importance(&ctx, &model, 3_000, 21, true).unwrap()
    );
    assert_eq!(
        run_lmh(&ctx, &model, 3_000, 21, LmhOptions::default()).unwrap(),
        run_lmh(&ctx, &model, 3_000, 21, LmhOptions::default()).unwrap()
    );
    assert_ne!(
        run_lmh(&ctx, &model, 3_000, 21, LmhOptions::default()).unwrap(),
        run_lmh(&ctx, &model, 3_000, 22, LmhOptions::default()).unwrap()
    );
}

#[test]
fn surface_builtins_use_the_driver() {
    let src = "model <- function () { sample(bernoulli(0.3)) };\n\
               d <- enumerate(model, 100);\n\
               e <- importance(model, 1000);\n\
               (dist-score(d, true), dist-score(e, true) < 0.0)";
    let c = compile(src, "t.cup").unwrap();
    let ctx = VmContext::new(c.module).with_driver(Driver::shared(InferConfig::default()));
    let v = crate::vm::run(&ctx, &mut crate::vm::PriorHandler, &mut Rng::new(0)).unwrap();
    let Value::Tuple(xs) = v else { panic!("{v}") };
    assert!((xs[0].as_f64().unwrap() - 0.3f64.ln()).abs() < 1e-12);
    assert_eq!(xs[1], Value::Bool(true));
}

#[test]
fn engine_override_replaces_program_choice() {
    let src = "model <- function () { sample(bernoulli(0.3)) };\nimportance(model, 10)";
    let c = compile(src, "t.cup").unwrap();
    let cfg = InferConfig {
        engine: Some(EngineKind::Enumerate),
        ..InferConfig::default()
    };
    let ctx = VmContext::new(c.module).with_driver(Driver::shared(cfg));
    let v = crate::vm::run(&ctx, &mut crate::vm::PriorHandler, &mut Rng::new(0)).unwrap();
    let Value::Dist(d) = v else { panic!("{v}") };
    let e = d.as_empirical().unwrap();
    assert!((e.prob(&Value::Bool(true)) - 0.3).abs() < 1e-15);
}

#[test]
fn nonpositive_counts_are_rejected() {
    let src = "model <- function () { sample(bernoulli(0.3)) };\nimportance(model, 0)";
    let c = compile(src, "t.cup").unwrap();
    let ctx = VmContext::new(c.module).with_driver(Driver::shared(InferConfig::default()));
    let e = crate::vm::run(&ctx, &mut crate::vm::PriorHandler, &mut Rng::new(0)).unwrap_err();
    assert!(matches!(e.kind, VmErrorKind::Engine(_)));
    assert!(e.span.is_some());
}

/// Counts handler invocations so they can be compared with the machine's
/// own count of `sample-impl` calls.
struct Counting {
    samples: u64,
    factors: u64,
}

impl Handler for Counting {
    fn sample(&mut self, d: &DistValue, rng: &mut Rng) -> Result<Directive, VmErrorKind> {
        self.samples += 1;
        d.sample(rng).map(Directive::Resume)
    }
    fn factor(&mut self, _: f64) -> Result<Directive, VmErrorKind> {
        self.factors += 1;
        Ok(Directive::Resume(Value::Unit))
    }
}

#[test]
fn handler_called_once_per_sample_site() {
    let (ctx, model) = setup(BIASED);
    let run = ctx.global("infer-run").cloned().unwrap();
    let mut m = Machine::new(ctx);
    let mut h = Counting { samples: 0, factors: 0 };
    let out = m.call(&run, model, &mut h, &mut Rng::new(1)).unwrap();
    assert!(matches!(out, Outcome::Done(Value::Real(_))));
    assert_eq!((h.samples, h.factors), (1, 10));
    assert_eq!((m.stats.samples, m.stats.factors), (1, 10));
}

proptest! {
    #[test]
    fn normalize_sums_to_one_and_ignores_order(
        ws in prop::collection::vec((0i64..6, -50.0f64..5.0), 1..40),
        seed in any::<u64>(),
    ) {
        let samples: Vec<WeightedSample> = ws.iter().map(|&(v, w)| WeightedSample::new(Value::Int(v), w)).collect();
        let d = normalize(&samples).unwrap();
        let total: f64 = d.support.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut shuffled = samples.clone();
        let mut rng = Rng::new(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i + 1));
        }
        let e = normalize(&shuffled).unwrap();
        let mut oracle: HashMap<i64, f64> = HashMap::new();
        for &(v, w) in &ws {
            *oracle.entry(v).or_default() += w.exp();
        }
        let z: f64 = oracle.values().sum();
        for (v, p) in &oracle {
            prop_assert!((d.prob(&Value::Int(*v)) - p / z).abs() < 1e-12);
            prop_assert!((e.prob(&Value::Int(*v)) - p / z).abs() < 1e-12);
        }
    }
}

/// Resumes the first `free` samples from the prior, then suspends.
struct SuspendAfter {
    free: usize,
}

impl Handler for SuspendAfter {
    fn sample(&mut self, d: &DistValue, rng: &mut Rng) -> Result<Directive, VmErrorKind> {
        if self.free == 0 {
            return Ok(Directive::Suspend);
        }
        self.free -= 1;
        d.sample(rng).map(Directive::Resume)
    }
    fn factor(&mut self, _: f64) -> Result<Directive, VmErrorKind> {
        Ok(Directive::Resume(Value::Unit))
    }
}

fn nesting(v: &Value) -> usize {
    match v {
        Value::Continuation(c) => 1 + c.saved.slots.iter().map(nesting).max().unwrap_or(0),
        Value::Tuple(xs) | Value::Vector(xs) => xs.iter().map(nesting).max().unwrap_or(0),
        Value::Closure(c) => nesting(&c.env),
        _ => 0,
    }
}

#[test]
fn repeated_runs_do_not_chain_segments() {
    let (ctx, model) = setup("model <- function () {\n    xs <- repeat(function (i) { sample(bernoulli(0.5)) }, 3);\n    length(xs)\n}");
    let run = ctx.global("infer-run").cloned().unwrap();
    let mut m = Machine::new(ctx);
    let depth = |m: &mut Machine| match m.call(&run, model.clone(), &mut SuspendAfter { free: 2 }, &mut Rng::new(1)) {
        Ok(Outcome::Suspended { k, .. }) => nesting(&k),
        other => panic!("{other:?}"),
    };
    let first = depth(&mut m);
    for _ in 0..20 {
        assert_eq!(depth(&mut m), first);
    }
}

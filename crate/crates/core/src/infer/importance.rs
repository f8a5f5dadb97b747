use crate::vm::{Directive, DistValue, EmpiricalDistribution, Handler, Machine, Outcome, Rng, Value, VmContext, VmError, VmErrorKind};

use super::normalize::{normalize, WeightedSample};
use super::run_fn;

/// Prior proposal: draws from each distribution, accumulates factors.
#[derive(Debug, Default)]
pub struct ImportanceHandler {
    pub log_weight: f64,
}

impl Handler for ImportanceHandler {
    fn sample(&mut self, d: &DistValue, rng: &mut Rng) -> Result<Directive, VmErrorKind> {
        d.sample(rng).map(Directive::Resume)
    }

    fn factor(&mut self, log_p: f64) -> Result<Directive, VmErrorKind> {
        self.log_weight += log_p;
        Ok(Directive::Resume(Value::Unit))
    }
}

fn particle(m: &mut Machine, run: &Value, model: &Value, seed: u64, i: u64) -> Result<WeightedSample, VmError> {
    let mut rng = Rng::split(seed, i);
    let mut h = ImportanceHandler::default();
    let tag = |e: VmError| e.with_context(format!("importance particle {i} (seed {seed}, stream {i})"));
    match m.call(run, model.clone(), &mut h, &mut rng).map_err(tag)? {
        Outcome::Done(v) => Ok(WeightedSample::new(v, h.log_weight)),
        Outcome::Suspended { .. } => Err(tag(VmErrorKind::Engine("importance run suspended".into()).into())),
    }
}

/// Weighted particles in index order. Particle `i` draws from stream `i`
/// of `seed`, so the result does not depend on scheduling.
pub fn importance_particles(
    ctx: &VmContext,
    model: &Value,
    n: usize,
    seed: u64,
    parallel: bool,
) -> Result<Vec<WeightedSample>, VmError> {
    let run = run_fn(ctx)?;
    let results: Vec<Result<WeightedSample, VmError>> = if parallel {
        par_particles(ctx, &run, model, n, seed)
    } else {
        let mut m = Machine::new(ctx.clone());
        (0..n as u64).map(|i| particle(&mut m, &run, model, seed, i)).collect()
    };
    results.into_iter().collect()
}

#[cfg(feature = "parallel")]
fn par_particles(ctx: &VmContext, run: &Value, model: &Value, n: usize, seed: u64) -> Vec<Result<WeightedSample, VmError>> {
    use rayon::prelude::*;
    (0..n as u64)
        .into_par_iter()
        .map_init(|| Machine::new(ctx.clone()), |m, i| particle(m, run, model, seed, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn par_particles(ctx: &VmContext, run: &Value, model: &Value, n: usize, seed: u64) -> Vec<Result<WeightedSample, VmError>> {
    let mut m = Machine::new(ctx.clone());
    (0..n as u64).map(|i| particle(&mut m, run, model, seed, i)).collect()
}

/// Importance sampling with the prior as proposal.
pub fn run_importance(
    ctx: &VmContext,
    model: &Value,
    n: usize,
    seed: u64,
    parallel: bool,
) -> Result<EmpiricalDistribution, VmError> {
    if n == 0 {
        return Err(VmErrorKind::Engine("importance needs at least one sample".into()).into());
    }
    let samples = importance_particles(ctx, model, n, seed, parallel)?;
    Ok(normalize(&samples)?)
}

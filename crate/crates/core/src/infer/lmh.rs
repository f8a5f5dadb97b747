use crate::vm::{Directive, DistKind, DistValue, EmpiricalDistribution, Handler, Machine, Outcome, Rng, Value, VmContext, VmError, VmErrorKind};

use super::normalize::{normalize, WeightedSample};
use super::run_fn;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// Occurrence index of the sample call within its run.
    pub address: usize,
    pub dist: DistValue,
    pub value: Value,
    pub log_score: f64,
}

/// Memorized random choices of one run plus its factor weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceDatabase {
    pub entries: Vec<TraceEntry>,
    pub factor_log_weight: f64,
    pub result: Value,
}

impl TraceDatabase {
    /// Joint log density of the trace.
    pub fn log_density(&self) -> f64 {
        self.entries.iter().map(|e| e.log_score).sum::<f64>() + self.factor_log_weight
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LmhOptions {
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for LmhOptions {
    fn default() -> Self {
        LmhOptions { burn_in: 0, thin: 1 }
    }
}

/// Replays `old`, except at `fresh_at` and wherever the distribution kind
/// differs, where it draws from the prior.
struct TraceHandler<'a> {
    old: &'a [TraceEntry],
    fresh_at: Option<usize>,
    entries: Vec<TraceEntry>,
    factor: f64,
    log_fresh: f64,
    reused: Vec<bool>,
}

impl<'a> TraceHandler<'a> {
    fn new(old: &'a [TraceEntry], fresh_at: Option<usize>) -> Self {
        TraceHandler {
            old,
            fresh_at,
            entries: Vec::new(),
            factor: 0.0,
            log_fresh: 0.0,
            reused: vec![false; old.len()],
        }
    }

    /// Scores of old entries that the new run did not reuse.
    fn log_stale(&self) -> f64 {
        self.old
            .iter()
            .zip(&self.reused)
            .filter(|(_, r)| !**r)
            .map(|(e, _)| e.log_score)
            .sum()
    }
}

fn same_family(a: &DistValue, b: &DistValue) -> bool {
    a.kind == b.kind && (a.kind != DistKind::Empirical || a.p[0] == b.p[0])
}

impl Handler for TraceHandler<'_> {
    fn sample(&mut self, d: &DistValue, rng: &mut Rng) -> Result<Directive, VmErrorKind> {
        let address = self.entries.len();
        let reuse = self
            .old
            .get(address)
            .filter(|e| Some(address) != self.fresh_at && same_family(&e.dist, d));
        let (value, log_score) = match reuse {
            Some(e) => {
                self.reused[address] = true;
                (e.value.clone(), d.score(&e.value)?)
            }
            None => {
                let x = d.sample(rng)?;
                let s = d.score(&x)?;
                self.log_fresh += s;
                (x, s)
            }
        };
        self.entries.push(TraceEntry {
            address,
            dist: *d,
            value: value.clone(),
            log_score,
        });
        Ok(Directive::Resume(value))
    }

    fn factor(&mut self, log_p: f64) -> Result<Directive, VmErrorKind> {
        self.factor += log_p;
        Ok(Directive::Resume(Value::Unit))
    }
}

struct Run {
    trace: TraceDatabase,
    log_fresh: f64,
    log_stale: f64,
}

fn execute(
    m: &mut Machine,
    run: &Value,
    model: &Value,
    old: &[TraceEntry],
    fresh_at: Option<usize>,
    rng: &mut Rng,
) -> Result<Run, VmError> {
    let mut h = TraceHandler::new(old, fresh_at);
    match m.call(run, model.clone(), &mut h, rng)? {
        Outcome::Done(result) => Ok(Run {
            log_stale: h.log_stale(),
            log_fresh: h.log_fresh,
            trace: TraceDatabase {
                entries: h.entries,
                factor_log_weight: h.factor,
                result,
            },
        }),
        Outcome::Suspended { .. } => Err(VmErrorKind::Engine("mcmc run suspended".into()).into()),
    }
}

/// Single-site Metropolis-Hastings over the prior-proposal trace.
pub fn run_lmh(
    ctx: &VmContext,
    model: &Value,
    n: usize,
    seed: u64,
    opts: LmhOptions,
) -> Result<EmpiricalDistribution, VmError> {
    let chain = lmh_chain(ctx, model, n, seed, opts)?;
    let samples: Vec<WeightedSample> = chain.into_iter().map(|v| WeightedSample::new(v, 0.0)).collect();
    let mut d = normalize(&samples)?;
    d.log_z = None;
    Ok(d)
}

/// The recorded return values of the chain, in order.
pub fn lmh_chain(ctx: &VmContext, model: &Value, n: usize, seed: u64, opts: LmhOptions) -> Result<Vec<Value>, VmError> {
    if n == 0 {
        return Err(VmErrorKind::Engine("mcmc needs at least one sample".into()).into());
    }
    if opts.thin == 0 {
        return Err(VmErrorKind::Engine("thinning interval must be at least 1".into()).into());
    }
    let run = run_fn(ctx)?;
    let mut m = Machine::new(ctx.clone());
    let mut rng = Rng::new(seed);
    let mut cur = execute(&mut m, &run, model, &[], None, &mut rng)
        .map_err(|e| e.with_context("mcmc initial run".to_string()))?
        .trace;
    let mut cur_ll = cur.log_density();
    let mut out = Vec::with_capacity(n);
    let mut t = 0usize;
    loop {
        if t >= opts.burn_in && (t - opts.burn_in) % opts.thin == 0 {
            out.push(cur.result.clone());
            if out.len() == n {
                return Ok(out);
            }
        }
        t += 1;
        if cur.entries.is_empty() {
            continue;
        }
        let site = rng.below(cur.entries.len());
        let prop = execute(&mut m, &run, model, &cur.entries, Some(site), &mut rng)
            .map_err(|e| e.with_context(format!("mcmc step {t}")))?;
        let new_ll = prop.trace.log_density();
        let accept = if cur_ll == f64::NEG_INFINITY {
            true
        } else if new_ll == f64::NEG_INFINITY {
            false
        } else {
            let log_alpha = new_ll - cur_ll + (cur.entries.len() as f64).ln()
                - (prop.trace.entries.len() as f64).ln()
                + prop.log_stale
                - prop.log_fresh;
            log_alpha >= 0.0 || rng.uniform().ln() < log_alpha
        };
        if accept {
            cur = prop.trace;
            cur_ll = new_ll;
        }
    }
}

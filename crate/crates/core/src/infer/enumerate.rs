use std::collections::VecDeque;

use crate::vm::{Directive, DistValue, EmpiricalDistribution, Handler, Machine, Outcome, Request, Rng, Value, VmContext, VmError, VmErrorKind};

use super::normalize::{normalize_total, WeightedSample};
use super::{resume_fn, run_fn};

/// A pending branch: resume `continuation` with `pending`.
#[derive(Debug, Clone)]
pub struct EnumerationNode {
    pub continuation: Value,
    pub pending: Value,
    pub log_prob: f64,
    /// Sample choice points expanded on the way here.
    pub depth: usize,
}

/// Suspends at every sample; factors accumulate until the path weight hits
/// zero, at which point the path is suspended and dropped.
#[derive(Debug, Default)]
struct EnumHandler {
    log_weight: f64,
}

impl Handler for EnumHandler {
    fn sample(&mut self, _d: &DistValue, _rng: &mut Rng) -> Result<Directive, VmErrorKind> {
        Ok(Directive::Suspend)
    }

    fn factor(&mut self, log_p: f64) -> Result<Directive, VmErrorKind> {
        self.log_weight += log_p;
        if self.log_weight == f64::NEG_INFINITY {
            Ok(Directive::Suspend)
        } else {
            Ok(Directive::Resume(Value::Unit))
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationResult {
    pub posterior: EmpiricalDistribution,
    /// Paths cut off by `max_depth`.
    pub truncated: usize,
    /// Whether `max_executions` stopped the traversal with work left.
    pub exhausted_budget: bool,
}

/// Breadth-first traversal of every execution path of `model`.
pub fn run_enumeration(
    ctx: &VmContext,
    model: &Value,
    max_executions: usize,
    max_depth: Option<usize>,
) -> Result<EmpiricalDistribution, VmError> {
    enumerate_paths(ctx, model, max_executions, max_depth).map(|r| r.posterior)
}

pub fn enumerate_paths(
    ctx: &VmContext,
    model: &Value,
    max_executions: usize,
    max_depth: Option<usize>,
) -> Result<EnumerationResult, VmError> {
    if max_executions == 0 {
        return Err(VmErrorKind::Engine("enumeration needs at least one execution".into()).into());
    }
    let run = run_fn(ctx)?;
    let resume = resume_fn(ctx)?;
    let mut m = Machine::new(ctx.clone());
    // Enumeration never draws; the stream only satisfies the call signature.
    let mut rng = Rng::new(0);
    let mut done: Vec<WeightedSample> = Vec::new();
    let mut queue: VecDeque<EnumerationNode> = VecDeque::new();
    let mut truncated = 0;

    let mut h = EnumHandler::default();
    let first = m.call(&run, model.clone(), &mut h, &mut rng)?;
    let mut step = (first, h.log_weight, 0usize);
    loop {
        let (outcome, log_prob, depth) = step;
        match outcome {
            Outcome::Done(v) => {
                done.push(WeightedSample::new(v, log_prob));
                if done.len() >= max_executions {
                    break;
                }
            }
            Outcome::Suspended {
                request: Request::Sample(d),
                k,
            } => {
                let depth = depth + 1;
                if max_depth.is_some_and(|md| depth > md) {
                    truncated += 1;
                } else {
                    for (x, lm) in d.support()? {
                        queue.push_back(EnumerationNode {
                            continuation: k.clone(),
                            pending: x,
                            log_prob: log_prob + lm,
                            depth,
                        });
                    }
                }
            }
            Outcome::Suspended {
                request: Request::Factor(_),
                ..
            } => {}
        }
        let Some(node) = queue.pop_front() else { break };
        let mut h = EnumHandler::default();
        let arg = Value::tuple(vec![node.continuation, node.pending]);
        let out = m.call(&resume, arg, &mut h, &mut rng)?;
        step = (out, node.log_prob + h.log_weight, node.depth);
    }
    let exhausted_budget = !queue.is_empty();
    let (mut posterior, lse) = normalize_total(&done)?;
    posterior.log_z = Some(lse);
    Ok(EnumerationResult {
        posterior,
        truncated,
        exhausted_budget,
    })
}

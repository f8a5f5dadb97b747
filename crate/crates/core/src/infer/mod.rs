//! Inference engines. Each one installs its own [`Handler`](crate::vm::Handler)
//! and runs the model through the prelude's `infer-run`, which delimits the
//! model with a reset so `sample` and `factor` capture only the model body.

mod enumerate;
mod importance;
mod lmh;
mod normalize;

use std::sync::Arc;

pub use enumerate::{enumerate_paths, run_enumeration, EnumerationNode, EnumerationResult};
pub use importance::{importance_particles, run_importance, ImportanceHandler};
pub use lmh::{lmh_chain, run_lmh, LmhOptions, TraceDatabase, TraceEntry};
pub use normalize::{logsumexp, normalize, WeightedSample};

use crate::lowering::BytecodeModule;
use crate::vm::{
    EmpiricalDistribution, EngineKind, InferenceDriver, Machine, PriorHandler, Rng, Value, VmContext, VmError,
    VmErrorKind, VmOptions,
};

/// A context with the driver installed and every top-level binding
/// evaluated, ready for engines to call into.
pub fn prepare(module: Arc<BytecodeModule>, options: VmOptions, config: InferConfig, seed: u64) -> Result<VmContext, VmError> {
    let ctx = VmContext::new(module).with_options(options).with_driver(Driver::shared(config));
    let mut m = Machine::new(ctx);
    m.run_init(&mut PriorHandler, &mut Rng::new(seed))?;
    Ok(m.context().clone())
}

fn prelude_fn(ctx: &VmContext, name: &str) -> Result<Value, VmError> {
    ctx.global(name)
        .cloned()
        .ok_or_else(|| VmErrorKind::Engine(format!("prelude function `{name}` is not initialized")).into())
}

pub(crate) fn run_fn(ctx: &VmContext) -> Result<Value, VmError> {
    prelude_fn(ctx, "infer-run")
}

pub(crate) fn resume_fn(ctx: &VmContext) -> Result<Value, VmError> {
    prelude_fn(ctx, "infer-resume")
}

/// Engine parameters that override what the program asked for.
#[derive(Debug, Clone, PartialEq)]
pub struct InferConfig {
    /// Replace the engine of every `importance`/`mcmc`/`enumerate` call.
    pub engine: Option<EngineKind>,
    /// Replace the sample count of importance and mcmc calls.
    pub samples: Option<usize>,
    /// Replace the execution budget of enumerate calls.
    pub max_executions: Option<usize>,
    pub max_depth: Option<usize>,
    pub lmh: LmhOptions,
    /// Fan importance particles out over threads when built with `parallel`.
    pub parallel: bool,
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig {
            engine: None,
            samples: None,
            max_executions: None,
            max_depth: None,
            lmh: LmhOptions::default(),
            parallel: cfg!(feature = "parallel"),
        }
    }
}

/// The [`InferenceDriver`] behind the surface builtins.
#[derive(Debug, Clone, Default)]
pub struct Driver {
    pub config: InferConfig,
}

impl Driver {
    pub fn new(config: InferConfig) -> Self {
        Driver { config }
    }

    pub fn shared(config: InferConfig) -> Arc<dyn InferenceDriver> {
        Arc::new(Driver::new(config))
    }
}

fn count(n: i64, what: &str) -> Result<usize, VmError> {
    usize::try_from(n)
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| VmErrorKind::Engine(format!("{what} must be at least 1, got {n}")).into())
}

impl InferenceDriver for Driver {
    fn infer(
        &self,
        engine: EngineKind,
        ctx: &VmContext,
        model: &Value,
        n: i64,
        seed: u64,
    ) -> Result<EmpiricalDistribution, VmError> {
        let c = &self.config;
        let engine = c.engine.unwrap_or(engine);
        match engine {
            EngineKind::Importance => {
                let n = c.samples.map_or_else(|| count(n, "sample count"), Ok)?;
                run_importance(ctx, model, n, seed, c.parallel)
            }
            EngineKind::Mcmc => {
                let n = c.samples.map_or_else(|| count(n, "sample count"), Ok)?;
                run_lmh(ctx, model, n, seed, c.lmh)
            }
            EngineKind::Enumerate => {
                let n = c.max_executions.map_or_else(|| count(n, "execution budget"), Ok)?;
                run_enumeration(ctx, model, n, c.max_depth)
            }
        }
    }
}

#[cfg(test)]
mod tests;

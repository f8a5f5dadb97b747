//! Bytecode interpreter over a managed stack and a reset stack.

pub mod dist;
pub mod error;
pub mod machine;
pub mod ops;
pub mod rng;
pub mod value;

pub use dist::{DistKind, DistValue, EmpiricalDistribution};
pub use error::{VmError, VmErrorKind};
pub use machine::{
    run, Directive, EngineKind, Handler, InferenceDriver, Machine, Outcome, PriorHandler, Request, Stats, VmContext,
    VmOptions, DEFAULT_STACK_SLOTS,
};
pub use rng::Rng;
pub use value::{ClosureValue, ContinuationValue, CtorValue, SavedStack, Value};

#[cfg(test)]
mod tests;

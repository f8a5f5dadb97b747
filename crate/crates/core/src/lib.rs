//! Compiler, virtual machine and inference engines for a small typed
//! functional probabilistic language with delimited continuations.

pub mod builtins;
pub mod frontend;
pub mod infer;
pub mod lowering;
pub mod pipeline;
pub mod prelude;
pub mod types;
pub mod vm;

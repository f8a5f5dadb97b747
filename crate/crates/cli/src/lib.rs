//! Library half of the `cup` command: configuration, posterior
//! serialization, the benchmark corpus and the commands themselves.

pub mod bench;
pub mod commands;
pub mod config;
pub mod corpus;
pub mod serialize;

pub use bench::{cmd_bench, run_bench, BenchOptions, BenchReport, BenchRow, BenchStatus};
pub use commands::{
    cmd_check, cmd_run, execute, execute_compiled, load_program, CliError, Execution, Loaded, EXIT_COMPILE, EXIT_OK,
    EXIT_RUNTIME,
};
pub use config::{Format, InferenceChoice, RunConfig};
pub use serialize::{parse_json, parse_tsv, serialize_posterior, ParseError, Posterior};

use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use cup_core::lowering::LowerOptions;
use cup_core::pipeline::{compile_with, CompileError, Compiled};
use cup_core::vm::{DistKind, Machine, PriorHandler, Rng, Stats, Value, VmContext, VmError};
use cup_core::infer::Driver;

use crate::config::RunConfig;
use crate::serialize::serialize_posterior;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPILE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Runtime(#[from] VmError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => EXIT_RUNTIME,
            _ => EXIT_COMPILE,
        }
    }

    /// The diagnostic as printed, one or two lines.
    pub fn report(&self) -> String {
        match self {
            CliError::Runtime(e) => format!("error: {e}\n  {}\n", e.detail()),
            other => format!("error: {other}\n"),
        }
    }
}

pub struct Loaded {
    pub compiled: Compiled,
    pub file: String,
}

pub fn load_program(path: &Path) -> Result<Loaded, CliError> {
    let file = path.display().to_string();
    let source = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::FileNotFound(file.clone()),
        _ => CliError::Io {
            path: file.clone(),
            message: e.to_string(),
        },
    })?;
    let compiled = compile_with(&source, &file, &LowerOptions::default())?;
    Ok(Loaded { compiled, file })
}

/// Result of executing a program.
#[derive(Debug, Clone)]
pub struct Execution {
    pub value: Value,
    pub stats: Stats,
    /// What `run` prints on success.
    pub output: String,
}

pub fn execute(cfg: &RunConfig) -> Result<Execution, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let loaded = load_program(&cfg.source)?;
    execute_compiled(&loaded.compiled, cfg)
}

pub fn execute_compiled(compiled: &Compiled, cfg: &RunConfig) -> Result<Execution, CliError> {
    let mut output = String::new();
    if cfg.dump_types {
        output.push_str(&compiled.typed.dump_types());
        output.push('\n');
    }
    if cfg.dump_bytecode {
        output.push_str(&compiled.module.dump());
        output.push('\n');
    }
    let ctx = VmContext::new(Arc::clone(&compiled.module))
        .with_options(cfg.vm_options())
        .with_driver(Arc::new(Driver::new(cfg.infer_config())));
    let mut m = Machine::new(ctx);
    let value = m.run_main(&mut PriorHandler, &mut Rng::new(cfg.seed))?;
    output.push_str(&render(&value, cfg));
    Ok(Execution {
        value,
        stats: m.stats,
        output,
    })
}

fn render(v: &Value, cfg: &RunConfig) -> String {
    if let Value::Dist(d) = v {
        if d.kind == DistKind::Empirical {
            if let Some(e) = d.as_empirical() {
                return serialize_posterior(&e, cfg.format);
            }
        }
    }
    format!("{v}\n")
}

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cfg) {
        Ok(x) => {
            let _ = out.write_all(x.output.as_bytes());
            let _ = out.flush();
            EXIT_OK
        }
        Err(e) => {
            let _ = err.write_all(e.report().as_bytes());
            e.exit_code()
        }
    }
}

/// Type-check only. Prints the binding types with `dump_types`.
pub fn cmd_check(path: &Path, dump_types: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match load_program(path) {
        Ok(l) => {
            if dump_types {
                let _ = writeln!(out, "{}", l.compiled.typed.dump_types());
            }
            let _ = writeln!(out, "ok: {}", l.file);
            EXIT_OK
        }
        Err(e) => {
            let _ = err.write_all(e.report().as_bytes());
            e.exit_code()
        }
    }
}

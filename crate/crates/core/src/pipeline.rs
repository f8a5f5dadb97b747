//! Source text to checked, lowered program.

use std::sync::Arc;

use crate::frontend::{self, parser, FrontendError, Program, SourceSpan};
use crate::lowering::{self, BytecodeModule, LowerOptions, LoweringError};
use crate::prelude::{PRELUDE, PRELUDE_FILE};
use crate::types::{self, TypeError, TypedProgram};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Lowering(#[from] LoweringError),
}

impl CompileError {
    pub fn span(&self) -> Option<&SourceSpan> {
        match self {
            CompileError::Frontend(e) => Some(e.span()),
            CompileError::Type(e) => Some(e.span()),
            CompileError::Lowering(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub typed: Arc<TypedProgram>,
    pub module: Arc<BytecodeModule>,
}

/// Parse `source`, prepend the prelude and desugar.
pub fn parse_with_prelude(source: &str, file: &str) -> Result<Program, CompileError> {
    let prelude_src = format!("{PRELUDE}()");
    let prelude = parser::parse_file_from(&prelude_src, PRELUDE_FILE, 0)?;
    let mut user = parser::parse_file_from(source, file, prelude.next_id)?;
    for b in &user.bindings {
        if let Some(p) = prelude.bindings.iter().find(|p| p.name == b.name) {
            return Err(FrontendError::Parse {
                message: format!("`{}` is already defined by the prelude", p.name),
                expected: vec![],
                span: b.span.clone(),
            }
            .into());
        }
    }
    let mut bindings: Vec<_> = prelude
        .bindings
        .into_iter()
        .map(|mut b| {
            b.prelude = true;
            b
        })
        .collect();
    bindings.append(&mut user.bindings);
    let merged = Program {
        type_decls: user.type_decls,
        bindings,
        result: user.result,
        next_id: user.next_id,
    };
    Ok(frontend::desugar(merged))
}

/// Parse, desugar, infer and check concreteness.
pub fn check(source: &str, file: &str) -> Result<TypedProgram, CompileError> {
    let program = parse_with_prelude(source, file)?;
    let typed = types::infer_program(program)?;
    types::check_monomorphic(&typed)?;
    Ok(typed)
}

pub fn compile(source: &str, file: &str) -> Result<Compiled, CompileError> {
    compile_with(source, file, &LowerOptions::default())
}

pub fn compile_with(source: &str, file: &str, opts: &LowerOptions) -> Result<Compiled, CompileError> {
    let typed = check(source, file)?;
    let module = lowering::lower_program(&typed, opts)?;
    Ok(Compiled {
        typed: Arc::new(typed),
        module: Arc::new(module),
    })
}

use std::path::PathBuf;

use cup_core::infer::{InferConfig, LmhOptions};
use cup_core::vm::{EngineKind, VmOptions, DEFAULT_STACK_SLOTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InferenceChoice {
    Importance,
    Mcmc,
    Enumerate,
    /// Keep whatever the program calls.
    None,
}

impl InferenceChoice {
    pub fn engine(self) -> Option<EngineKind> {
        match self {
            InferenceChoice::Importance => Some(EngineKind::Importance),
            InferenceChoice::Mcmc => Some(EngineKind::Mcmc),
            InferenceChoice::Enumerate => Some(EngineKind::Enumerate),
            InferenceChoice::None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Tsv,
    Json,
}

/// Everything one `run` needs. Counts left as `None` keep the values the
/// program passes to its inference call.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: PathBuf,
    pub inference: InferenceChoice,
    pub samples: Option<usize>,
    pub max_executions: Option<usize>,
    pub max_depth: Option<usize>,
    pub seed: u64,
    pub burn_in: usize,
    pub thin: usize,
    pub format: Format,
    pub dump_types: bool,
    pub dump_bytecode: bool,
    pub stack_slots: usize,
    /// Fan importance particles out over threads.
    pub parallel: bool,
}

impl RunConfig {
    pub fn new(source: impl Into<PathBuf>) -> Self {
        RunConfig {
            source: source.into(),
            inference: InferenceChoice::None,
            samples: None,
            max_executions: None,
            max_depth: None,
            seed: 0,
            burn_in: 0,
            thin: 1,
            format: Format::Tsv,
            dump_types: false,
            dump_bytecode: false,
            stack_slots: DEFAULT_STACK_SLOTS,
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.samples == Some(0) {
            return Err("--samples must be at least 1".into());
        }
        if self.max_executions == Some(0) {
            return Err("--max-executions must be at least 1".into());
        }
        if self.thin == 0 {
            return Err("--thin must be at least 1".into());
        }
        if self.stack_slots == 0 {
            return Err("--stack-slots must be at least 1".into());
        }
        Ok(())
    }

    pub fn infer_config(&self) -> InferConfig {
        InferConfig {
            engine: self.inference.engine(),
            samples: self.samples,
            max_executions: self.max_executions,
            max_depth: self.max_depth,
            lmh: LmhOptions {
                burn_in: self.burn_in,
                thin: self.thin,
            },
            parallel: self.parallel && cfg!(feature = "parallel"),
        }
    }

    pub fn vm_options(&self) -> VmOptions {
        VmOptions {
            stack_slots: self.stack_slots,
            ..VmOptions::default()
        }
    }
}

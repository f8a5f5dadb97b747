use std::fmt;

use crate::frontend::SourceSpan;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VmErrorKind {
    #[error("managed stack exceeded {limit} slots")]
    StackOverflow { limit: usize },
    #[error("step limit of {limit} exceeded")]
    StepLimitExceeded { limit: u64 },
    #[error("shift executed with no enclosing reset")]
    UncaughtShift,
    #[error("{0}")]
    TypeMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: i64, len: usize },
    #[error("{0}")]
    MatchFailure(String),
    #[error("{0}")]
    InvalidDist(String),
    #[error("malformed distribution tag {0}")]
    UnsupportedDist(u8),
    #[error("boundary {boundary} is above stack depth {depth}")]
    BoundaryError { boundary: usize, depth: usize },
    #[error("{0}")]
    StackProtocol(String),
    #[error("{0}")]
    Undefined(String),
    #[error("enumeration reached a continuous distribution")]
    ContinuousDist,
    #[error("enumeration reached a distribution with infinite support")]
    InfiniteSupport,
    #[error("every sample has zero weight")]
    AllZeroWeight,
    #[error("{0}")]
    Engine(String),
}

impl VmErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            VmErrorKind::StackOverflow { .. } => "StackOverflow",
            VmErrorKind::StepLimitExceeded { .. } => "StepLimitExceeded",
            VmErrorKind::UncaughtShift => "UncaughtShift",
            VmErrorKind::TypeMismatch(_) => "TypeMismatch",
            VmErrorKind::DivisionByZero => "DivisionByZero",
            VmErrorKind::IndexOutOfBounds { .. } => "IndexOutOfBounds",
            VmErrorKind::MatchFailure(_) => "MatchFailure",
            VmErrorKind::InvalidDist(_) => "InvalidDist",
            VmErrorKind::UnsupportedDist(_) => "UnsupportedDist",
            VmErrorKind::BoundaryError { .. } => "BoundaryError",
            VmErrorKind::StackProtocol(_) => "StackProtocolViolation",
            VmErrorKind::Undefined(_) => "Undefined",
            VmErrorKind::ContinuousDist => "ContinuousDistError",
            VmErrorKind::InfiniteSupport => "InfiniteSupportError",
            VmErrorKind::AllZeroWeight => "AllZeroWeightError",
            VmErrorKind::Engine(_) => "InferenceError",
        }
    }
}

/// A runtime failure: kind, the span of the failing instruction when known,
/// and optional context such as the particle that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct VmError {
    pub kind: VmErrorKind,
    pub span: Option<SourceSpan>,
    pub context: Option<String>,
}

impl VmError {
    pub fn new(kind: VmErrorKind) -> Self {
        VmError {
            kind,
            span: None,
            context: None,
        }
    }

    pub fn at(mut self, span: &SourceSpan) -> Self {
        if self.span.is_none() {
            self.span = Some(span.clone());
        }
        self
    }

    pub fn with_context(mut self, ctx: impl Into<String>) -> Self {
        if self.context.is_none() {
            self.context = Some(ctx.into());
        }
        self
    }

    /// One-line description beyond the kind and location.
    pub fn detail(&self) -> String {
        match &self.context {
            Some(c) => format!("{} ({c})", self.kind),
            None => self.kind.to_string(),
        }
    }
}

/// `<kind> at <file>:<line>:<col>`.
impl fmt::Display for VmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(s) => write!(f, "{} at {s}", self.kind.name()),
            None => write!(f, "{}", self.kind.name()),
        }
    }
}

impl std::error::Error for VmError {}

impl From<VmErrorKind> for VmError {
    fn from(kind: VmErrorKind) -> Self {
        VmError::new(kind)
    }
}

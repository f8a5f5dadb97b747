//! Bytecode model: blocks of stack instructions with explicit control
//! transfers.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::builtins::Builtin;
use crate::frontend::ast::{BinOp, UnOp};
use crate::frontend::SourceSpan;
use crate::vm::value::Value;

/// Register slot in the VM's global register file.
pub type Slot = u32;

/// Scratch registers used only inside a single emitted sequence; never
/// caller-saved.
pub const S0: Slot = 0;
pub const S1: Slot = 1;
/// First slot available for named and hidden locals.
pub const FIRST_LOCAL: Slot = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockLabel(pub u32);

impl BlockLabel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

/// Where an indirect jump finds its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpTarget {
    Stack,
    Slot(Slot),
}

/// What an indirect jump is for. Return-like kinds check the return
/// address stamp against the current depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    Call,
    Return,
    ResetExit,
    ShiftExit,
}

impl JumpKind {
    fn name(self) -> &'static str {
        match self {
            JumpKind::Call => "call",
            JumpKind::Return => "return",
            JumpKind::ResetExit => "reset-exit",
            JumpKind::ShiftExit => "shift-exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    /// Push constant-pool entry.
    PushConst(u32),
    PushLocal(Slot),
    StoreLocal(Slot),
    /// Push a register's value and leave `()` behind, so the pushed copy is
    /// the only reference (vector accumulators grow in place).
    MoveLocal(Slot),
    PushGlobal(u32),
    StoreGlobal(u32),
    MakeClosure(BlockLabel, Vec<Slot>),
    /// Push the environment of the callable in a register: the captured
    /// tuple of a closure, or the saved segment of a continuation.
    PushEnv(Slot),
    MakeTuple(u32),
    Project(u32),
    MakeVector(u32),
    VectorGet,
    /// Pops `n` fields; the payload is `()`, the single field, or a tuple.
    MakeConstructor { tag: u32, name: u32, n: u32 },
    /// Pop a constructor, push whether its tag matches.
    TagIs(u32),
    /// Pop a constructor, push its payload.
    Payload,
    Binary(BinOp),
    Unary(UnOp),
    JumpIndirect(JumpTarget, JumpKind),
    Jump(BlockLabel),
    /// Pop a bool: true goes to the first label.
    Branch(BlockLabel, BlockLabel),
    /// Push a block label as a return address.
    StackPush(BlockLabel),
    StackPop,
    /// Pop a boundary depth, copy the region above it into a segment, drop
    /// that region and push the segment.
    StackSaveToBoundary,
    /// Pop a segment and push its slots back.
    StackRestore,
    /// Record the current depth on the reset stack.
    ResetStackPush,
    ResetStackPop,
    /// Push the innermost reset mark as an int.
    ResetStackPeek,
    /// Pop a segment, push a continuation resuming at the label.
    MakeContinuation(BlockLabel),
    CallBuiltin(Builtin, u32),
    /// Runtime failure with a message from the constant pool.
    Trap(u32),
    Halt,
}

/// Statically declared stack effect. `variable` marks instructions whose
/// real effect also depends on a runtime segment length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackEffect {
    pub pops: u32,
    pub pushes: u32,
    pub variable: bool,
}

const fn fx(pops: u32, pushes: u32) -> StackEffect {
    StackEffect {
        pops,
        pushes,
        variable: false,
    }
}

impl Instruction {
    pub fn stack_effect(&self) -> StackEffect {
        use Instruction::*;
        match self {
            PushConst(_) | PushLocal(_) | MoveLocal(_) | PushGlobal(_) | PushEnv(_) => fx(0, 1),
            StoreLocal(_) | StoreGlobal(_) | StackPop => fx(1, 0),
            MakeClosure(..) => fx(0, 1),
            MakeTuple(n) | MakeVector(n) => fx(*n, 1),
            MakeConstructor { n, .. } => fx(*n, 1),
            Project(_) | TagIs(_) | Payload | Unary(_) => fx(1, 1),
            VectorGet | Binary(_) => fx(2, 1),
            JumpIndirect(JumpTarget::Stack, _) => fx(1, 0),
            JumpIndirect(JumpTarget::Slot(_), _) | Jump(_) | Halt | Trap(_) => fx(0, 0),
            Branch(..) => fx(1, 0),
            StackPush(_) => fx(0, 1),
            StackSaveToBoundary => StackEffect {
                pops: 1,
                pushes: 1,
                variable: true,
            },
            StackRestore => StackEffect {
                pops: 1,
                pushes: 0,
                variable: true,
            },
            ResetStackPush | ResetStackPop => fx(0, 0),
            ResetStackPeek => fx(0, 1),
            MakeContinuation(_) => fx(1, 1),
            CallBuiltin(_, n) => fx(*n, 1),
        }
    }

    pub fn is_terminator(&self) -> bool {
        matches!(
            self,
            Instruction::JumpIndirect(..)
                | Instruction::Jump(_)
                | Instruction::Branch(..)
                | Instruction::Halt
                | Instruction::Trap(_)
        )
    }

    fn labels(&self) -> Vec<BlockLabel> {
        match self {
            Instruction::MakeClosure(l, _)
            | Instruction::Jump(l)
            | Instruction::StackPush(l)
            | Instruction::MakeContinuation(l) => vec![*l],
            Instruction::Branch(a, b) => vec![*a, *b],
            _ => vec![],
        }
    }

    pub fn opcode(&self) -> &'static str {
        use Instruction::*;
        match self {
            PushConst(_) => "PushConst",
            PushLocal(_) => "PushLocal",
            StoreLocal(_) => "StoreLocal",
            MoveLocal(_) => "MoveLocal",
            PushGlobal(_) => "PushGlobal",
            StoreGlobal(_) => "StoreGlobal",
            MakeClosure(..) => "MakeClosure",
            PushEnv(_) => "PushEnv",
            MakeTuple(_) => "MakeTuple",
            Project(_) => "Project",
            MakeVector(_) => "MakeVector",
            VectorGet => "VectorGet",
            MakeConstructor { .. } => "MakeConstructor",
            TagIs(_) => "TagIs",
            Payload => "Payload",
            Binary(_) => "Binary",
            Unary(_) => "Unary",
            JumpIndirect(..) => "JumpIndirect",
            Jump(_) => "Jump",
            Branch(..) => "Branch",
            StackPush(_) => "StackPush",
            StackPop => "StackPop",
            StackSaveToBoundary => "StackSaveToBoundary",
            StackRestore => "StackRestore",
            ResetStackPush => "ResetStackPush",
            ResetStackPop => "ResetStackPop",
            ResetStackPeek => "ResetStackPeek",
            MakeContinuation(_) => "MakeContinuation",
            CallBuiltin(..) => "CallBuiltin",
            Trap(_) => "Trap",
            Halt => "Halt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub label: BlockLabel,
    /// Human-readable role, shown in dumps.
    pub name: String,
    pub instrs: Vec<Instruction>,
    /// Debug map: source span of each instruction.
    pub spans: Vec<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BytecodeModule {
    /// Indexed by label.
    pub blocks: Vec<Block>,
    /// Runs the top-level bindings, then the final expression, then halts.
    pub entry: BlockLabel,
    /// Runs only the top-level bindings and returns `()` through the return
    /// address found on the stack.
    pub init: BlockLabel,
    /// Target pushed by the host when it invokes a closure; halts.
    pub host_return: BlockLabel,
    pub constants: Vec<Value>,
    /// Builtins referenced by `CallBuiltin`, in first-use order.
    pub builtins: Vec<Builtin>,
    pub globals: Vec<String>,
    pub ctor_names: Vec<Arc<str>>,
    /// Size of the register file.
    pub registers: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("block {0} is empty")]
    EmptyBlock(BlockLabel),
    #[error("block {0} does not end in a control transfer")]
    FallThrough(BlockLabel),
    #[error("block {0} has a control transfer before its end")]
    EarlyTerminator(BlockLabel),
    #[error("block {0} references missing label {1}")]
    MissingLabel(BlockLabel, BlockLabel),
    #[error("block {0} references constant #{1} out of range")]
    BadConstant(BlockLabel, u32),
    #[error("block {0} has mismatched debug map")]
    DebugMap(BlockLabel),
    #[error("block {0} is stored at the wrong index")]
    Misplaced(BlockLabel),
}

impl BytecodeModule {
    pub fn block(&self, l: BlockLabel) -> &Block {
        &self.blocks[l.index()]
    }

    pub fn global_index(&self, name: &str) -> Option<u32> {
        self.globals.iter().position(|g| g == name).map(|i| i as u32)
    }

    pub fn instruction_count(&self) -> usize {
        self.blocks.iter().map(|b| b.instrs.len()).sum()
    }

    /// Label closure, terminators, constant indices and debug map.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.blocks.len() as u32;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.label.index() != i {
                return Err(ValidationError::Misplaced(b.label));
            }
            let Some(last) = b.instrs.last() else {
                return Err(ValidationError::EmptyBlock(b.label));
            };
            if !last.is_terminator() {
                return Err(ValidationError::FallThrough(b.label));
            }
            if b.instrs[..b.instrs.len() - 1].iter().any(|i| i.is_terminator()) {
                return Err(ValidationError::EarlyTerminator(b.label));
            }
            if b.spans.len() != b.instrs.len() {
                return Err(ValidationError::DebugMap(b.label));
            }
            for ins in &b.instrs {
                for l in ins.labels() {
                    if l.0 >= n {
                        return Err(ValidationError::MissingLabel(b.label, l));
                    }
                }
                if let Instruction::PushConst(c) | Instruction::Trap(c) = ins {
                    if *c as usize >= self.constants.len() {
                        return Err(ValidationError::BadConstant(b.label, *c));
                    }
                }
            }
        }
        for l in [self.entry, self.init, self.host_return] {
            if l.0 >= n {
                return Err(ValidationError::MissingLabel(l, l));
            }
        }
        Ok(())
    }

    fn operands(&self, ins: &Instruction) -> String {
        use Instruction::*;
        match ins {
            PushConst(c) => format!("#{c} {}", self.constants[*c as usize]),
            Trap(c) => format!("#{c} {}", self.constants[*c as usize]),
            PushLocal(s) | StoreLocal(s) | MoveLocal(s) | PushEnv(s) => format!("r{s}"),
            PushGlobal(g) | StoreGlobal(g) => format!("g{g} {}", self.globals[*g as usize]),
            MakeClosure(l, slots) => {
                let mut s = l.to_string();
                for r in slots {
                    let _ = write!(s, " r{r}");
                }
                s
            }
            MakeTuple(n) | MakeVector(n) => n.to_string(),
            Project(i) => i.to_string(),
            MakeConstructor { tag, name, n } => {
                format!("{} tag={tag} n={n}", self.ctor_names[*name as usize])
            }
            TagIs(t) => t.to_string(),
            Binary(op) => op.symbol().to_string(),
            Unary(UnOp::Neg) => "-".to_string(),
            Unary(UnOp::Not) => "!".to_string(),
            JumpIndirect(JumpTarget::Stack, k) => format!("stack {}", k.name()),
            JumpIndirect(JumpTarget::Slot(s), k) => format!("r{s} {}", k.name()),
            Jump(l) | StackPush(l) | MakeContinuation(l) => l.to_string(),
            Branch(a, b) => format!("{a} {b}"),
            CallBuiltin(b, n) => format!("{} {n}", b.name()),
            VectorGet | Payload | StackPop | StackSaveToBoundary | StackRestore | ResetStackPush
            | ResetStackPop | ResetStackPeek | Halt => String::new(),
        }
    }

    /// One instruction per line as `LABEL: OPCODE operands`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            for ins in &b.instrs {
                let ops = self.operands(ins);
                if ops.is_empty() {
                    let _ = writeln!(out, "{}: {}", b.label, ins.opcode());
                } else {
                    let _ = writeln!(out, "{}: {} {}", b.label, ins.opcode(), ops);
                }
            }
        }
        out
    }
}

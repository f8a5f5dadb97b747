//! Closure conversion and code generation.
//!
//! Calling convention, per call site:
//!
//! ```text
//!   <callee> <arg>  StoreLocal s0  StoreLocal s1
//!   PushLocal <saved>...  StackPush ret  PushEnv s1  PushLocal s0
//!   JumpIndirect s1 call
//! ret:
//!   StoreLocal s0  StoreLocal <saved reversed>...  PushLocal s0
//! ```
//!
//! Callee prologue pops the argument then the environment and unpacks the
//! captured values; the epilogue pops the result, pops the return address and
//! jumps back with the result pushed. Multiple arguments travel as a tuple.
//!
//! `reset` saves its locals, pushes its exit label and records the depth on
//! the reset stack. `shift` saves its locals, copies everything above the
//! innermost mark into a continuation and runs its body with the stack cut
//! back to the reset's exit label, so the body's result flows to that exit.
//! Resuming a continuation pushes a continuation-exit label and a fresh reset
//! mark, then restores the copied region on top: `k(v)` runs as
//! `reset(k(v))`, and reaching the end of the captured reset body returns
//! through the continuation exit to whoever invoked `k`.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::builtins::Builtin;
use crate::frontend::ast::{BinOp, CaseArm, Expr, ExprKind, Lambda, Literal, Param, Pattern};
use crate::frontend::desugar::DISCARD;
use crate::frontend::SourceSpan;
use crate::types::{IndexKind, TypedProgram};
use crate::vm::value::Value;

use super::bytecode::*;
use super::free_vars::{free_name_set, free_names};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LowerOptions {
    /// Caller-save only the locals that are used after the call site,
    /// instead of every local in scope.
    pub live_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoweringError {
    #[error("unresolved name `{name}` at {span}")]
    UnresolvedName { name: String, span: SourceSpan },
    #[error("unknown constructor `{name}` at {span}")]
    UnknownConstructor { name: String, span: SourceSpan },
    #[error("builtin `{name}` expects {expected} arguments, got {found} at {span}")]
    BuiltinArity {
        name: String,
        expected: usize,
        found: usize,
        span: SourceSpan,
    },
    #[error("index at {span} was not resolved during typing")]
    UnresolvedIndex { span: SourceSpan },
    #[error("unexpected block expression at {span}; desugar first")]
    NotDesugared { span: SourceSpan },
    #[error("invalid module: {0}")]
    Invalid(#[from] ValidationError),
}

const BUILTIN_PREFIX: &str = "%builtin:";

type Live = BTreeSet<String>;

enum Resolved {
    Local(Slot),
    Global(u32),
    Builtin(Builtin),
}

struct FnState {
    locals: Vec<(String, Slot)>,
    hidden: Vec<Slot>,
    next: Slot,
    cur: BlockLabel,
}

struct Lowerer<'a> {
    tp: &'a TypedProgram,
    opts: &'a LowerOptions,
    blocks: Vec<Block>,
    constants: Vec<Value>,
    const_map: HashMap<Value, u32>,
    builtins: Vec<Builtin>,
    globals: Vec<String>,
    global_map: HashMap<String, u32>,
    ctor_names: Vec<Arc<str>>,
    ctor_map: HashMap<String, u32>,
    eta: HashMap<Builtin, BlockLabel>,
    fns: Vec<FnState>,
    registers: Slot,
    k_exit: BlockLabel,
}

/// Lower a checked program into a bytecode module.
pub fn lower_program(tp: &TypedProgram, opts: &LowerOptions) -> Result<BytecodeModule, LoweringError> {
    let mut lw = Lowerer {
        tp,
        opts,
        blocks: Vec::new(),
        constants: Vec::new(),
        const_map: HashMap::new(),
        builtins: Vec::new(),
        globals: Vec::new(),
        global_map: HashMap::new(),
        ctor_names: Vec::new(),
        ctor_map: HashMap::new(),
        eta: HashMap::new(),
        fns: Vec::new(),
        registers: FIRST_LOCAL,
        k_exit: BlockLabel(0),
    };
    let file_span = tp.program.result.span.clone();
    let entry = lw.new_block("entry");
    let init = lw.new_block("init");
    let result = lw.new_block("result");
    let host_return = lw.new_block("host-return");
    lw.k_exit = lw.new_block("continuation-exit");
    lw.fns.push(FnState {
        locals: Vec::new(),
        hidden: Vec::new(),
        next: FIRST_LOCAL,
        cur: entry,
    });
    lw.emit(Instruction::StackPush(result), &file_span);
    lw.emit(Instruction::Jump(init), &file_span);

    lw.switch(init);
    for b in &tp.program.bindings {
        let is_fn = matches!(b.expr.kind, ExprKind::Lambda(_));
        let g = if is_fn { Some(lw.global(&b.name)) } else { None };
        lw.lower(&b.expr, &Live::new())?;
        let g = g.unwrap_or_else(|| lw.global(&b.name));
        lw.emit(Instruction::StoreGlobal(g), &b.span);
    }
    lw.emit(Instruction::StoreLocal(S1), &file_span);
    let unit = lw.constant(Value::Unit);
    lw.emit(Instruction::PushConst(unit), &file_span);
    lw.emit(Instruction::JumpIndirect(JumpTarget::Slot(S1), JumpKind::Return), &file_span);

    lw.switch(result);
    lw.emit(Instruction::StackPop, &file_span);
    lw.lower(&tp.program.result, &Live::new())?;
    lw.emit(Instruction::Halt, &file_span);

    lw.switch(host_return);
    lw.emit(Instruction::Halt, &file_span);

    // A resumed continuation runs under its own reset; its result lands
    // here, the mark is dropped and control returns to the invoker.
    lw.switch(lw.k_exit);
    lw.emit(Instruction::StoreLocal(S0), &file_span);
    lw.emit(Instruction::ResetStackPop, &file_span);
    lw.emit(Instruction::StoreLocal(S1), &file_span);
    lw.emit(Instruction::PushLocal(S0), &file_span);
    lw.emit(Instruction::JumpIndirect(JumpTarget::Slot(S1), JumpKind::Return), &file_span);

    let module = BytecodeModule {
        blocks: lw.blocks,
        entry,
        init,
        host_return,
        constants: lw.constants,
        builtins: lw.builtins,
        globals: lw.globals,
        ctor_names: lw.ctor_names,
        registers: lw.registers,
    };
    module.validate()?;
    Ok(module)
}

fn union(a: &Live, b: impl IntoIterator<Item = String>) -> Live {
    let mut out = a.clone();
    out.extend(b);
    out
}

impl<'a> Lowerer<'a> {
    fn f(&self) -> &FnState {
        self.fns.last().expect("function context")
    }

    fn f_mut(&mut self) -> &mut FnState {
        self.fns.last_mut().expect("function context")
    }

    fn new_block(&mut self, name: &str) -> BlockLabel {
        let l = BlockLabel(self.blocks.len() as u32);
        self.blocks.push(Block {
            label: l,
            name: name.to_string(),
            instrs: Vec::new(),
            spans: Vec::new(),
        });
        l
    }

    fn switch(&mut self, l: BlockLabel) {
        self.f_mut().cur = l;
    }

    fn emit(&mut self, i: Instruction, span: &SourceSpan) {
        if let Instruction::CallBuiltin(b, _) = i {
            if !self.builtins.contains(&b) {
                self.builtins.push(b);
            }
        }
        let cur = self.f().cur.index();
        self.blocks[cur].instrs.push(i);
        self.blocks[cur].spans.push(span.clone());
    }

    fn constant(&mut self, v: Value) -> u32 {
        if let Some(&i) = self.const_map.get(&v) {
            return i;
        }
        let i = self.constants.len() as u32;
        self.constants.push(v.clone());
        self.const_map.insert(v, i);
        i
    }

    fn global(&mut self, name: &str) -> u32 {
        if let Some(&g) = self.global_map.get(name) {
            return g;
        }
        let g = self.globals.len() as u32;
        self.globals.push(name.to_string());
        self.global_map.insert(name.to_string(), g);
        g
    }

    fn ctor_name(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.ctor_map.get(name) {
            return i;
        }
        let i = self.ctor_names.len() as u32;
        self.ctor_names.push(name.into());
        self.ctor_map.insert(name.to_string(), i);
        i
    }

    fn alloc(&mut self) -> Slot {
        let f = self.f_mut();
        let s = f.next;
        f.next += 1;
        self.registers = self.registers.max(s + 1);
        s
    }

    fn bind_local(&mut self, name: &str) -> Slot {
        let s = self.alloc();
        self.f_mut().locals.push((name.to_string(), s));
        s
    }

    fn alloc_hidden(&mut self) -> Slot {
        let s = self.alloc();
        self.f_mut().hidden.push(s);
        s
    }

    fn resolve(&self, name: &str, span: &SourceSpan) -> Result<Resolved, LoweringError> {
        if let Some(b) = name.strip_prefix(BUILTIN_PREFIX) {
            return Builtin::from_name(b).map(Resolved::Builtin).ok_or_else(|| {
                LoweringError::UnresolvedName {
                    name: name.to_string(),
                    span: span.clone(),
                }
            });
        }
        if let Some((_, s)) = self.f().locals.iter().rev().find(|(n, _)| n == name) {
            return Ok(Resolved::Local(*s));
        }
        if let Some(&g) = self.global_map.get(name) {
            return Ok(Resolved::Global(g));
        }
        if let Some(b) = Builtin::from_name(name) {
            return Ok(Resolved::Builtin(b));
        }
        Err(LoweringError::UnresolvedName {
            name: name.to_string(),
            span: span.clone(),
        })
    }

    /// Registers to caller-save: visible named locals (all of them, or
    /// only live ones) followed by hidden loop and case temporaries.
    fn sym_tab(&self, live: &Live) -> Vec<Slot> {
        let f = self.f();
        let mut out = Vec::new();
        for (i, (name, slot)) in f.locals.iter().enumerate() {
            let shadowed = f.locals[i + 1..].iter().any(|(n, _)| n == name);
            if shadowed || (self.opts.live_only && !live.contains(name)) {
                continue;
            }
            out.push(*slot);
        }
        out.extend(f.hidden.iter().copied());
        out
    }

    fn save(&mut self, slots: &[Slot], span: &SourceSpan) {
        for &s in slots {
            self.emit(Instruction::PushLocal(s), span);
        }
    }

    /// Pop the value on top into s0, restore saved registers, push it back.
    fn restore(&mut self, slots: &[Slot], span: &SourceSpan) {
        self.emit(Instruction::StoreLocal(S0), span);
        for &s in slots.iter().rev() {
            self.emit(Instruction::StoreLocal(s), span);
        }
        self.emit(Instruction::PushLocal(S0), span);
    }

    /// Pop result and return address, push result, jump back.
    fn exit_sequence(&mut self, kind: JumpKind, span: &SourceSpan) {
        self.emit(Instruction::StoreLocal(S0), span);
        self.emit(Instruction::StoreLocal(S1), span);
        self.emit(Instruction::PushLocal(S0), span);
        self.emit(Instruction::JumpIndirect(JumpTarget::Slot(S1), kind), span);
    }

    /// Stack holds `callee arg`; leaves the call result.
    fn emit_call(&mut self, live: &Live, span: &SourceSpan) {
        self.emit(Instruction::StoreLocal(S0), span);
        self.emit(Instruction::StoreLocal(S1), span);
        let saved = self.sym_tab(live);
        self.save(&saved, span);
        let ret = self.new_block("ret");
        self.emit(Instruction::StackPush(ret), span);
        self.emit(Instruction::PushEnv(S1), span);
        self.emit(Instruction::PushLocal(S0), span);
        self.emit(Instruction::JumpIndirect(JumpTarget::Slot(S1), JumpKind::Call), span);
        self.switch(ret);
        self.restore(&saved, span);
    }

    fn lower_seq(&mut self, xs: &[Expr], live: &Live) -> Result<(), LoweringError> {
        for (i, x) in xs.iter().enumerate() {
            let rest = union(live, xs[i + 1..].iter().flat_map(free_names));
            self.lower(x, &rest)?;
        }
        Ok(())
    }

    fn pack_args(&mut self, n: usize, span: &SourceSpan) {
        match n {
            0 => {
                let u = self.constant(Value::Unit);
                self.emit(Instruction::PushConst(u), span);
            }
            1 => {}
            n => self.emit(Instruction::MakeTuple(n as u32), span),
        }
    }

    fn lower(&mut self, e: &Expr, live: &Live) -> Result<(), LoweringError> {
        let span = &e.span;
        match &e.kind {
            ExprKind::Literal(lit) => {
                let v = match lit {
                    Literal::Int(i) => Value::Int(*i),
                    Literal::Real(r) => Value::Real(*r),
                    Literal::Bool(b) => Value::Bool(*b),
                    Literal::Unit => Value::Unit,
                    Literal::Str(s) => Value::Str(s.as_str().into()),
                };
                let c = self.constant(v);
                self.emit(Instruction::PushConst(c), span);
            }
            ExprKind::Var(name) => match self.resolve(name, span)? {
                Resolved::Local(s) => self.emit(Instruction::PushLocal(s), span),
                Resolved::Global(g) => self.emit(Instruction::PushGlobal(g), span),
                Resolved::Builtin(b) => {
                    let l = self.eta_block(b, span)?;
                    self.emit(Instruction::MakeClosure(l, vec![]), span);
                }
            },
            ExprKind::Lambda(l) => {
                let captured: Vec<(String, Slot)> = free_names(e)
                    .into_iter()
                    .filter_map(|n| match self.resolve(&n, span) {
                        Ok(Resolved::Local(s)) => Some((n, s)),
                        _ => None,
                    })
                    .collect();
                let entry = self.lower_lambda(l, &captured, span)?;
                let slots = captured.iter().map(|(_, s)| *s).collect();
                self.emit(Instruction::MakeClosure(entry, slots), span);
            }
            ExprKind::Apply(callee, args) => {
                if let ExprKind::Var(name) = &callee.kind {
                    if let Resolved::Builtin(b) = self.resolve(name, &callee.span)? {
                        if b.arity() != args.len() {
                            return Err(LoweringError::BuiltinArity {
                                name: b.name().to_string(),
                                expected: b.arity(),
                                found: args.len(),
                                span: span.clone(),
                            });
                        }
                        if b.is_inline_loop() {
                            return self.lower_loop(b, args, live, span);
                        }
                        self.lower_seq(args, live)?;
                        self.emit(Instruction::CallBuiltin(b, args.len() as u32), span);
                        return Ok(());
                    }
                }
                let callee_live = union(live, args.iter().flat_map(free_names));
                self.lower(callee, &callee_live)?;
                self.lower_seq(args, live)?;
                self.pack_args(args.len(), span);
                self.emit_call(live, span);
            }
            ExprKind::Bind(x, rhs, body) => {
                let mut body_fv = free_name_set(body);
                body_fv.remove(x);
                self.lower(rhs, &union(live, body_fv))?;
                if x == DISCARD {
                    self.emit(Instruction::StackPop, span);
                    self.lower(body, live)?;
                } else {
                    let s = self.bind_local(x);
                    self.emit(Instruction::StoreLocal(s), span);
                    self.lower(body, live)?;
                    self.f_mut().locals.pop();
                }
            }
            ExprKind::If(c, t, f) => {
                let branch_live = union(live, free_names(t).into_iter().chain(free_names(f)));
                self.lower(c, &branch_live)?;
                let (lt, lf, end) = (self.new_block("then"), self.new_block("else"), self.new_block("endif"));
                self.emit(Instruction::Branch(lt, lf), span);
                self.switch(lt);
                self.lower(t, live)?;
                self.emit(Instruction::Jump(end), span);
                self.switch(lf);
                self.lower(f, live)?;
                self.emit(Instruction::Jump(end), span);
                self.switch(end);
            }
            ExprKind::Case(scrut, arms) => self.lower_case(scrut, arms, live, span)?,
            ExprKind::Construct(name, args) => {
                let Some(info) = self.tp.ctors.get(name) else {
                    return Err(LoweringError::UnknownConstructor {
                        name: name.clone(),
                        span: span.clone(),
                    });
                };
                let tag = info.tag;
                self.lower_seq(args, live)?;
                let name = self.ctor_name(name);
                self.emit(
                    Instruction::MakeConstructor {
                        tag,
                        name,
                        n: args.len() as u32,
                    },
                    span,
                );
            }
            ExprKind::VectorLit(xs) => {
                self.lower_seq(xs, live)?;
                self.emit(Instruction::MakeVector(xs.len() as u32), span);
            }
            ExprKind::Tuple(xs) => {
                self.lower_seq(xs, live)?;
                self.emit(Instruction::MakeTuple(xs.len() as u32), span);
            }
            ExprKind::Index(a, i) => match self.tp.index_kinds.get(&e.id) {
                Some(IndexKind::Project(k)) => {
                    self.lower(a, live)?;
                    self.emit(Instruction::Project(*k as u32), span);
                }
                Some(IndexKind::VectorGet) => {
                    self.lower(a, &union(live, free_names(i)))?;
                    self.lower(i, live)?;
                    self.emit(Instruction::VectorGet, span);
                }
                None => return Err(LoweringError::UnresolvedIndex { span: span.clone() }),
            },
            ExprKind::BinOp(op @ (BinOp::And | BinOp::Or), l, r) => {
                self.lower(l, &union(live, free_names(r)))?;
                let (lr, short, end) = (self.new_block("rhs"), self.new_block("short"), self.new_block("endlogic"));
                if *op == BinOp::And {
                    self.emit(Instruction::Branch(lr, short), span);
                } else {
                    self.emit(Instruction::Branch(short, lr), span);
                }
                self.switch(lr);
                self.lower(r, live)?;
                self.emit(Instruction::Jump(end), span);
                self.switch(short);
                let c = self.constant(Value::Bool(*op == BinOp::Or));
                self.emit(Instruction::PushConst(c), span);
                self.emit(Instruction::Jump(end), span);
                self.switch(end);
            }
            ExprKind::BinOp(op, l, r) => {
                self.lower(l, &union(live, free_names(r)))?;
                self.lower(r, live)?;
                self.emit(Instruction::Binary(*op), span);
            }
            ExprKind::UnOp(op, a) => {
                self.lower(a, live)?;
                self.emit(Instruction::Unary(*op), span);
            }
            ExprKind::Reset(body) => {
                let saved = self.sym_tab(live);
                self.save(&saved, span);
                let exit = self.new_block("reset-exit");
                self.emit(Instruction::StackPush(exit), span);
                self.emit(Instruction::ResetStackPush, span);
                self.lower(body, &Live::new())?;
                self.exit_sequence(JumpKind::ResetExit, span);
                self.switch(exit);
                self.emit(Instruction::StoreLocal(S0), span);
                self.emit(Instruction::ResetStackPop, span);
                for &s in saved.iter().rev() {
                    self.emit(Instruction::StoreLocal(s), span);
                }
                self.emit(Instruction::PushLocal(S0), span);
            }
            ExprKind::Shift(sh) => {
                let saved = self.sym_tab(live);
                self.save(&saved, span);
                self.emit(Instruction::ResetStackPeek, span);
                self.emit(Instruction::StackSaveToBoundary, span);
                let resume = self.new_block("resume");
                self.emit(Instruction::MakeContinuation(resume), span);
                let bound = sh.k != DISCARD;
                if bound {
                    let s = self.bind_local(&sh.k);
                    self.emit(Instruction::StoreLocal(s), span);
                } else {
                    self.emit(Instruction::StackPop, span);
                }
                self.lower(&sh.body, &Live::new())?;
                self.exit_sequence(JumpKind::ShiftExit, span);
                if bound {
                    self.f_mut().locals.pop();
                }
                self.switch(resume);
                self.emit(Instruction::StoreLocal(S0), span);
                self.emit(Instruction::StoreLocal(S1), span);
                self.emit(Instruction::StackPush(self.k_exit), span);
                self.emit(Instruction::ResetStackPush, span);
                self.emit(Instruction::PushLocal(S1), span);
                self.emit(Instruction::StackRestore, span);
                for &s in saved.iter().rev() {
                    self.emit(Instruction::StoreLocal(s), span);
                }
                self.emit(Instruction::PushLocal(S0), span);
            }
            ExprKind::Block(..) => return Err(LoweringError::NotDesugared { span: span.clone() }),
        }
        Ok(())
    }

    fn lower_lambda(
        &mut self,
        l: &Lambda,
        captured: &[(String, Slot)],
        span: &SourceSpan,
    ) -> Result<BlockLabel, LoweringError> {
        let entry = self.new_block("fn");
        self.fns.push(FnState {
            locals: Vec::new(),
            hidden: Vec::new(),
            next: FIRST_LOCAL,
            cur: entry,
        });
        self.emit(Instruction::StoreLocal(S0), span);
        self.emit(Instruction::StoreLocal(S1), span);
        for (i, (name, _)) in captured.iter().enumerate() {
            let s = self.bind_local(name);
            self.emit(Instruction::PushLocal(S1), span);
            self.emit(Instruction::Project(i as u32), span);
            self.emit(Instruction::StoreLocal(s), span);
        }
        match l.params.as_slice() {
            [] => {}
            [p] => {
                if p.name != DISCARD {
                    let s = self.bind_local(&p.name);
                    self.emit(Instruction::PushLocal(S0), span);
                    self.emit(Instruction::StoreLocal(s), span);
                }
            }
            ps => {
                for (i, p) in ps.iter().enumerate() {
                    if p.name == DISCARD {
                        continue;
                    }
                    let s = self.bind_local(&p.name);
                    self.emit(Instruction::PushLocal(S0), span);
                    self.emit(Instruction::Project(i as u32), span);
                    self.emit(Instruction::StoreLocal(s), span);
                }
            }
        }
        self.lower(&l.body, &Live::new())?;
        self.exit_sequence(JumpKind::Return, &l.body.span);
        self.fns.pop();
        Ok(entry)
    }

    /// A closure `function (a0, .., an) { b(a0, .., an) }` for a builtin
    /// used as a value. One block per builtin, shared by all uses.
    fn eta_block(&mut self, b: Builtin, span: &SourceSpan) -> Result<BlockLabel, LoweringError> {
        if let Some(&l) = self.eta.get(&b) {
            return Ok(l);
        }
        let var = |name: String| Expr {
            id: 0,
            span: span.clone(),
            kind: ExprKind::Var(name),
        };
        let params: Vec<Param> = (0..b.arity())
            .map(|i| Param {
                name: format!("%a{i}"),
                ty: None,
            })
            .collect();
        let args = params.iter().map(|p| var(p.name.clone())).collect();
        let body = Expr {
            id: 0,
            span: span.clone(),
            kind: ExprKind::Apply(Box::new(var(format!("{BUILTIN_PREFIX}{}", b.name()))), args),
        };
        let lam = Lambda {
            params,
            ret: None,
            body: Box::new(body),
        };
        let l = self.lower_lambda(&lam, &[], span)?;
        self.eta.insert(b, l);
        Ok(l)
    }

    fn lower_case(
        &mut self,
        scrut: &Expr,
        arms: &[CaseArm],
        live: &Live,
        span: &SourceSpan,
    ) -> Result<(), LoweringError> {
        let arms_live = union(live, arms.iter().flat_map(|a| free_names(&a.body)));
        self.lower(scrut, &arms_live)?;
        let hs = self.alloc_hidden();
        self.emit(Instruction::StoreLocal(hs), span);
        let end = self.new_block("endcase");
        for arm in arms {
            let Some(info) = self.tp.ctors.get(&arm.ctor) else {
                return Err(LoweringError::UnknownConstructor {
                    name: arm.ctor.clone(),
                    span: arm.body.span.clone(),
                });
            };
            let tag = info.tag;
            let (body, next) = (self.new_block("arm"), self.new_block("nextarm"));
            self.emit(Instruction::PushLocal(hs), span);
            self.emit(Instruction::TagIs(tag), span);
            self.emit(Instruction::Branch(body, next), span);
            self.switch(body);
            let names: Vec<&String> = match &arm.pattern {
                Pattern::Empty => vec![],
                Pattern::Bind(x) => {
                    if x != DISCARD {
                        let s = self.bind_local(x);
                        self.emit(Instruction::PushLocal(hs), span);
                        self.emit(Instruction::Payload, span);
                        self.emit(Instruction::StoreLocal(s), span);
                    }
                    vec![x]
                }
                Pattern::Tuple(xs) => {
                    for (i, x) in xs.iter().enumerate() {
                        if x == DISCARD {
                            continue;
                        }
                        let s = self.bind_local(x);
                        self.emit(Instruction::PushLocal(hs), span);
                        self.emit(Instruction::Payload, span);
                        self.emit(Instruction::Project(i as u32), span);
                        self.emit(Instruction::StoreLocal(s), span);
                    }
                    xs.iter().collect()
                }
            };
            self.lower(&arm.body, live)?;
            let bound = names.iter().filter(|x| x.as_str() != DISCARD).count();
            let f = self.f_mut();
            f.locals.truncate(f.locals.len() - bound);
            self.emit(Instruction::Jump(end), span);
            self.switch(next);
        }
        let msg = self.constant(Value::Str("no case arm matches".into()));
        self.emit(Instruction::Trap(msg), span);
        self.f_mut().hidden.pop();
        self.switch(end);
        Ok(())
    }

    /// `map`, `repeat`, `reduce` and `filter` as loops around the ordinary
    /// call sequence; loop state lives in hidden locals so that calls save
    /// it and continuations capture it.
    fn lower_loop(&mut self, b: Builtin, args: &[Expr], live: &Live, span: &SourceSpan) -> Result<(), LoweringError> {
        use Instruction::*;
        self.lower_seq(args, live)?;
        let hf = self.alloc_hidden();
        let hsrc = self.alloc_hidden();
        let hacc = self.alloc_hidden();
        let hi = self.alloc_hidden();
        let hn = self.alloc_hidden();
        match b {
            Builtin::Repeat => {
                self.emit(StoreLocal(hn), span);
                self.emit(StoreLocal(hf), span);
            }
            Builtin::Reduce => {
                self.emit(StoreLocal(hsrc), span);
                self.emit(StoreLocal(hacc), span);
                self.emit(StoreLocal(hf), span);
            }
            _ => {
                self.emit(StoreLocal(hsrc), span);
                self.emit(StoreLocal(hf), span);
            }
        }
        if b != Builtin::Repeat {
            self.emit(PushLocal(hsrc), span);
            self.emit(CallBuiltin(Builtin::Length, 1), span);
            self.emit(StoreLocal(hn), span);
        }
        if b != Builtin::Reduce {
            let empty = self.constant(Value::vector(vec![]));
            self.emit(PushConst(empty), span);
            self.emit(StoreLocal(hacc), span);
        }
        let zero = self.constant(Value::Int(0));
        let one = self.constant(Value::Int(1));
        self.emit(PushConst(zero), span);
        self.emit(StoreLocal(hi), span);
        let (head, body, done) = (self.new_block("loop"), self.new_block("loop-body"), self.new_block("loop-done"));
        self.emit(Jump(head), span);

        self.switch(head);
        self.emit(PushLocal(hi), span);
        self.emit(PushLocal(hn), span);
        self.emit(Binary(BinOp::Lt), span);
        self.emit(Branch(body, done), span);

        self.switch(body);
        self.emit(PushLocal(hf), span);
        match b {
            Builtin::Repeat => self.emit(PushLocal(hi), span),
            Builtin::Reduce => {
                self.emit(MoveLocal(hacc), span);
                self.emit(PushLocal(hsrc), span);
                self.emit(PushLocal(hi), span);
                self.emit(VectorGet, span);
                self.emit(MakeTuple(2), span);
            }
            _ => {
                self.emit(PushLocal(hsrc), span);
                self.emit(PushLocal(hi), span);
                self.emit(VectorGet, span);
            }
        }
        self.emit_call(live, span);
        match b {
            Builtin::Reduce => self.emit(StoreLocal(hacc), span),
            Builtin::Filter => {
                let (keep, next) = (self.new_block("keep"), self.new_block("next"));
                self.emit(Branch(keep, next), span);
                self.switch(keep);
                self.emit(MoveLocal(hacc), span);
                self.emit(PushLocal(hsrc), span);
                self.emit(PushLocal(hi), span);
                self.emit(VectorGet, span);
                self.emit(CallBuiltin(Builtin::Push, 2), span);
                self.emit(StoreLocal(hacc), span);
                self.emit(Jump(next), span);
                self.switch(next);
            }
            _ => {
                self.emit(StoreLocal(S0), span);
                self.emit(MoveLocal(hacc), span);
                self.emit(PushLocal(S0), span);
                self.emit(CallBuiltin(Builtin::Push, 2), span);
                self.emit(StoreLocal(hacc), span);
            }
        }
        self.emit(PushLocal(hi), span);
        self.emit(PushConst(one), span);
        self.emit(Binary(BinOp::Add), span);
        self.emit(StoreLocal(hi), span);
        self.emit(Jump(head), span);

        self.switch(done);
        self.emit(MoveLocal(hacc), span);
        let f = self.f_mut();
        f.hidden.truncate(f.hidden.len() - 5);
        Ok(())
    }
}

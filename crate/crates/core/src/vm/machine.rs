//! The execution loop.

use std::sync::Arc;

use crate::builtins::Builtin;
use crate::frontend::SourceSpan;
use crate::lowering::{BlockLabel, BytecodeModule, Instruction, JumpKind, JumpTarget};

use super::dist::{DistValue, EmpiricalDistribution};
use super::error::{VmError, VmErrorKind};
use super::ops;
use super::rng::Rng;
use super::value::{ClosureValue, ContinuationValue, CtorValue, SavedStack, Value};

pub const DEFAULT_STACK_SLOTS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct VmOptions {
    pub stack_slots: usize,
    pub max_steps: Option<u64>,
    /// Return-address stamp and reset-mark assertions.
    pub checks: bool,
}

impl Default for VmOptions {
    fn default() -> Self {
        VmOptions {
            stack_slots: DEFAULT_STACK_SLOTS,
            max_steps: None,
            checks: true,
        }
    }
}

/// What a handler asks the machine to do with a captured continuation.
#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    /// Continue the model: with the drawn value for `sample`, with `()` for
    /// `factor`.
    Resume(Value),
    /// Stop the run and hand the continuation to the caller.
    Suspend,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    Sample(DistValue),
    Factor(f64),
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Done(Value),
    Suspended { request: Request, k: Value },
}

/// Receives every `sample` and `factor` reached by a run.
pub trait Handler {
    fn sample(&mut self, d: &DistValue, rng: &mut Rng) -> Result<Directive, VmErrorKind>;
    fn factor(&mut self, log_p: f64) -> Result<Directive, VmErrorKind>;
}

/// Sample from the prior and ignore factors.
#[derive(Debug, Default, Clone, Copy)]
pub struct PriorHandler;

impl Handler for PriorHandler {
    fn sample(&mut self, d: &DistValue, rng: &mut Rng) -> Result<Directive, VmErrorKind> {
        d.sample(rng).map(Directive::Resume)
    }

    fn factor(&mut self, _log_p: f64) -> Result<Directive, VmErrorKind> {
        Ok(Directive::Resume(Value::Unit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Importance,
    Mcmc,
    Enumerate,
}

/// Runs the inference builtins on behalf of a program.
pub trait InferenceDriver: Send + Sync {
    fn infer(
        &self,
        engine: EngineKind,
        ctx: &VmContext,
        model: &Value,
        n: i64,
        seed: u64,
    ) -> Result<EmpiricalDistribution, VmError>;
}

/// Everything a run needs besides its mutable state. Cheap to clone.
#[derive(Clone)]
pub struct VmContext {
    pub module: Arc<BytecodeModule>,
    pub globals: Arc<Vec<Value>>,
    pub options: VmOptions,
    pub driver: Option<Arc<dyn InferenceDriver>>,
}

impl VmContext {
    pub fn new(module: Arc<BytecodeModule>) -> Self {
        VmContext {
            module,
            globals: Arc::new(Vec::new()),
            options: VmOptions::default(),
            driver: None,
        }
    }

    pub fn with_options(mut self, options: VmOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_driver(mut self, driver: Arc<dyn InferenceDriver>) -> Self {
        self.driver = Some(driver);
        self
    }

    pub fn global(&self, name: &str) -> Option<&Value> {
        let i = self.module.global_index(name)? as usize;
        self.globals.get(i)
    }
}

/// Counters for the protocol assertions actually performed.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    pub steps: u64,
    pub return_checks: u64,
    pub reset_checks: u64,
    pub captures: u64,
    pub restores: u64,
    pub max_depth: usize,
    /// `sample-impl` and `factor-impl` invocations.
    pub samples: u64,
    pub factors: u64,
}

/// One VM state: managed stack, reset stack, register file.
pub struct Machine {
    ctx: VmContext,
    stack: Vec<Value>,
    resets: Vec<usize>,
    regs: Vec<Value>,
    pub stats: Stats,
}

impl Machine {
    pub fn new(ctx: VmContext) -> Self {
        let regs = vec![Value::Unit; ctx.module.registers as usize];
        Machine {
            ctx,
            stack: Vec::new(),
            resets: Vec::new(),
            regs,
            stats: Stats::default(),
        }
    }

    pub fn context(&self) -> &VmContext {
        &self.ctx
    }

    pub fn globals(&self) -> &Arc<Vec<Value>> {
        &self.ctx.globals
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    fn reset_state(&mut self) {
        self.stack.clear();
        self.resets.clear();
        // stale registers would otherwise get spilled into the next run's
        // captured segments, chaining every run to the previous one
        self.regs.fill(Value::Unit);
    }

    /// Run the whole program: bindings, then the final expression.
    pub fn run_main(&mut self, handler: &mut dyn Handler, rng: &mut Rng) -> Result<Value, VmError> {
        self.reset_state();
        let entry = self.ctx.module.entry;
        match self.exec(entry, handler, rng)? {
            Outcome::Done(v) => Ok(v),
            Outcome::Suspended { .. } => Err(VmErrorKind::Engine("handler suspended outside an engine".into()).into()),
        }
    }

    /// Run only the top-level bindings, leaving the globals populated.
    pub fn run_init(&mut self, handler: &mut dyn Handler, rng: &mut Rng) -> Result<(), VmError> {
        self.reset_state();
        let host = self.ctx.module.host_return;
        self.push_ret(host)?;
        let init = self.ctx.module.init;
        match self.exec(init, handler, rng)? {
            Outcome::Done(_) => Ok(()),
            Outcome::Suspended { .. } => Err(VmErrorKind::Engine("handler suspended outside an engine".into()).into()),
        }
    }

    /// Host-side call of a closure or continuation, following the same
    /// protocol as a compiled call site.
    pub fn call(&mut self, f: &Value, arg: Value, handler: &mut dyn Handler, rng: &mut Rng) -> Result<Outcome, VmError> {
        self.reset_state();
        let host = self.ctx.module.host_return;
        self.push_ret(host)?;
        let (env, target) = callable(f)?;
        self.push(env)?;
        self.push(arg)?;
        self.exec(target, handler, rng)
    }

    /// Call a global by name with a tuple of arguments (or one argument).
    pub fn call_global(
        &mut self,
        name: &str,
        arg: Value,
        handler: &mut dyn Handler,
        rng: &mut Rng,
    ) -> Result<Outcome, VmError> {
        let f = self
            .ctx
            .global(name)
            .cloned()
            .ok_or_else(|| VmError::new(VmErrorKind::Undefined(format!("no global `{name}`"))))?;
        self.call(&f, arg, handler, rng)
    }

    pub(crate) fn push(&mut self, v: Value) -> Result<(), VmError> {
        if self.stack.len() >= self.ctx.options.stack_slots {
            return Err(VmErrorKind::StackOverflow {
                limit: self.ctx.options.stack_slots,
            }
            .into());
        }
        self.stack.push(v);
        Ok(())
    }

    fn push_ret(&mut self, l: BlockLabel) -> Result<(), VmError> {
        let stamp = self.stack.len() as u32 + 1;
        self.push(Value::RetAddr(l.0, stamp))
    }

    pub(crate) fn pop(&mut self) -> Result<Value, VmError> {
        self.stack
            .pop()
            .ok_or_else(|| VmErrorKind::StackProtocol("pop from an empty managed stack".into()).into())
    }

    /// Copy the slots above `boundary` into a segment and drop them.
    pub fn stack_save(&mut self, boundary: usize) -> Result<SavedStack, VmError> {
        let depth = self.stack.len();
        if boundary > depth {
            return Err(VmErrorKind::BoundaryError { boundary, depth }.into());
        }
        let slots = self.stack.split_off(boundary);
        self.stats.captures += 1;
        Ok(SavedStack { base: boundary, slots })
    }

    /// Push copies of a segment's slots; the segment stays reusable.
    pub fn stack_restore(&mut self, saved: &SavedStack) -> Result<(), VmError> {
        if self.stack.len() + saved.count() > self.ctx.options.stack_slots {
            return Err(VmErrorKind::StackOverflow {
                limit: self.ctx.options.stack_slots,
            }
            .into());
        }
        // Return-address stamps record absolute depths; shift them to the
        // new base so the checks stay meaningful after relocation.
        let delta = self.stack.len() as i64 - saved.base as i64;
        self.stack.extend(saved.slots.iter().map(|v| match v {
            Value::RetAddr(l, s) => Value::RetAddr(*l, (*s as i64 + delta) as u32),
            other => other.clone(),
        }));
        self.stats.restores += 1;
        Ok(())
    }

    fn exec(&mut self, start: BlockLabel, handler: &mut dyn Handler, rng: &mut Rng) -> Result<Outcome, VmError> {
        let module = self.ctx.module.clone();
        let mut block = start.index();
        let mut pc = 0usize;
        loop {
            let b = &module.blocks[block];
            let ins = &b.instrs[pc];
            let span = &b.spans[pc];
            pc += 1;
            self.stats.steps += 1;
            if let Some(limit) = self.ctx.options.max_steps {
                if self.stats.steps > limit {
                    return Err(VmError::new(VmErrorKind::StepLimitExceeded { limit }).at(span));
                }
            }
            match self.step(&module, ins, span, handler, rng) {
                Ok(Flow::Next) => {}
                Ok(Flow::Goto(l)) => {
                    block = l as usize;
                    pc = 0;
                }
                Ok(Flow::Stop(o)) => return Ok(o),
                Err(e) => return Err(e.at(span)),
            }
        }
    }

    fn check_stamp(&mut self, stamp: u32, kind: JumpKind) -> Result<(), VmError> {
        if self.ctx.options.checks {
            self.stats.return_checks += 1;
            if stamp as usize != self.stack.len() {
                return Err(VmErrorKind::StackProtocol(format!(
                    "{kind:?} with stack depth {} but return address stamped {stamp}",
                    self.stack.len()
                ))
                .into());
            }
        }
        Ok(())
    }

    fn step(
        &mut self,
        module: &BytecodeModule,
        ins: &Instruction,
        span: &SourceSpan,
        handler: &mut dyn Handler,
        rng: &mut Rng,
    ) -> Result<Flow, VmError> {
        use Instruction::*;
        match ins {
            PushConst(c) => {
                let v = module.constants[*c as usize].clone();
                self.push(v)?;
            }
            PushLocal(s) => {
                let v = self.regs[*s as usize].clone();
                self.push(v)?;
            }
            StoreLocal(s) => {
                let v = self.pop()?;
                self.regs[*s as usize] = v;
            }
            MoveLocal(s) => {
                let v = std::mem::replace(&mut self.regs[*s as usize], Value::Unit);
                self.push(v)?;
            }
            PushGlobal(g) => {
                let v = self.ctx.globals.get(*g as usize).cloned().ok_or_else(|| {
                    VmErrorKind::Undefined(format!("global `{}` read before definition", module.globals[*g as usize]))
                })?;
                self.push(v)?;
            }
            StoreGlobal(g) => {
                let v = self.pop()?;
                let gs = Arc::make_mut(&mut self.ctx.globals);
                let i = *g as usize;
                if gs.len() <= i {
                    gs.resize(i + 1, Value::Unit);
                }
                gs[i] = v;
            }
            MakeClosure(l, slots) => {
                let env = Value::tuple(slots.iter().map(|s| self.regs[*s as usize].clone()).collect());
                self.push(Value::Closure(Arc::new(ClosureValue { entry: l.0, env })))?;
            }
            PushEnv(s) => {
                let (env, _) = callable(&self.regs[*s as usize])?;
                self.push(env)?;
            }
            MakeTuple(n) => {
                let xs = self.pop_n(*n as usize)?;
                self.push(Value::tuple(xs))?;
            }
            Project(i) => match self.pop()? {
                Value::Tuple(xs) if (*i as usize) < xs.len() => self.push(xs[*i as usize].clone())?,
                v => return Err(mismatch(&format!("projection .{i}"), &v)),
            },
            MakeVector(n) => {
                let xs = self.pop_n(*n as usize)?;
                self.push(Value::vector(xs))?;
            }
            VectorGet => {
                let i = self.pop()?;
                let v = self.pop()?;
                match (v, i) {
                    (Value::Vector(xs), Value::Int(i)) => {
                        if i < 0 || i as usize >= xs.len() {
                            return Err(VmErrorKind::IndexOutOfBounds { index: i, len: xs.len() }.into());
                        }
                        self.push(xs[i as usize].clone())?;
                    }
                    (v, _) => return Err(mismatch("indexing", &v)),
                }
            }
            MakeConstructor { tag, name, n } => {
                let payload = match *n {
                    0 => Value::Unit,
                    1 => self.pop()?,
                    n => Value::tuple(self.pop_n(n as usize)?),
                };
                let name = module.ctor_names[*name as usize].clone();
                self.push(Value::Constructor(Arc::new(CtorValue { tag: *tag, name, payload })))?;
            }
            TagIs(t) => match self.pop()? {
                Value::Constructor(c) => self.push(Value::Bool(c.tag == *t))?,
                v => return Err(mismatch("case", &v)),
            },
            Payload => match self.pop()? {
                Value::Constructor(c) => self.push(c.payload.clone())?,
                v => return Err(mismatch("case", &v)),
            },
            Binary(op) => {
                let b = self.pop()?;
                let a = self.pop()?;
                self.push(ops::binary(*op, a, b)?)?;
            }
            Unary(op) => {
                let a = self.pop()?;
                self.push(ops::unary(*op, a)?)?;
            }
            JumpIndirect(target, kind) => {
                let t = match target {
                    JumpTarget::Stack => self.pop()?,
                    JumpTarget::Slot(s) => self.regs[*s as usize].clone(),
                };
                return match (kind, t) {
                    (JumpKind::Call, f) => Ok(Flow::Goto(callable(&f)?.1 .0)),
                    (_, Value::RetAddr(l, stamp)) => {
                        self.check_stamp(stamp, *kind)?;
                        Ok(Flow::Goto(l))
                    }
                    (_, v) => Err(VmErrorKind::StackProtocol(format!("{kind:?} through a {}", v.type_name())).into()),
                };
            }
            Jump(l) => return Ok(Flow::Goto(l.0)),
            Branch(t, f) => {
                return match self.pop()? {
                    Value::Bool(true) => Ok(Flow::Goto(t.0)),
                    Value::Bool(false) => Ok(Flow::Goto(f.0)),
                    v => Err(mismatch("condition", &v)),
                }
            }
            StackPush(l) => self.push_ret(*l)?,
            StackPop => {
                self.pop()?;
            }
            StackSaveToBoundary => {
                let boundary = match self.pop()? {
                    Value::Int(i) if i >= 0 => i as usize,
                    v => return Err(mismatch("stack boundary", &v)),
                };
                let saved = self.stack_save(boundary)?;
                self.push(Value::Segment(Arc::new(saved)))?;
            }
            StackRestore => match self.pop()? {
                Value::Segment(s) => self.stack_restore(&s)?,
                v => return Err(mismatch("stack restore", &v)),
            },
            ResetStackPush => {
                let d = self.stack.len();
                if self.ctx.options.checks && self.resets.last().is_some_and(|&m| m > d) {
                    return Err(VmErrorKind::StackProtocol("reset marks must not decrease".into()).into());
                }
                self.resets.push(d);
            }
            ResetStackPop => {
                let m = self
                    .resets
                    .pop()
                    .ok_or_else(|| VmErrorKind::StackProtocol("reset stack underflow".into()))?;
                if self.ctx.options.checks {
                    self.stats.reset_checks += 1;
                    if m != self.stack.len() + 1 {
                        return Err(VmErrorKind::StackProtocol(format!(
                            "reset exit at depth {} but mark is {m}",
                            self.stack.len()
                        ))
                        .into());
                    }
                }
            }
            ResetStackPeek => {
                let m = *self.resets.last().ok_or(VmErrorKind::UncaughtShift)?;
                self.push(Value::Int(m as i64))?;
            }
            MakeContinuation(l) => match self.pop()? {
                Value::Segment(saved) => self.push(Value::Continuation(Arc::new(ContinuationValue { resume: l.0, saved })))?,
                v => return Err(mismatch("continuation capture", &v)),
            },
            CallBuiltin(b, n) => {
                let args = self.pop_n(*n as usize)?;
                return self.builtin(*b, args, span, handler, rng);
            }
            Trap(c) => {
                return Err(VmErrorKind::MatchFailure(module.constants[*c as usize].to_string()).into());
            }
            Halt => {
                let v = self.stack.pop().unwrap_or(Value::Unit);
                if self.ctx.options.checks && (!self.stack.is_empty() || !self.resets.is_empty()) {
                    return Err(VmErrorKind::StackProtocol(format!(
                        "halt with {} stack slots and {} reset marks left",
                        self.stack.len(),
                        self.resets.len()
                    ))
                    .into());
                }
                return Ok(Flow::Stop(Outcome::Done(v)));
            }
        }
        self.stats.max_depth = self.stats.max_depth.max(self.stack.len());
        Ok(Flow::Next)
    }

    fn pop_n(&mut self, n: usize) -> Result<Vec<Value>, VmError> {
        if self.stack.len() < n {
            return Err(VmErrorKind::StackProtocol("operand underflow".into()).into());
        }
        let at = self.stack.len() - n;
        Ok(self.stack.split_off(at))
    }

    fn builtin(
        &mut self,
        b: Builtin,
        mut args: Vec<Value>,
        span: &SourceSpan,
        handler: &mut dyn Handler,
        rng: &mut Rng,
    ) -> Result<Flow, VmError> {
        match b {
            Builtin::SampleImpl => {
                self.stats.samples += 1;
                let k = args.pop().expect("arity");
                let d = match args.pop().expect("arity") {
                    Value::Dist(d) => d,
                    v => return Err(mismatch("sample", &v)),
                };
                match handler.sample(&d, rng)? {
                    Directive::Resume(x) => self.push(Value::tuple(vec![k, x]))?,
                    Directive::Suspend => {
                        return Ok(Flow::Stop(Outcome::Suspended {
                            request: Request::Sample(d),
                            k,
                        }))
                    }
                }
            }
            Builtin::FactorImpl => {
                self.stats.factors += 1;
                let k = args.pop().expect("arity");
                let lp = match args.pop().expect("arity") {
                    Value::Real(r) => r,
                    v => return Err(mismatch("factor", &v)),
                };
                match handler.factor(lp)? {
                    Directive::Resume(_) => self.push(k)?,
                    Directive::Suspend => {
                        return Ok(Flow::Stop(Outcome::Suspended {
                            request: Request::Factor(lp),
                            k,
                        }))
                    }
                }
            }
            Builtin::Importance | Builtin::Mcmc | Builtin::Enumerate => {
                let engine = match b {
                    Builtin::Importance => EngineKind::Importance,
                    Builtin::Mcmc => EngineKind::Mcmc,
                    _ => EngineKind::Enumerate,
                };
                let n = match &args[1] {
                    Value::Int(n) => *n,
                    v => return Err(mismatch("sample count", v)),
                };
                let driver = self
                    .ctx
                    .driver
                    .clone()
                    .ok_or_else(|| VmErrorKind::Engine(format!("`{}` needs an inference driver", b.name())))?;
                let seed = rng.next_u64();
                let post = driver
                    .infer(engine, &self.ctx, &args[0], n, seed)
                    .map_err(|e| e.at(span))?;
                self.push(Value::Dist(DistValue::empirical(post)))?;
            }
            _ => {
                let v = ops::call_pure(b, args, rng)?;
                self.push(v)?;
            }
        }
        Ok(Flow::Next)
    }
}

enum Flow {
    Next,
    Goto(u32),
    Stop(Outcome),
}

fn mismatch(what: &str, v: &Value) -> VmError {
    VmErrorKind::TypeMismatch(format!("{what} applied to a {}", v.type_name())).into()
}

/// Environment value and entry label of something callable.
fn callable(f: &Value) -> Result<(Value, BlockLabel), VmError> {
    match f {
        Value::Closure(c) => Ok((c.env.clone(), BlockLabel(c.entry))),
        Value::Continuation(k) => Ok((Value::Segment(k.saved.clone()), BlockLabel(k.resume))),
        v => Err(mismatch("call", v)),
    }
}

/// Run a module from its entry to `Halt`.
pub fn run(ctx: &VmContext, handler: &mut dyn Handler, rng: &mut Rng) -> Result<Value, VmError> {
    Machine::new(ctx.clone()).run_main(handler, rng)
}

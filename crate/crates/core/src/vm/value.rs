use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::dist::DistValue;

/// Index of a bytecode block.
pub type Label = u32;

#[derive(Debug, Clone)]
pub struct CtorValue {
    pub tag: u32,
    pub name: Arc<str>,
    pub payload: Value,
}

#[derive(Debug, Clone)]
pub struct ClosureValue {
    pub entry: Label,
    /// Captured values, in free-variable order.
    pub env: Value,
}

/// A copied region of the managed stack: `slots.len()` is the size record.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedStack {
    /// Depth at which the region started when it was captured.
    pub base: usize,
    pub slots: Vec<Value>,
}

impl SavedStack {
    pub fn count(&self) -> usize {
        self.slots.len()
    }
}

#[derive(Debug, Clone)]
pub struct ContinuationValue {
    pub resume: Label,
    pub saved: Arc<SavedStack>,
}

#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Unit,
    Str(Arc<str>),
    Vector(Arc<Vec<Value>>),
    Tuple(Arc<Vec<Value>>),
    Constructor(Arc<CtorValue>),
    Closure(Arc<ClosureValue>),
    Continuation(Arc<ContinuationValue>),
    Dist(DistValue),
    /// Return address on the managed stack; `stamp` is the stack depth just
    /// after it was pushed.
    RetAddr(Label, u32),
    /// Saved stack segment, used as a continuation's environment.
    Segment(Arc<SavedStack>),
}

impl Value {
    pub fn tuple(items: Vec<Value>) -> Value {
        Value::Tuple(Arc::new(items))
    }

    pub fn vector(items: Vec<Value>) -> Value {
        Value::Vector(Arc::new(items))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Real(_) => "real",
            Value::Bool(_) => "bool",
            Value::Unit => "unit",
            Value::Str(_) => "string",
            Value::Vector(_) => "vector",
            Value::Tuple(_) => "tuple",
            Value::Constructor(_) => "constructor",
            Value::Closure(_) => "closure",
            Value::Continuation(_) => "continuation",
            Value::Dist(_) => "distribution",
            Value::RetAddr(..) => "return address",
            Value::Segment(_) => "stack segment",
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            _ => None,
        }
    }
}

/// Structural equality; reals compare by bit pattern, functions by identity.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Unit, Value::Unit) => true,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Vector(a), Value::Vector(b)) | (Value::Tuple(a), Value::Tuple(b)) => {
                Arc::ptr_eq(a, b) || a == b
            }
            (Value::Constructor(a), Value::Constructor(b)) => a.tag == b.tag && a.name == b.name && a.payload == b.payload,
            (Value::Closure(a), Value::Closure(b)) => Arc::ptr_eq(a, b),
            (Value::Continuation(a), Value::Continuation(b)) => Arc::ptr_eq(a, b),
            (Value::Dist(a), Value::Dist(b)) => a == b,
            (Value::RetAddr(a, s), Value::RetAddr(b, t)) => a == b && s == t,
            (Value::Segment(a), Value::Segment(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Int(i) => i.hash(state),
            Value::Real(r) => r.to_bits().hash(state),
            Value::Bool(b) => b.hash(state),
            Value::Unit => {}
            Value::Str(s) => s.hash(state),
            Value::Vector(xs) | Value::Tuple(xs) => {
                xs.len().hash(state);
                for x in xs.iter() {
                    x.hash(state);
                }
            }
            Value::Constructor(c) => {
                c.tag.hash(state);
                c.payload.hash(state);
            }
            Value::Closure(c) => (Arc::as_ptr(c) as usize).hash(state),
            Value::Continuation(c) => (Arc::as_ptr(c) as usize).hash(state),
            Value::Dist(d) => d.hash(state),
            Value::RetAddr(l, s) => (l, s).hash(state),
            Value::Segment(s) => s.slots.len().hash(state),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[Value]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("()"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Vector(xs) => {
                f.write_str("[")?;
                write_list(f, xs)?;
                f.write_str("]")
            }
            Value::Tuple(xs) => {
                f.write_str("(")?;
                write_list(f, xs)?;
                f.write_str(")")
            }
            Value::Constructor(c) => match &c.payload {
                Value::Unit => write!(f, "{}", c.name),
                Value::Tuple(xs) => {
                    write!(f, "{}(", c.name)?;
                    write_list(f, xs)?;
                    f.write_str(")")
                }
                p => write!(f, "{}({p})", c.name),
            },
            Value::Closure(c) => write!(f, "<closure L{}>", c.entry),
            Value::Continuation(c) => write!(f, "<continuation L{}>", c.resume),
            Value::Dist(d) => write!(f, "{d}"),
            Value::RetAddr(l, _) => write!(f, "<return L{l}>"),
            Value::Segment(s) => write!(f, "<segment {}>", s.slots.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        let v = Value::vector(vec![Value::Int(1), Value::Real(2.0), Value::Bool(true)]);
        assert_eq!(v.to_string(), "[1, 2.0, true]");
        let nil = Value::Constructor(Arc::new(CtorValue {
            tag: 0,
            name: "Nil".into(),
            payload: Value::Unit,
        }));
        let cons = Value::Constructor(Arc::new(CtorValue {
            tag: 1,
            name: "Cons".into(),
            payload: Value::tuple(vec![Value::Int(1), nil]),
        }));
        assert_eq!(cons.to_string(), "Cons(1, Nil)");
    }

    #[test]
    fn reals_compare_by_bits() {
        assert_ne!(Value::Real(0.0), Value::Real(-0.0));
        assert_eq!(Value::Real(f64::NAN), Value::Real(f64::NAN));
    }
}

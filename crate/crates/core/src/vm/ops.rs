//! Primitive operators and the non-control builtins.

use std::sync::Arc;

use crate::builtins::Builtin;
use crate::frontend::ast::{BinOp, UnOp};

use super::dist::DistValue;
use super::error::VmErrorKind;
use super::rng::Rng;
use super::value::Value;

fn mismatch(what: &str, v: &Value) -> VmErrorKind {
    VmErrorKind::TypeMismatch(format!("{what} expects {}", v.type_name()))
}

pub fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, VmErrorKind> {
    use Value::{Bool, Int, Real};
    Ok(match (op, &a, &b) {
        (BinOp::Eq, _, _) => Bool(a == b),
        (BinOp::Ne, _, _) => Bool(a != b),
        (BinOp::Add, Int(x), Int(y)) => Int(x.wrapping_add(*y)),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.wrapping_sub(*y)),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.wrapping_mul(*y)),
        (BinOp::Div | BinOp::Mod, Int(_), Int(0)) => return Err(VmErrorKind::DivisionByZero),
        (BinOp::Div, Int(x), Int(y)) => Int(x.wrapping_div(*y)),
        (BinOp::Mod, Int(x), Int(y)) => Int(x.wrapping_rem(*y)),
        (BinOp::Add, Real(x), Real(y)) => Real(x + y),
        (BinOp::Sub, Real(x), Real(y)) => Real(x - y),
        (BinOp::Mul, Real(x), Real(y)) => Real(x * y),
        (BinOp::Div, Real(x), Real(y)) => Real(x / y),
        (BinOp::Lt, Int(x), Int(y)) => Bool(x < y),
        (BinOp::Le, Int(x), Int(y)) => Bool(x <= y),
        (BinOp::Gt, Int(x), Int(y)) => Bool(x > y),
        (BinOp::Ge, Int(x), Int(y)) => Bool(x >= y),
        (BinOp::Lt, Real(x), Real(y)) => Bool(x < y),
        (BinOp::Le, Real(x), Real(y)) => Bool(x <= y),
        (BinOp::Gt, Real(x), Real(y)) => Bool(x > y),
        (BinOp::Ge, Real(x), Real(y)) => Bool(x >= y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(*x && *y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(*x || *y),
        _ => {
            return Err(VmErrorKind::TypeMismatch(format!(
                "operator {} applied to {} and {}",
                op.symbol(),
                a.type_name(),
                b.type_name()
            )))
        }
    })
}

pub fn unary(op: UnOp, a: Value) -> Result<Value, VmErrorKind> {
    Ok(match (op, &a) {
        (UnOp::Neg, Value::Int(x)) => Value::Int(x.wrapping_neg()),
        (UnOp::Neg, Value::Real(x)) => Value::Real(-x),
        (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
        _ => return Err(mismatch("unary operator", &a)),
    })
}

fn real(v: &Value) -> Result<f64, VmErrorKind> {
    match v {
        Value::Real(r) => Ok(*r),
        _ => Err(mismatch("real argument", v)),
    }
}

fn int(v: &Value) -> Result<i64, VmErrorKind> {
    match v {
        Value::Int(i) => Ok(*i),
        _ => Err(mismatch("int argument", v)),
    }
}

fn dist(v: &Value) -> Result<DistValue, VmErrorKind> {
    match v {
        Value::Dist(d) => Ok(*d),
        _ => Err(mismatch("distribution argument", v)),
    }
}

fn vector(v: Value) -> Result<Arc<Vec<Value>>, VmErrorKind> {
    match v {
        Value::Vector(xs) => Ok(xs),
        other => Err(mismatch("vector argument", &other)),
    }
}

/// Builtins that need no handler, driver or control transfer.
pub fn call_pure(b: Builtin, mut args: Vec<Value>, rng: &mut Rng) -> Result<Value, VmErrorKind> {
    let a = |i: usize| &args[i];
    Ok(match b {
        Builtin::Normal => Value::Dist(DistValue::normal(real(a(0))?, real(a(1))?)?),
        Builtin::Bernoulli => Value::Dist(DistValue::bernoulli(real(a(0))?)?),
        Builtin::Poisson => Value::Dist(DistValue::poisson(real(a(0))?)?),
        Builtin::UniformDiscrete => Value::Dist(DistValue::uniform_discrete(int(a(0))?, int(a(1))?)?),
        Builtin::UniformContinuous => Value::Dist(DistValue::uniform_continuous(real(a(0))?, real(a(1))?)?),
        Builtin::Beta => Value::Dist(DistValue::beta(real(a(0))?, real(a(1))?)?),
        Builtin::Exponential => Value::Dist(DistValue::exponential(real(a(0))?)?),
        Builtin::SampleStar => dist(a(0))?.sample(rng)?,
        Builtin::DistScore => Value::Real(dist(a(0))?.score(a(1))?),
        Builtin::DistVar => Value::Real(dist(a(0))?.variance()?),
        Builtin::DistMean => Value::Real(dist(a(0))?.mean()?),
        Builtin::Length => match a(0) {
            Value::Vector(xs) => Value::Int(xs.len() as i64),
            v => return Err(mismatch("length", v)),
        },
        Builtin::Push => {
            let x = args.pop().expect("push arity");
            let mut v = vector(args.pop().expect("push arity"))?;
            Arc::make_mut(&mut v).push(x);
            Value::Vector(v)
        }
        Builtin::Concat => {
            let rhs = vector(args.pop().expect("concat arity"))?;
            let mut lhs = vector(args.pop().expect("concat arity"))?;
            Arc::make_mut(&mut lhs).extend(rhs.iter().cloned());
            Value::Vector(lhs)
        }
        Builtin::ToReal => Value::Real(int(a(0))? as f64),
        Builtin::Floor => Value::Int(real(a(0))?.floor() as i64),
        Builtin::Exp => Value::Real(real(a(0))?.exp()),
        Builtin::Log => Value::Real(real(a(0))?.ln()),
        Builtin::Sqrt => Value::Real(real(a(0))?.sqrt()),
        Builtin::Abs => match a(0) {
            Value::Int(i) => Value::Int(i.wrapping_abs()),
            Value::Real(r) => Value::Real(r.abs()),
            v => return Err(mismatch("abs", v)),
        },
        Builtin::Pow => Value::Real(real(a(0))?.powf(real(a(1))?)),
        Builtin::SampleImpl
        | Builtin::FactorImpl
        | Builtin::Importance
        | Builtin::Mcmc
        | Builtin::Enumerate
        | Builtin::Map
        | Builtin::Repeat
        | Builtin::Reduce
        | Builtin::Filter => {
            return Err(VmErrorKind::Undefined(format!("`{}` is not a primitive", b.name())));
        }
    })
}

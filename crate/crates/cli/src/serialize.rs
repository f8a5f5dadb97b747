//! Posterior text formats.
//!
//! TSV rows are `value<TAB>probability`, most probable first, ties broken by
//! the value's text. JSON is `{"support":[{"value":..,"prob":..}],"log_z":..}`
//! in the same row order. Values map to JSON as follows: int and real to
//! numbers (reals always carry a fraction or exponent), bool to a boolean,
//! unit to `null`, strings to strings, vectors to arrays, tuples to
//! `{"tuple":[..]}`, constructors to `{"ctor":name,"tag":n,"payload":..}`.
//! Non-finite reals become `{"real":"inf"}` and friends. Functions,
//! continuations and distributions are written as `{"opaque":text}` and do
//! not round-trip.

use std::sync::Arc;

use cup_core::vm::{CtorValue, EmpiricalDistribution, Value};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Number};

use crate::config::Format;

/// A parsed posterior, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub support: Vec<(Value, f64)>,
    pub log_z: Option<f64>,
}

impl Posterior {
    pub fn prob(&self, v: &Value) -> f64 {
        self.support.iter().filter(|(x, _)| x == v).map(|(_, p)| p).sum()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON posterior: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed value: {0}")]
    Value(String),
    #[error("line {line}: {message}")]
    Tsv { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    value: serde_json::Value,
    prob: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonPosterior {
    support: Vec<JsonRow>,
    log_z: Option<f64>,
}

/// Rows in output order.
pub fn ordered_rows(d: &EmpiricalDistribution) -> Vec<(String, &Value, f64)> {
    let mut rows: Vec<(String, &Value, f64)> = d.support.iter().map(|(v, p)| (v.to_string(), v, *p)).collect();
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    rows
}

pub fn serialize_posterior(d: &EmpiricalDistribution, format: Format) -> String {
    assert!(!d.support.is_empty(), "posterior with empty support");
    let rows = ordered_rows(d);
    match format {
        Format::Tsv => {
            let mut out = String::new();
            for (text, _, p) in rows {
                out.push_str(&text);
                out.push('\t');
                out.push_str(&p.to_string());
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let doc = JsonPosterior {
                support: rows
                    .into_iter()
                    .map(|(_, v, p)| JsonRow {
                        value: value_to_json(v),
                        prob: p,
                    })
                    .collect(),
                log_z: d.log_z.filter(|z| z.is_finite()),
            };
            let mut s = serde_json::to_string(&doc).expect("posterior serializes");
            s.push('\n');
            s
        }
    }
}

pub fn value_to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Int(i) => json!(i),
        Value::Real(r) => match Number::from_f64(*r) {
            Some(n) => serde_json::Value::Number(n),
            None => json!({ "real": r.to_string() }),
        },
        Value::Bool(b) => json!(b),
        Value::Unit => serde_json::Value::Null,
        Value::Str(s) => json!(s.as_ref()),
        Value::Vector(xs) => serde_json::Value::Array(xs.iter().map(value_to_json).collect()),
        Value::Tuple(xs) => json!({ "tuple": xs.iter().map(value_to_json).collect::<Vec<_>>() }),
        Value::Constructor(c) => json!({ "ctor": c.name.as_ref(), "tag": c.tag, "payload": value_to_json(&c.payload) }),
        other => json!({ "opaque": other.to_string() }),
    }
}

pub fn value_from_json(j: &serde_json::Value) -> Result<Value, ParseError> {
    let bad = || ParseError::Value(j.to_string());
    Ok(match j {
        serde_json::Value::Null => Value::Unit,
        serde_json::Value::Bool(b) => Value::Bool(*b),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) if !n.is_f64() => Value::Int(i),
            _ => Value::Real(n.as_f64().ok_or_else(bad)?),
        },
        serde_json::Value::String(s) => Value::Str(Arc::from(s.as_str())),
        serde_json::Value::Array(xs) => Value::vector(xs.iter().map(value_from_json).collect::<Result<_, _>>()?),
        serde_json::Value::Object(m) => object_value(m).ok_or_else(bad)??,
    })
}

fn object_value(m: &Map<String, serde_json::Value>) -> Option<Result<Value, ParseError>> {
    if let Some(serde_json::Value::Array(xs)) = m.get("tuple") {
        return Some(xs.iter().map(value_from_json).collect::<Result<_, _>>().map(Value::tuple));
    }
    if let Some(serde_json::Value::String(r)) = m.get("real") {
        return r.parse::<f64>().ok().map(|r| Ok(Value::Real(r)));
    }
    if let Some(serde_json::Value::String(s)) = m.get("opaque") {
        return Some(Ok(Value::Str(Arc::from(s.as_str()))));
    }
    let name = m.get("ctor")?.as_str()?;
    let tag = u32::try_from(m.get("tag")?.as_u64()?).ok()?;
    let payload = m.get("payload")?;
    Some(value_from_json(payload).map(|payload| {
        Value::Constructor(Arc::new(CtorValue {
            tag,
            name: Arc::from(name),
            payload,
        }))
    }))
}

pub fn parse_json(text: &str) -> Result<Posterior, ParseError> {
    let doc: JsonPosterior = serde_json::from_str(text)?;
    let support = doc
        .support
        .iter()
        .map(|r| Ok((value_from_json(&r.value)?, r.prob)))
        .collect::<Result<_, ParseError>>()?;
    Ok(Posterior {
        support,
        log_z: doc.log_z,
    })
}

/// Scalar values only: int, real, bool and unit. Anything else is kept as
/// its text.
pub fn parse_tsv(text: &str) -> Result<Posterior, ParseError> {
    let mut support = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let (v, p) = line.rsplit_once('\t').ok_or_else(|| ParseError::Tsv {
            line: i + 1,
            message: "expected value TAB probability".into(),
        })?;
        let p: f64 = p.parse().map_err(|_| ParseError::Tsv {
            line: i + 1,
            message: format!("bad probability `{p}`"),
        })?;
        support.push((scalar(v), p));
    }
    Ok(Posterior { support, log_z: None })
}

fn scalar(text: &str) -> Value {
    match text {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        "()" => Value::Unit,
        _ => {
            if let Ok(i) = text.parse::<i64>() {
                Value::Int(i)
            } else if let Ok(r) = text.parse::<f64>() {
                Value::Real(r)
            } else {
                Value::Str(Arc::from(text))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(rows: Vec<(Value, f64)>) -> EmpiricalDistribution {
        EmpiricalDistribution::new(rows, Some(-0.5))
    }

    #[test]
    fn tsv_orders_by_probability_then_text() {
        let d = dist(vec![
            (Value::Bool(false), 0.25),
            (Value::Bool(true), 0.5),
            (Value::Int(3), 0.25),
        ]);
        assert_eq!(serialize_posterior(&d, Format::Tsv), "true\t0.5\n3\t0.25\nfalse\t0.25\n");
    }

    #[test]
    fn json_layout() {
        let d = EmpiricalDistribution::new(vec![(Value::Int(2), 0.5), (Value::Int(1), 0.5)], Some(0.0));
        assert_eq!(
            serialize_posterior(&d, Format::Json),
            "{\"support\":[{\"value\":1,\"prob\":0.5},{\"value\":2,\"prob\":0.5}],\"log_z\":0.0}\n"
        );
    }

    #[test]
    fn json_round_trips_structured_values() {
        let ctor = Value::Constructor(Arc::new(CtorValue {
            tag: 1,
            name: Arc::from("Cons"),
            payload: Value::tuple(vec![Value::Int(1), Value::Unit]),
        }));
        let rows = vec![
            (Value::vector(vec![Value::Real(1.0), Value::Real(-2.5e-7)]), 0.1),
            (Value::tuple(vec![Value::Bool(true), Value::Int(-4)]), 0.2),
            (ctor, 0.3),
            (Value::Real(f64::INFINITY), 0.15),
            (Value::Str(Arc::from("x\ty")), 0.25),
        ];
        let d = dist(rows);
        let back = parse_json(&serialize_posterior(&d, Format::Json)).unwrap();
        assert_eq!(back.log_z, Some(-0.5));
        assert_eq!(back.support.len(), d.support.len());
        for (v, p) in &d.support {
            assert_eq!(back.prob(v), *p, "{v}");
        }
    }

    #[test]
    fn tsv_round_trips_scalars() {
        let d = dist(vec![(Value::Int(0), 0.5), (Value::Real(0.125), 0.375), (Value::Bool(true), 0.125)]);
        let back = parse_tsv(&serialize_posterior(&d, Format::Tsv)).unwrap();
        for (v, p) in &d.support {
            assert_eq!(back.prob(v), *p);
        }
    }

    #[test]
    #[should_panic(expected = "empty support")]
    fn empty_support_asserts() {
        serialize_posterior(&EmpiricalDistribution::new(vec![], None), Format::Tsv);
    }
}

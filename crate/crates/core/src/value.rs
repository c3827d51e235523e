//! Concrete values of composite types and their variant decomposition.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::types::{CompositeType, OpaqueTypeId};

/// A concrete value. Opaque payloads are small integers; their meaning is
/// owned by the interpretation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    Opaque { ty: OpaqueTypeId, payload: i64 },
    Unit,
    Pair(Box<Value>, Box<Value>),
    InL(Box<Value>),
    InR(Box<Value>),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ValueError {
    #[error("value {value} does not have type {ty}")]
    TypeMismatch { value: String, ty: String },
    #[error("variant {index} out of range for type {ty}")]
    BadVariant { index: usize, ty: String },
    #[error("component list of length {got} does not fit variant of length {want}")]
    BadComponents { got: usize, want: usize },
    #[error("cannot read literal for type {ty}: {reason}")]
    Literal { ty: String, reason: String },
}

impl Value {
    pub fn opaque(ty: impl Into<String>, payload: i64) -> Value {
        Value::Opaque {
            ty: OpaqueTypeId::new(ty),
            payload,
        }
    }

    pub fn pair(l: Value, r: Value) -> Value {
        Value::Pair(Box::new(l), Box::new(r))
    }

    pub fn inl(v: Value) -> Value {
        Value::InL(Box::new(v))
    }

    pub fn inr(v: Value) -> Value {
        Value::InR(Box::new(v))
    }

    pub fn has_type(&self, t: &CompositeType) -> bool {
        match (self, t) {
            (Value::Opaque { ty, .. }, CompositeType::Opaque(id)) => ty == id,
            (Value::Unit, CompositeType::One) => true,
            (Value::Pair(a, b), CompositeType::Product(l, r)) => a.has_type(l) && b.has_type(r),
            (Value::InL(a), CompositeType::Coproduct(l, _)) => a.has_type(l),
            (Value::InR(b), CompositeType::Coproduct(_, r)) => b.has_type(r),
            _ => false,
        }
    }

    /// Split a value into its variant index and opaque components.
    pub fn decompose(&self, t: &CompositeType) -> Result<(usize, Vec<Value>), ValueError> {
        let mut comps = Vec::new();
        let idx = decompose_into(self, t, &mut comps)?;
        Ok((idx, comps))
    }

    /// Inverse of [`Value::decompose`].
    pub fn compose(t: &CompositeType, variant: usize, components: &[Value]) -> Result<Value, ValueError> {
        let mut rest = components;
        let v = compose_from(t, variant, &mut rest)?;
        if !rest.is_empty() {
            return Err(ValueError::BadComponents {
                got: components.len(),
                want: components.len() - rest.len(),
            });
        }
        Ok(v)
    }

    /// JSON literal: integers for opaque payloads, `null` for the unit,
    /// two-element arrays for pairs, `{"inl": v}` / `{"inr": v}` for sums.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Opaque { payload, .. } => json!(payload),
            Value::Unit => serde_json::Value::Null,
            Value::Pair(a, b) => json!([a.to_json(), b.to_json()]),
            Value::InL(a) => json!({ "inl": a.to_json() }),
            Value::InR(b) => json!({ "inr": b.to_json() }),
        }
    }

    /// Read a JSON literal at a known type.
    pub fn from_json(t: &CompositeType, j: &serde_json::Value) -> Result<Value, ValueError> {
        let bad = |reason: &str| ValueError::Literal {
            ty: t.to_string(),
            reason: reason.to_string(),
        };
        match t {
            CompositeType::Opaque(id) => j
                .as_i64()
                .map(|payload| Value::Opaque {
                    ty: id.clone(),
                    payload,
                })
                .ok_or_else(|| bad("expected an integer payload")),
            CompositeType::One => match j {
                serde_json::Value::Null => Ok(Value::Unit),
                serde_json::Value::String(s) if s == "*" => Ok(Value::Unit),
                _ => Err(bad("expected null")),
            },
            CompositeType::Product(l, r) => match j.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok(Value::pair(Value::from_json(l, a)?, Value::from_json(r, b)?)),
                _ => Err(bad("expected a two-element array")),
            },
            CompositeType::Coproduct(l, r) => {
                let obj = j
                    .as_object()
                    .ok_or_else(|| bad("expected {\"inl\": ..} or {\"inr\": ..}"))?;
                match (obj.get("inl"), obj.get("inr"), obj.len()) {
                    (Some(a), None, 1) => Ok(Value::inl(Value::from_json(l, a)?)),
                    (None, Some(b), 1) => Ok(Value::inr(Value::from_json(r, b)?)),
                    _ => Err(bad("expected exactly one of inl / inr")),
                }
            }
        }
    }
}

fn decompose_into(v: &Value, t: &CompositeType, out: &mut Vec<Value>) -> Result<usize, ValueError> {
    let mismatch = || ValueError::TypeMismatch {
        value: v.to_string(),
        ty: t.to_string(),
    };
    match (v, t) {
        (Value::Opaque { ty, .. }, CompositeType::Opaque(id)) if ty == id => {
            out.push(v.clone());
            Ok(0)
        }
        (Value::Unit, CompositeType::One) => Ok(0),
        (Value::Pair(a, b), CompositeType::Product(l, r)) => {
            let i = decompose_into(a, l, out)?;
            let j = decompose_into(b, r, out)?;
            Ok(i * r.variant_count() + j)
        }
        (Value::InL(a), CompositeType::Coproduct(l, _)) => decompose_into(a, l, out),
        (Value::InR(b), CompositeType::Coproduct(l, r)) => Ok(l.variant_count() + decompose_into(b, r, out)?),
        _ => Err(mismatch()),
    }
}

fn compose_from(t: &CompositeType, variant: usize, rest: &mut &[Value]) -> Result<Value, ValueError> {
    if variant >= t.variant_count() {
        return Err(ValueError::BadVariant {
            index: variant,
            ty: t.to_string(),
        });
    }
    match t {
        CompositeType::Opaque(id) => match rest.split_first() {
            Some((v @ Value::Opaque { ty, .. }, tail)) if ty == id => {
                *rest = tail;
                Ok(v.clone())
            }
            Some((v, _)) => Err(ValueError::TypeMismatch {
                value: v.to_string(),
                ty: t.to_string(),
            }),
            None => Err(ValueError::BadComponents { got: 0, want: 1 }),
        },
        CompositeType::One => Ok(Value::Unit),
        CompositeType::Product(l, r) => {
            let rc = r.variant_count();
            let a = compose_from(l, variant / rc, rest)?;
            let b = compose_from(r, variant % rc, rest)?;
            Ok(Value::pair(a, b))
        }
        CompositeType::Coproduct(l, r) => {
            let lc = l.variant_count();
            if variant < lc {
                Ok(Value::inl(compose_from(l, variant, rest)?))
            } else {
                Ok(Value::inr(compose_from(r, variant - lc, rest)?))
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Opaque { ty, payload } => write!(f, "{ty}#{payload}"),
            Value::Unit => f.write_str("*"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::InL(a) => write!(f, "inl {a}"),
            Value::InR(b) => write!(f, "inr {b}"),
        }
    }
}

/// Every value of `t` whose opaque payloads are drawn from `domain(ty)`.
pub fn enumerate_values<'a>(t: &CompositeType, domain: &dyn Fn(&OpaqueTypeId) -> &'a [i64]) -> Vec<Value> {
    match t {
        CompositeType::Opaque(id) => domain(id)
            .iter()
            .map(|&payload| Value::Opaque {
                ty: id.clone(),
                payload,
            })
            .collect(),
        CompositeType::One => vec![Value::Unit],
        CompositeType::Product(l, r) => {
            let ls = enumerate_values(l, domain);
            let rs = enumerate_values(r, domain);
            let mut out = Vec::with_capacity(ls.len() * rs.len());
            for a in &ls {
                for b in &rs {
                    out.push(Value::pair(a.clone(), b.clone()));
                }
            }
            out
        }
        CompositeType::Coproduct(l, r) => {
            let mut out: Vec<Value> = enumerate_values(l, domain).into_iter().map(Value::inl).collect();
            out.extend(enumerate_values(r, domain).into_iter().map(Value::inr));
            out
        }
    }
}

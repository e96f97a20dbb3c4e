//! JSON renderings of core types. Rationals are integers when integral and
//! `"p/q"` strings otherwise, matching the model file format.

use affine_core::counters::JumpCounter;
use affine_core::rational::{as_integer, format_rational};
use affine_core::{AffineFunctional, AffineMap, Rational};
use num_complex::Complex64;
use serde_json::{json, Value};

pub fn rational(value: &Rational) -> Value {
    match as_integer(value) {
        Some(n) => json!(n),
        None => json!(format_rational(value)),
    }
}

pub fn rationals(values: &[Rational]) -> Value {
    Value::Array(values.iter().map(rational).collect())
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn complexes(values: &[Complex64]) -> Value {
    Value::Array(values.iter().copied().map(complex).collect())
}

pub fn functional(f: &AffineFunctional) -> Value {
    json!({
        "linear": rationals(&f.linear),
        "offset": rational(&f.offset),
        "formula": f.to_string(),
    })
}

pub fn map(m: &AffineMap) -> Value {
    json!({
        "matrix": m.matrix.iter().map(|row| rationals(row)).collect::<Vec<_>>(),
        "offset": rationals(&m.offset),
    })
}

pub fn counter(c: &JumpCounter) -> Value {
    json!({ "jump": c.jump, "counter": functional(&c.functional) })
}

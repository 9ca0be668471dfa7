//! Encoding of exact values in certificates, and the matching decoders used
//! by re-verification.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, Rational};
use crate::fuchsian::{Letter, RealQuadElem};
use crate::matrix::Mat2;
use crate::quatalg::{Quaternion, QuaternionAlgebra};

pub fn rational(x: &Rational) -> Value {
    json!(format_rational(x))
}

pub fn matrix(m: &Mat2<Rational>) -> Value {
    json!([[rational(&m.a), rational(&m.b)], [rational(&m.c), rational(&m.d)]])
}

pub fn quaternion(q: &Quaternion) -> Value {
    Value::Array(q.coords().iter().map(rational).collect())
}

pub fn real_quad(x: &RealQuadElem) -> Value {
    json!({ "u": rational(x.u()), "v": rational(x.v()), "d": rational(x.d()) })
}

pub fn letters(word: &[Letter]) -> Value {
    Value::Array(word.iter().map(|l| json!([l.generator, l.inverse])).collect())
}

fn bad(what: &str) -> Error {
    Error::Verification(format!("malformed witness field {what}"))
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(key))
}

pub fn get_rational(v: &Value, key: &str) -> Result<Rational> {
    parse_rational(field(v, key)?.as_str().ok_or_else(|| bad(key))?)
}

pub fn get_i64(v: &Value, key: &str) -> Result<i64> {
    field(v, key)?.as_i64().ok_or_else(|| bad(key))
}

pub fn get_u64(v: &Value, key: &str) -> Result<u64> {
    field(v, key)?.as_u64().ok_or_else(|| bad(key))
}

pub fn get_array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    field(v, key)?.as_array().ok_or_else(|| bad(key))
}

fn rational_of(v: &Value) -> Result<Rational> {
    parse_rational(v.as_str().ok_or_else(|| bad("rational"))?)
}

pub fn to_quaternion(algebra: &QuaternionAlgebra, v: &Value) -> Result<Quaternion> {
    let xs = v.as_array().filter(|xs| xs.len() == 4).ok_or_else(|| bad("quaternion"))?;
    let c: Vec<Rational> = xs.iter().map(rational_of).collect::<Result<_>>()?;
    Ok(algebra.element([c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()]))
}

pub fn to_matrix(v: &Value) -> Result<Mat2<Rational>> {
    let rows = v.as_array().filter(|r| r.len() == 2).ok_or_else(|| bad("matrix"))?;
    let mut e = Vec::new();
    for r in rows {
        let r = r.as_array().filter(|r| r.len() == 2).ok_or_else(|| bad("matrix row"))?;
        for x in r {
            e.push(rational_of(x)?);
        }
    }
    Ok(Mat2::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()))
}

pub fn to_letters(v: &Value) -> Result<Vec<Letter>> {
    let xs = v.as_array().ok_or_else(|| bad("word"))?;
    xs.iter()
        .map(|l| {
            let generator = l.get(0).and_then(Value::as_u64).ok_or_else(|| bad("letter"))? as usize;
            let inverse = l.get(1).and_then(Value::as_bool).ok_or_else(|| bad("letter"))?;
            Ok(Letter { generator, inverse })
        })
        .collect()
}

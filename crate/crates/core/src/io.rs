//! Polynomial files and point strings.
//!
//! A polynomial file holds one JSON object, either
//! `{"n": 2, "terms": [{"exp": [2, 1], "coef": 1}, ...]}` or the canonical
//! form `{"H": [...], "Q": [...], "b": [...], "c": 0}`. Coefficients are
//! numbers or strings such as `"-3/4"`; both are read exactly.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::coeff::{parse_rational, Coeff};
use crate::error::{Error, Result};
use crate::poly::{CubicPolynomial, MonomialMap, RationalCubic};
use crate::sparse::SparsePolynomial;

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidPolynomial(msg.into())
}

fn scalar(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(num) => parse_rational(&num.to_string()),
        Value::String(s) => parse_rational(s),
        _ => Err(bad(format!("expected a number or rational string, found {v}"))),
    }
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(format!("{what} must be an array")))
}

fn vector(v: &Value, what: &str) -> Result<Vec<BigRational>> {
    array(v, what)?.iter().map(scalar).collect()
}

fn matrix(v: &Value, n: usize, what: &str) -> Result<DMatrix<BigRational>> {
    let rows = array(v, what)?;
    if rows.len() != n {
        return Err(bad(format!("{what} must have {n} rows")));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = vector(row, what)?;
        if row.len() != n {
            return Err(bad(format!("{what} row {i} must have {n} entries")));
        }
        for (j, x) in row.into_iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    Ok(m)
}

/// Monomial terms of a file in the `terms` form, of any degree.
pub fn read_terms(v: &Value) -> Result<(usize, MonomialMap<BigRational>)> {
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("\"n\" must be a positive integer"))? as usize;
    if n == 0 {
        return Err(bad("\"n\" must be positive"));
    }
    let mut map = MonomialMap::new();
    for t in array(v.get("terms").unwrap_or(&Value::Null), "\"terms\"")? {
        let exp: Vec<u32> = array(t.get("exp").unwrap_or(&Value::Null), "\"exp\"")?
            .iter()
            .map(|e| e.as_u64().map(|e| e as u32).ok_or_else(|| bad("exponents must be nonnegative integers")))
            .collect::<Result<_>>()?;
        if exp.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: exp.len(),
            });
        }
        let c = scalar(t.get("coef").ok_or_else(|| bad("term without \"coef\""))?)?;
        let entry = map.entry(exp).or_insert_with(BigRational::zero);
        *entry += c;
    }
    map.retain(|_, c| !c.is_zero());
    Ok((n, map))
}

/// Parses a cubic polynomial file exactly.
pub fn parse_polynomial_exact(text: &str) -> Result<RationalCubic> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("terms").is_some() {
        let (n, map) = read_terms(&v)?;
        return RationalCubic::from_monomials(n, &map);
    }
    let q = v.get("Q").ok_or_else(|| bad("expected \"terms\" or the canonical keys H, Q, b"))?;
    let n = array(q, "\"Q\"")?.len();
    if n == 0 {
        return Err(bad("\"Q\" must be nonempty"));
    }
    let h = match v.get("H") {
        Some(h) => {
            let slices = array(h, "\"H\"")?;
            if slices.len() != n {
                return Err(bad(format!("\"H\" must hold {n} matrices")));
            }
            slices.iter().map(|s| matrix(s, n, "\"H\" slice")).collect::<Result<Vec<_>>>()?
        }
        None => vec![DMatrix::zeros(n, n); n],
    };
    let b = match v.get("b") {
        Some(b) => vector(b, "\"b\"")?,
        None => vec![BigRational::zero(); n],
    };
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let c = v.get("c").map(scalar).transpose()?.unwrap_or_else(BigRational::zero);
    RationalCubic::from_parts(h, matrix(q, n, "\"Q\"")?, DVector::from_vec(b), c)
}

/// Parses a cubic polynomial file; returns the float polynomial and its exact
/// counterpart.
pub fn parse_polynomial(text: &str) -> Result<(CubicPolynomial, RationalCubic)> {
    let exact = parse_polynomial_exact(text)?;
    Ok((exact.to_f64(), exact))
}

/// Terms-form JSON of a float polynomial of any degree.
pub fn sparse_to_json(p: &SparsePolynomial) -> Value {
    let terms: Vec<Value> = p.terms().iter().map(|(e, c)| json!({"exp": e, "coef": c})).collect();
    json!({"n": p.n(), "terms": terms})
}

pub fn cubic_to_json<T: Coeff + ToString>(p: &CubicPolynomial<T>) -> Value {
    let terms: Vec<Value> = p
        .to_monomials()
        .iter()
        .map(|(e, c)| {
            let f = c.to_f64();
            let coef = if T::from_f64(f).as_ref() == Some(c) { json!(f) } else { json!(c.to_string()) };
            json!({"exp": e, "coef": coef})
        })
        .collect();
    json!({"n": p.n(), "terms": terms})
}

/// Comma-separated coordinates, each a decimal or `p/q`.
pub fn parse_point_exact(s: &str) -> Result<Vec<BigRational>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidInput("empty point".into()));
    }
    s.split(',').map(parse_rational).collect()
}

pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    Ok(parse_point_exact(s)?.iter().map(Coeff::to_f64).collect())
}

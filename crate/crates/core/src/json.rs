//! Versioned JSON forms of kernels, symbols and evaluation points.
//!
//! Complex numbers are `[re, im]`; matrices are row-major lists of rows.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fock_oracle::PointPair;
use crate::kernel::{KernelExpr, KernelKind};
use crate::model_operators::Symbol;
use crate::poly::{CMatrix, Dims, Monomial, Poly, VarId, C64};

pub const KEXPR_SCHEMA: &str = "kexpr/1";
pub const SYMBOL_SCHEMA: &str = "symbol/1";
pub const POINTS_SCHEMA: &str = "points/1";

pub fn complex_to_json(c: C64) -> Value {
    json!([c.re, c.im])
}

pub fn complex_from_json(v: &Value) -> Result<C64> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(Error::Format(format!("complex entries must be numbers, got {v}"))),
        },
        _ => Err(Error::Format(format!("expected [re, im], got {v}"))),
    }
}

pub fn vector_to_json(z: &[C64]) -> Value {
    Value::Array(z.iter().map(|&c| complex_to_json(c)).collect())
}

pub fn vector_from_json(v: &Value) -> Result<Vec<C64>> {
    v.as_array()
        .ok_or_else(|| Error::Format(format!("expected a list of complex numbers, got {v}")))?
        .iter()
        .map(complex_from_json)
        .collect()
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Square matrix from rows.
pub fn matrix_from_json(v: &Value) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Format(format!("expected a list of rows, got {v}")))?;
    let r = rows.len();
    if r == 0 {
        return Err(Error::Format("empty matrix".into()));
    }
    let mut m = CMatrix::zeros(r, r);
    for (i, row) in rows.iter().enumerate() {
        let row = vector_from_json(row)?;
        if row.len() != r {
            return Err(Error::Format(format!("matrix row {i} has {} entries, expected {r}", row.len())));
        }
        for (j, c) in row.into_iter().enumerate() {
            m[(i, j)] = c;
        }
    }
    Ok(m)
}

/// `#[serde(with = "cmatrix")]` adapter.
pub mod cmatrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let v = Value::deserialize(d)?;
        matrix_from_json(&v).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "cvector")]` adapter.
pub mod cvector {
    use super::*;

    pub fn serialize<S: Serializer>(z: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_json(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        let v = Value::deserialize(d)?;
        vector_from_json(&v).map_err(D::Error::custom)
    }
}

fn check_schema(v: &Value, want: &str) -> Result<()> {
    match v.get("schema") {
        None => Ok(()),
        Some(Value::String(s)) if s == want => Ok(()),
        Some(other) => Err(Error::Format(format!("schema {other} does not match {want:?}"))),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Format(format!("missing field {key:?}")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Format(format!("field {key:?} must be a non-negative integer")))
}

fn u32_list(v: &Value, key: &str) -> Result<Vec<u32>> {
    field(v, key)?
        .as_array()
        .ok_or_else(|| Error::Format(format!("field {key:?} must be a list")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::Format(format!("bad exponent {x} in {key:?}")))
        })
        .collect()
}

fn checked_coef(v: &Value, r: usize) -> Result<CMatrix> {
    let c = matrix_from_json(v)?;
    if c.nrows() != r {
        return Err(Error::FiberRankMismatch { left: r, right: c.nrows() });
    }
    Ok(c)
}

pub fn kernel_to_json(e: &KernelExpr) -> Value {
    let k = e.kind();
    let terms: Vec<Value> = e
        .numerator()
        .terms()
        .map(|(mono, c)| {
            let mut exps = Map::new();
            for &(v, p) in mono.exps() {
                exps.insert(v.to_string(), json!(p));
            }
            json!({"exps": exps, "coef": matrix_to_json(c)})
        })
        .collect();
    json!({
        "schema": KEXPR_SCHEMA,
        "kind": k.name(),
        "n": k.n(),
        "m": k.m(),
        "fiber_rank": e.fiber_rank(),
        "terms": terms,
    })
}

/// Parses a kernel; `degree_cap` overrides the default polynomial cap.
pub fn kernel_from_json(v: &Value, degree_cap: Option<u32>) -> Result<KernelExpr> {
    check_schema(v, KEXPR_SCHEMA)?;
    let name = field(v, "kind")?
        .as_str()
        .ok_or_else(|| Error::Format("field \"kind\" must be a string".into()))?;
    let n = usize_field(v, "n")?;
    let m = match v.get("m") {
        Some(_) => usize_field(v, "m")?,
        None => n,
    };
    let kind = KernelKind::from_name(name, n, m)?;
    let r = usize_field(v, "fiber_rank")?;
    let dims = Dims::new(kind.n(), kind.m(), r)?;
    let mut terms = Vec::new();
    for t in field(v, "terms")?
        .as_array()
        .ok_or_else(|| Error::Format("field \"terms\" must be a list".into()))?
    {
        let exps = field(t, "exps")?
            .as_object()
            .ok_or_else(|| Error::Format("field \"exps\" must be an object".into()))?;
        let mut list = Vec::new();
        for (name, p) in exps {
            let p = p
                .as_u64()
                .and_then(|p| u32::try_from(p).ok())
                .ok_or_else(|| Error::Format(format!("bad exponent for {name}")))?;
            list.push((VarId::parse(name)?, p));
        }
        terms.push((Monomial::from_exps(list), checked_coef(field(t, "coef")?, r)?));
    }
    let poly = match degree_cap {
        Some(cap) => Poly::assemble(dims, cap, terms)?,
        None => Poly::from_terms(dims, terms)?,
    };
    KernelExpr::new(poly, kind)
}

pub fn symbol_to_json(g: &Symbol) -> Value {
    let d = g.dims();
    let terms: Vec<Value> = g
        .terms()
        .into_iter()
        .map(|(a, b, c)| json!({"hol": a, "antihol": b, "coef": matrix_to_json(&c)}))
        .collect();
    json!({
        "schema": SYMBOL_SCHEMA,
        "n": d.n,
        "m": d.m,
        "fiber_rank": d.fiber_rank,
        "terms": terms,
    })
}

pub fn symbol_from_json(v: &Value) -> Result<Symbol> {
    check_schema(v, SYMBOL_SCHEMA)?;
    let n = usize_field(v, "n")?;
    let m = usize_field(v, "m")?;
    let r = usize_field(v, "fiber_rank")?;
    let mut terms = Vec::new();
    for t in field(v, "terms")?
        .as_array()
        .ok_or_else(|| Error::Format("field \"terms\" must be a list".into()))?
    {
        terms.push((u32_list(t, "hol")?, u32_list(t, "antihol")?, checked_coef(field(t, "coef")?, r)?));
    }
    Symbol::from_terms(n, m, r, terms)
}

pub fn points_to_json(points: &[PointPair]) -> Value {
    let list: Vec<Value> = points
        .iter()
        .map(|(z, zp)| json!({"z": vector_to_json(z), "zp": vector_to_json(zp)}))
        .collect();
    json!({"schema": POINTS_SCHEMA, "points": list})
}

pub fn points_from_json(v: &Value) -> Result<Vec<PointPair>> {
    check_schema(v, POINTS_SCHEMA)?;
    field(v, "points")?
        .as_array()
        .ok_or_else(|| Error::Format("field \"points\" must be a list".into()))?
        .iter()
        .map(|p| Ok((vector_from_json(field(p, "z")?)?, vector_from_json(field(p, "zp")?)?)))
        .collect()
}

/// Pretty, key-order-preserving rendering with a trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_round_trip() {
        let d = Dims::new(2, 1, 2).unwrap();
        let coef = CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.5), C64::new(0.0, 0.0), C64::new(-0.25, 0.0), C64::new(0.1, 1e-17)]);
        let num = Poly::from_terms(d, [(Monomial::from_exps([(VarId::z(2), 2), (VarId::zbp(1), 1)]), coef)]).unwrap();
        let e = KernelExpr::new(num, KernelKind::Extension { n: 2, m: 1 }).unwrap();
        let v = kernel_to_json(&e);
        let back = kernel_from_json(&v, None).unwrap();
        assert_eq!(kernel_to_json(&back), v);
        assert_eq!(back, e);
        let text = to_canonical_string(&v);
        let reparsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(reparsed, v);
    }

    #[test]
    fn symbol_round_trip() {
        let v = json!({"n": 2, "m": 1, "fiber_rank": 1, "terms": [{"hol": [1], "antihol": [1], "coef": [[[1.0, 0.0]]]}]});
        let g = symbol_from_json(&v).unwrap();
        let out = symbol_to_json(&g);
        assert_eq!(symbol_from_json(&out).unwrap(), g);
    }

    #[test]
    fn schema_mismatch() {
        let v = json!({"schema": "kexpr/2", "kind": "Bergman", "n": 1, "fiber_rank": 1, "terms": []});
        assert!(matches!(kernel_from_json(&v, None), Err(Error::Format(_))));
        let v = json!({"schema": "kexpr/1", "kind": "Bergman", "n": 1, "fiber_rank": 1, "terms": []});
        assert!(kernel_from_json(&v, None).is_ok());
    }

    #[test]
    fn bad_coefficient_shape() {
        let v = json!({"kind": "Bergman", "n": 1, "fiber_rank": 2, "terms": [{"exps": {}, "coef": [[[1.0, 0.0]]]}]});
        assert!(kernel_from_json(&v, None).is_err());
    }
}

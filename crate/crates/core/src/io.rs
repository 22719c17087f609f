//! JSON documents for groups, structures, tangent vectors and words.
//!
//! Rationals travel as strings `"num/den"` (or a bare integer). Decimal
//! strings are accepted only when approximate input is enabled and are read
//! as the exact rational they denote.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::farey::{FareyVertex, Moebius, OrientedEdge};
use crate::modgroup::{ModgroupError, ModularWord};
use crate::structures::{DecoratedStructure, Paving, StructureError, TlcTesselation};
use crate::subgroup::{Subgroup, SubgroupError};
use crate::wpform::TangentVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("malformed rational {0:?}")]
    Rational(String),
    #[error(transparent)]
    Group(#[from] SubgroupError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Word(#[from] ModgroupError),
}

/// Largest accepted congruence level; `Γ(n)` has index about `n³/2`.
pub const MAX_LEVEL: u32 = 32;

fn schema(msg: impl Into<String>) -> IoError {
    IoError::Schema(msg.into())
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn split_sign(s: &str) -> (bool, &str) {
    match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    }
}

/// Parses `"n"` or `"n/d"` with `d > 0`.
pub fn parse_rational(s: &str) -> Result<BigRational, IoError> {
    let bad = || IoError::Rational(s.to_string());
    let (neg, body) = split_sign(s);
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    if !is_digits(num) || !is_digits(den) {
        return Err(bad());
    }
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Parses a plain decimal `"-12.345"` exactly.
pub fn parse_decimal(s: &str) -> Result<BigRational, IoError> {
    let bad = || IoError::Rational(s.to_string());
    let (neg, body) = split_sign(s);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if !is_digits(int) || !(frac.is_empty() || is_digits(frac)) || body.ends_with('.') {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(&digits).map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// A value string: always `"n/d"`, plus decimals when `approx` is set.
pub fn parse_value(s: &str, approx: bool) -> Result<BigRational, IoError> {
    match parse_rational(s) {
        Ok(r) => Ok(r),
        Err(e) if approx => parse_decimal(s).map_err(|_| e),
        Err(e) => Err(e),
    }
}

/// `"n/d"`, always with a denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rounded decimal with `digits` places after the point.
pub fn format_decimal(r: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let rounded = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    let (int, frac) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str, IoError> {
    v.as_str().ok_or_else(|| schema(format!("{what} must be a string")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| schema(format!("{what} must be an array")))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, IoError> {
    v.get(key).ok_or_else(|| schema(format!("missing field {key:?}")))
}

fn check_keys(v: &Value, allowed: &[&str]) -> Result<(), IoError> {
    let obj = v.as_object().ok_or_else(|| schema("expected an object"))?;
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("unknown field {k:?}"))),
        None => Ok(()),
    }
}

fn parse_json(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))
}

pub fn vertex_from_json(v: &Value) -> Result<FareyVertex, IoError> {
    let s = as_str(v, "vertex")?;
    FareyVertex::from_str(s).map_err(|e| schema(e.to_string()))
}

pub fn edge_from_json(v: &Value) -> Result<OrientedEdge, IoError> {
    let a = as_array(v, "edge")?;
    if a.len() != 2 {
        return Err(schema("an edge has exactly two endpoints"));
    }
    OrientedEdge::new(vertex_from_json(&a[0])?, vertex_from_json(&a[1])?).map_err(|e| schema(e.to_string()))
}

pub fn edge_to_json(e: &OrientedEdge) -> Value {
    json!([e.tail.to_string(), e.head.to_string()])
}

fn small_uint(v: &Value, what: &str) -> Result<u64, IoError> {
    v.as_u64().ok_or_else(|| schema(format!("{what} must be a non-negative integer")))
}

pub fn group_from_json(v: &Value) -> Result<Subgroup, IoError> {
    let ty = as_str(field(v, "type")?, "type")?;
    match ty {
        "full" => {
            check_keys(v, &["type"])?;
            Ok(Subgroup::full())
        }
        "commutator" => {
            check_keys(v, &["type"])?;
            Ok(Subgroup::commutator())
        }
        "congruence" => {
            check_keys(v, &["type", "level"])?;
            let n = small_uint(field(v, "level")?, "level")?;
            let n = u32::try_from(n).ok().filter(|&n| n <= MAX_LEVEL).ok_or_else(|| schema("level too large"))?;
            Ok(Subgroup::principal_congruence(n)?)
        }
        "perm" => {
            check_keys(v, &["type", "degree", "s", "u"])?;
            let n = small_uint(field(v, "degree")?, "degree")? as usize;
            let perm = |key: &str| -> Result<Vec<u32>, IoError> {
                let a = as_array(field(v, key)?, key)?;
                a.iter()
                    .map(|x| {
                        let i = small_uint(x, key)?;
                        u32::try_from(i).map_err(|_| schema("permutation entry too large"))
                    })
                    .collect()
            };
            let (s, u) = (perm("s")?, perm("u")?);
            for len in [s.len(), u.len()] {
                if len != n {
                    return Err(SubgroupError::DegreeMismatch(n, len).into());
                }
            }
            Ok(Subgroup::from_permutations(s, u)?)
        }
        other => Err(schema(format!("unknown group type {other:?}"))),
    }
}

pub fn group_to_json(k: &Subgroup) -> Value {
    if *k == Subgroup::full() {
        json!({"type": "full"})
    } else if *k == Subgroup::commutator() {
        json!({"type": "commutator"})
    } else {
        json!({"type": "perm", "degree": k.index(), "s": k.perm_s(), "u": k.perm_u()})
    }
}

pub fn parse_group(text: &str) -> Result<Subgroup, IoError> {
    group_from_json(&parse_json(text)?)
}

/// One flip entry: a bare edge (flipped for `default`) or `{"group", "edge"}`.
fn flip_from_json(v: &Value, default: &Subgroup) -> Result<(Subgroup, OrientedEdge), IoError> {
    if v.is_array() {
        return Ok((default.clone(), edge_from_json(v)?));
    }
    check_keys(v, &["group", "edge"])?;
    Ok((group_from_json(field(v, "group")?)?, edge_from_json(field(v, "edge")?)?))
}

fn flip_to_json(k: &Subgroup, e: &OrientedEdge, default: &Subgroup) -> Value {
    if k == default {
        edge_to_json(e)
    } else {
        json!({"group": group_to_json(k), "edge": edge_to_json(e)})
    }
}

/// `(edge, value)` pairs.
fn values_from_json(v: &Value, approx: bool) -> Result<Vec<(OrientedEdge, BigRational)>, IoError> {
    as_array(v, "values")?
        .iter()
        .map(|item| {
            check_keys(item, &["edge", "value"])?;
            let e = edge_from_json(field(item, "edge")?)?;
            let x = parse_value(as_str(field(item, "value")?, "value")?, approx)?;
            Ok((e, x))
        })
        .collect()
}

fn values_to_json(edges: &[OrientedEdge], values: &[BigRational]) -> Value {
    Value::Array(
        edges.iter().zip(values).map(|(e, x)| json!({"edge": edge_to_json(e), "value": format_rational(x)})).collect(),
    )
}

/// A tesselation document: `{"group", "flips", "doe"?}`.
pub fn tesselation_from_json(v: &Value) -> Result<TlcTesselation, IoError> {
    let k = group_from_json(field(v, "group")?)?;
    let flips = match v.get("flips") {
        Some(f) => as_array(f, "flips")?.iter().map(|x| flip_from_json(x, &k)).collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let mut t = TlcTesselation::farey(&k);
    for (g, e) in &flips {
        t = t.whitehead_move(g, e)?;
    }
    if *t.group() != k {
        return Err(StructureError::NotInvariant.into());
    }
    if let Some(d) = v.get("doe") {
        t = t.with_doe(edge_from_json(d)?)?;
    }
    Ok(t)
}

fn tesselation_fields(t: &TlcTesselation) -> serde_json::Map<String, Value> {
    let k = t.group();
    let mut m = serde_json::Map::new();
    m.insert("group".into(), group_to_json(k));
    m.insert(
        "flips".into(),
        Value::Array(t.history().iter().map(|r| flip_to_json(&r.group, &r.edge, k)).collect()),
    );
    m.insert("doe".into(), edge_to_json(t.doe()));
    m
}

pub fn tesselation_to_json(t: &TlcTesselation) -> Value {
    Value::Object(tesselation_fields(t))
}

/// A structure document: a tesselation document plus `"lambda"`.
pub fn structure_from_json(v: &Value, approx: bool) -> Result<DecoratedStructure, IoError> {
    check_keys(v, &["group", "flips", "doe", "lambda"])?;
    let t = tesselation_from_json(v)?;
    let values = values_from_json(field(v, "lambda")?, approx)?;
    Ok(DecoratedStructure::new(t, &values)?)
}

pub fn structure_to_json(s: &DecoratedStructure) -> Value {
    let mut m = tesselation_fields(s.tess());
    m.insert("lambda".into(), values_to_json(&s.tess().orbit_reps(), s.lambda()));
    Value::Object(m)
}

pub fn parse_structure(text: &str, approx: bool) -> Result<DecoratedStructure, IoError> {
    structure_from_json(&parse_json(text)?, approx)
}

/// Tangent vector on `s`: `[{"edge", "value"}, ...]` covering every orbit.
pub fn tangent_from_json(v: &Value, s: &DecoratedStructure, approx: bool) -> Result<TangentVector, IoError> {
    let values = values_from_json(v, approx)?;
    Ok(TangentVector::from_edges(s, &values)?)
}

pub fn tangent_to_json(s: &DecoratedStructure, v: &TangentVector) -> Value {
    values_to_json(&s.tess().orbit_reps(), &v.components)
}

pub fn parse_tangent(text: &str, s: &DecoratedStructure, approx: bool) -> Result<TangentVector, IoError> {
    tangent_from_json(&parse_json(text)?, s, approx)
}

fn bigint_from_json(v: &Value) -> Result<BigInt, IoError> {
    if let Some(i) = v.as_i64() {
        return Ok(BigInt::from(i));
    }
    let s = as_str(v, "matrix entry")?;
    let (neg, body) = split_sign(s);
    if !is_digits(body) {
        return Err(schema(format!("bad integer {s:?}")));
    }
    let n = BigInt::from_str(body).map_err(|_| schema(format!("bad integer {s:?}")))?;
    Ok(if neg { -n } else { n })
}

fn bigint_to_json(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(i) => json!(i),
        Err(_) => json!(n.to_string()),
    }
}

pub fn moebius_from_json(v: &Value) -> Result<Moebius, IoError> {
    let rows = as_array(v, "base")?;
    if rows.len() != 2 {
        return Err(schema("base must be a 2x2 matrix"));
    }
    let mut e = Vec::with_capacity(4);
    for row in rows {
        let row = as_array(row, "base row")?;
        if row.len() != 2 {
            return Err(schema("base must be a 2x2 matrix"));
        }
        for x in row {
            e.push(bigint_from_json(x)?);
        }
    }
    let [a, b, c, d]: [BigInt; 4] = e.try_into().expect("four entries");
    Moebius::new(a, b, c, d).map_err(|err| schema(err.to_string()))
}

pub fn moebius_to_json(g: &Moebius) -> Value {
    let [a, b, c, d] = g.entries();
    json!([[bigint_to_json(a), bigint_to_json(b)], [bigint_to_json(c), bigint_to_json(d)]])
}

/// `{"base": [[a,b],[c,d]], "word": [{"group", "edge"}, ...]}`.
pub fn word_from_json(v: &Value) -> Result<ModularWord, IoError> {
    check_keys(v, &["base", "word"])?;
    let base = match v.get("base") {
        Some(b) => moebius_from_json(b)?,
        None => Moebius::identity(),
    };
    let flips = as_array(field(v, "word")?, "word")?
        .iter()
        .map(|item| {
            check_keys(item, &["group", "edge"])?;
            Ok((group_from_json(field(item, "group")?)?, edge_from_json(field(item, "edge")?)?))
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(ModularWord::from_flips(base, &flips)?)
}

pub fn word_to_json(w: &ModularWord) -> Value {
    json!({
        "base": moebius_to_json(&w.base),
        "word": w.word.iter().map(|g| json!({"group": group_to_json(&g.group), "edge": edge_to_json(&g.edge)})).collect::<Vec<_>>(),
    })
}

pub fn parse_word(text: &str) -> Result<ModularWord, IoError> {
    word_from_json(&parse_json(text)?)
}

pub fn paving_to_json(s: &DecoratedStructure, p: &Paving) -> Value {
    let reps = s.tess().orbit_reps();
    json!({
        "removed": p.removed.iter().map(|&o| edge_to_json(&reps[o])).collect::<Vec<_>>(),
        "faces": p.face_sizes(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-7").unwrap(), BigRational::from_integer((-7).into()));
        for bad in ["1/0x", "1/0", "", "/2", "1/", "+1", "1 /2", "--1", "1.5", "0x1", "1/-2"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_value("1.25", true).unwrap(), BigRational::new(5.into(), 4.into()));
        assert!(parse_value("1.25", false).is_err());
        assert!(parse_value("1.", true).is_err());
        assert_eq!(format_rational(&BigRational::from_integer((-4).into())), "-4/1");
        assert_eq!(format_decimal(&BigRational::new(2.into(), 3.into()), 4), "0.6667");
        assert_eq!(format_decimal(&BigRational::new((-1).into(), 8.into()), 2), "-0.13");
        assert_eq!(format_decimal(&BigRational::new((-1).into(), 1000.into()), 2), "0.00");
    }

    #[test]
    fn groups() {
        for text in [
            r#"{"type":"full"}"#,
            r#"{"type":"commutator"}"#,
            r#"{"type":"congruence","level":3}"#,
            r#"{"type":"perm","degree":3,"s":[0,2,1],"u":[1,2,0]}"#,
        ] {
            let k = parse_group(text).unwrap();
            assert_eq!(group_from_json(&group_to_json(&k)).unwrap(), k);
        }
        assert_eq!(parse_group(r#"{"type":"congruence","level":2}"#).unwrap().index(), 6);
        for bad in [
            r#"{"type":"perm","degree":2,"s":[0,1],"u":[1,0]}"#,
            r#"{"type":"perm","degree":3,"s":[0,2,1]}"#,
            r#"{"type":"nope"}"#,
            r#"{"type":"full","x":1}"#,
            r#"{"type":"congruence","level":100000}"#,
            r#"[1,2]"#,
        ] {
            assert!(parse_group(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn structures_roundtrip() {
        let text = r#"{"group":{"type":"commutator"},"flips":[["0/1","1/0"]],
            "lambda":[{"edge":["-1/1","1/1"],"value":"1"},{"edge":["0/1","1/1"],"value":"2/3"},{"edge":["1/1","1/0"],"value":"5"}]}"#;
        let s = parse_structure(text, false).unwrap();
        let back = structure_from_json(&structure_to_json(&s), false).unwrap();
        assert_eq!(back.lambda(), s.lambda());
        assert_eq!(back.tess().doe(), s.tess().doe());
        assert_eq!(back.tess().history(), s.tess().history());
        assert!(matches!(
            parse_structure(r#"{"group":{"type":"commutator"},"lambda":[]}"#, false),
            Err(IoError::Structure(StructureError::MissingOrbit(0)))
        ));
        let v = parse_tangent(r#"[{"edge":["0/1","1/1"],"value":"1"},{"edge":["1/1","1/0"],"value":"0"},{"edge":["-1/1","1/1"],"value":"-3/2"}]"#, &s, false).unwrap();
        assert_eq!(tangent_from_json(&tangent_to_json(&s, &v), &s, false).unwrap(), v);
    }

    #[test]
    fn words_roundtrip() {
        let text = r#"{"base":[[0,-1],[1,0]],"word":[{"group":{"type":"commutator"},"edge":["0/1","1/0"]}]}"#;
        let w = parse_word(text).unwrap();
        let back = word_from_json(&word_to_json(&w)).unwrap();
        assert_eq!(back.base, w.base);
        assert_eq!(back.flips(), w.flips());
        assert!(parse_word(r#"{"base":[[1,1],[1,1]],"word":[]}"#).is_err());
        assert!(parse_word(r#"{"word":[{"group":{"type":"full"},"edge":["0/1","2/1"]}]}"#).is_err());
    }

    proptest! {
        #[test]
        fn rational_roundtrip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = BigRational::new(n.into(), d.into());
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }

        #[test]
        fn parsers_never_panic(s in "\\PC{0,40}") {
            let _ = parse_rational(&s);
            let _ = parse_decimal(&s);
            let _ = parse_group(&s);
            let _ = parse_structure(&s, true);
            let _ = parse_word(&s);
        }
    }
}

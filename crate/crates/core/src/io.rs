//! JSON documents for signatures, structures, ideals, families and dumped
//! reduced products. Rationals are `"p/q"` strings; function values and
//! constants are element labels.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::boolean::{IdealError, IdealFile, IdealSpec};
use crate::rational::{self, Rational};
use crate::reduced::{Family, ReducedError, ReducedProduct};
use crate::structures::{decode, FiniteStructure, StructureError, Table};
use crate::syntax::{Signature, SignatureError, SymbolDecl};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed document at {at}: {message}")]
    Shape { at: String, message: String },
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Reduced(#[from] ReducedError),
}

fn shape(at: &str, message: impl Into<String>) -> IoError {
    IoError::Shape { at: at.into(), message: message.into() }
}

pub fn read_json(path: &str) -> Result<Value, IoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::File { path: path.into(), source })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn signature_from_json(v: &Value) -> Result<Arc<Signature>, IoError> {
    Ok(Arc::new(serde_json::from_value(v.clone())?))
}

pub fn signature_to_json(sig: &Signature) -> Value {
    serde_json::to_value(sig).expect("signatures serialize")
}

pub fn ideal_from_json(v: &Value) -> Result<IdealSpec, IoError> {
    let file: IdealFile = serde_json::from_value(v.clone())?;
    Ok(file.to_ideal()?)
}

pub fn ideal_to_json(ideal: &IdealSpec) -> Value {
    serde_json::to_value(IdealFile::from_ideal(ideal)).expect("ideal files serialize")
}

fn rational_of(v: &Value, at: &str) -> Result<Rational, IoError> {
    match v {
        Value::String(s) => rational::parse_rational(s).map_err(|e| shape(at, e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(rational::int(n.as_i64().expect("checked"))),
        _ => Err(shape(at, "expected a rational string")),
    }
}

/// Arity implied by the nesting depth of a tensor.
fn tensor_depth(v: &Value) -> usize {
    match v {
        Value::Array(xs) => 1 + xs.first().map_or(0, tensor_depth),
        _ => 0,
    }
}

/// Flattens a nested tensor in row-major order after checking its shape.
fn flatten<'a>(v: &'a Value, arity: usize, size: usize, at: &str) -> Result<Vec<&'a Value>, IoError> {
    if arity == 0 {
        return match v {
            Value::Array(_) => Err(shape(at, "tensor nested too deeply")),
            _ => Ok(vec![v]),
        };
    }
    let xs = v.as_array().ok_or_else(|| shape(at, "expected a nested array"))?;
    if xs.len() != size {
        return Err(shape(at, format!("expected {size} entries, found {}", xs.len())));
    }
    let mut out = Vec::new();
    for x in xs {
        out.extend(flatten(x, arity - 1, size, at)?);
    }
    Ok(out)
}

fn nest(values: Vec<Value>, arity: usize, size: usize) -> Value {
    if arity == 0 {
        return values.into_iter().next().expect("one scalar");
    }
    let chunk = values.len() / size;
    let mut it = values.into_iter();
    Value::Array(
        (0..size).map(|_| nest(it.by_ref().take(chunk).collect(), arity - 1, size)).collect(),
    )
}

fn object<'a>(v: &'a Value, key: &str, at: &str) -> Result<Option<&'a Map<String, Value>>, IoError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Object(m)) => Ok(Some(m)),
        Some(_) => Err(shape(at, format!("`{key}` must be an object"))),
    }
}

struct RawStructure {
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
    preds: BTreeMap<String, (usize, Vec<Rational>)>,
    funcs: BTreeMap<String, (usize, Vec<usize>)>,
    consts: BTreeMap<String, usize>,
}

fn raw_structure(v: &Value) -> Result<RawStructure, IoError> {
    let labels: Vec<String> = v
        .get("universe")
        .and_then(Value::as_array)
        .ok_or_else(|| shape("universe", "expected an array of labels"))?
        .iter()
        .map(|x| match x {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(shape("universe", "labels are strings")),
        })
        .collect::<Result<_, _>>()?;
    let n = labels.len();
    let index = |label: &Value, at: &str| -> Result<usize, IoError> {
        let text = match label {
            Value::String(s) => s.clone(),
            Value::Number(k) => k.to_string(),
            _ => return Err(shape(at, "expected an element label")),
        };
        labels.iter().position(|l| *l == text).ok_or_else(|| shape(at, format!("unknown element `{text}`")))
    };
    let dist = flatten(v.get("dist").unwrap_or(&Value::Null), 2, n, "dist")?
        .into_iter()
        .map(|x| rational_of(x, "dist"))
        .collect::<Result<Vec<_>, _>>()?
        .chunks(n.max(1))
        .map(|row| row.to_vec())
        .collect();
    let mut preds = BTreeMap::new();
    for (name, t) in object(v, "preds", "preds")?.into_iter().flatten() {
        let arity = tensor_depth(t);
        let at = format!("preds.{name}");
        let data = flatten(t, arity, n, &at)?
            .into_iter()
            .map(|x| rational_of(x, &at))
            .collect::<Result<_, _>>()?;
        preds.insert(name.clone(), (arity, data));
    }
    let mut funcs = BTreeMap::new();
    for (name, t) in object(v, "funcs", "funcs")?.into_iter().flatten() {
        let arity = tensor_depth(t);
        let at = format!("funcs.{name}");
        let data = flatten(t, arity, n, &at)?
            .into_iter()
            .map(|x| index(x, &at))
            .collect::<Result<_, _>>()?;
        funcs.insert(name.clone(), (arity, data));
    }
    let mut consts = BTreeMap::new();
    for (name, c) in object(v, "consts", "consts")?.into_iter().flatten() {
        consts.insert(name.clone(), index(c, &format!("consts.{name}"))?);
    }
    Ok(RawStructure { labels, dist, preds, funcs, consts })
}

fn max_dist(dist: &[Vec<Rational>], x: &[usize], y: &[usize]) -> Rational {
    x.iter().zip(y).map(|(&a, &b)| dist[a][b].clone()).max().unwrap_or_else(rational::zero)
}

/// Least constant `L` with `|t(x) − t(y)| ≤ L·d(x, y)` over all tuple pairs,
/// or 1 when the table is constant.
fn least_lipschitz(n: usize, arity: usize, gap: impl Fn(usize, usize) -> Rational, dist: &[Vec<Rational>]) -> Rational {
    let total = n.pow(arity as u32);
    let (mut x, mut y) = (vec![0; arity], vec![0; arity]);
    let mut best = rational::zero();
    for i in 0..total {
        decode(i, n, &mut x);
        for j in 0..total {
            decode(j, n, &mut y);
            let d = max_dist(dist, &x, &y);
            if d > rational::zero() {
                let ratio = gap(i, j) / d;
                if ratio > best {
                    best = ratio;
                }
            }
        }
    }
    if best == rational::zero() {
        rational::one()
    } else {
        best
    }
}

/// Signature read off a structure document: arities from tensor depth,
/// Lipschitz bounds the least ones the tables satisfy.
fn inferred_signature(raw: &RawStructure) -> Result<Signature, IoError> {
    let n = raw.labels.len();
    let preds = raw
        .preds
        .iter()
        .map(|(name, (arity, data))| {
            let l = least_lipschitz(n, *arity, |i, j| num_traits::Signed::abs(&(&data[i] - &data[j])), &raw.dist);
            SymbolDecl::new(name.clone(), *arity, l)
        })
        .collect();
    let funcs = raw
        .funcs
        .iter()
        .map(|(name, (arity, data))| {
            let l = least_lipschitz(n, *arity, |i, j| raw.dist[data[i]][data[j]].clone(), &raw.dist);
            SymbolDecl::new(name.clone(), *arity, l)
        })
        .collect();
    Ok(Signature::new(preds, funcs, raw.consts.keys().cloned().collect())?)
}

fn assemble(raw: RawStructure, sig: Arc<Signature>) -> Result<FiniteStructure, IoError> {
    let n = raw.labels.len();
    let mut preds = Vec::new();
    for d in sig.preds() {
        let (arity, data) = raw
            .preds
            .get(&d.name)
            .ok_or_else(|| shape("preds", format!("missing predicate `{}`", d.name)))?;
        if *arity != d.arity {
            return Err(shape("preds", format!("`{}` has arity {arity}, declared {}", d.name, d.arity)));
        }
        preds.push(Table::from_vec(d.arity, n, data.clone()).expect("flattened to shape"));
    }
    let mut funcs = Vec::new();
    for d in sig.funcs() {
        let (arity, data) = raw
            .funcs
            .get(&d.name)
            .ok_or_else(|| shape("funcs", format!("missing function `{}`", d.name)))?;
        if *arity != d.arity {
            return Err(shape("funcs", format!("`{}` has arity {arity}, declared {}", d.name, d.arity)));
        }
        funcs.push(Table::from_vec(d.arity, n, data.clone()).expect("flattened to shape"));
    }
    let consts = sig
        .consts()
        .iter()
        .map(|c| raw.consts.get(c).copied().ok_or_else(|| shape("consts", format!("missing constant `{c}`"))))
        .collect::<Result<_, _>>()?;
    Ok(FiniteStructure::new(sig, raw.labels, raw.dist, preds, funcs, consts)?)
}

/// Reads a structure. The signature comes from `sig`, else from an embedded
/// `signature` key, else is inferred from the tables.
pub fn structure_from_json(v: &Value, sig: Option<Arc<Signature>>) -> Result<FiniteStructure, IoError> {
    let raw = raw_structure(v)?;
    let sig = match (sig, v.get("signature")) {
        (Some(s), _) => s,
        (None, Some(s)) => signature_from_json(s)?,
        (None, None) => Arc::new(inferred_signature(&raw)?),
    };
    assemble(raw, sig)
}

pub fn structure_to_json(s: &FiniteStructure, with_signature: bool) -> Value {
    let sig = s.signature();
    let n = s.size();
    let label = |a: usize| Value::String(s.labels()[a].clone());
    let dist: Vec<Value> = s
        .dist_matrix()
        .iter()
        .map(|row| Value::Array(row.iter().map(|d| json!(rational::format_rational(d))).collect()))
        .collect();
    let mut preds = Map::new();
    for (k, d) in sig.preds().iter().enumerate() {
        let vals = s.pred(k).entries().iter().map(|r| json!(rational::format_rational(r))).collect();
        preds.insert(d.name.clone(), nest(vals, d.arity, n));
    }
    let mut funcs = Map::new();
    for (k, d) in sig.funcs().iter().enumerate() {
        let vals = s.func(k).entries().iter().map(|&b| label(b)).collect();
        funcs.insert(d.name.clone(), nest(vals, d.arity, n));
    }
    let consts: Map<String, Value> =
        sig.consts().iter().enumerate().map(|(k, c)| (c.clone(), label(s.constant(k)))).collect();
    let mut out = json!({
        "universe": s.labels(),
        "dist": dist,
        "preds": preds,
        "funcs": funcs,
        "consts": consts,
    });
    if with_signature {
        out["signature"] = signature_to_json(sig);
    }
    out
}

/// Reads `{ideal, structures: {label: structure}}`; members are matched to
/// the ground set by label and share one signature.
pub fn family_from_json(v: &Value, sig: Option<Arc<Signature>>) -> Result<Family, IoError> {
    let ideal = ideal_from_json(v.get("ideal").ok_or_else(|| shape("ideal", "missing"))?)?;
    let members = object(v, "structures", "structures")?
        .ok_or_else(|| shape("structures", "missing"))?;
    let sig = match (sig, v.get("signature")) {
        (Some(s), _) => Some(s),
        (None, Some(s)) => Some(signature_from_json(s)?),
        (None, None) => None,
    };
    let mut raws = Vec::new();
    for label in ideal.omega() {
        let m = members
            .get(label)
            .ok_or_else(|| shape("structures", format!("no structure for `{label}`")))?;
        raws.push((raw_structure(m)?, m.get("signature").cloned()));
    }
    let sig = match sig {
        Some(s) => s,
        None => match raws.iter().find_map(|(_, s)| s.clone()) {
            Some(s) => signature_from_json(&s)?,
            None => Arc::new(merged_signature(&raws)?),
        },
    };
    let structures = raws
        .into_iter()
        .map(|(raw, _)| assemble(raw, sig.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Family::new(ideal, structures)?)
}

/// Inferred signatures of all members with the largest Lipschitz bounds.
fn merged_signature(raws: &[(RawStructure, Option<Value>)]) -> Result<Signature, IoError> {
    let sigs = raws.iter().map(|(r, _)| inferred_signature(r)).collect::<Result<Vec<_>, _>>()?;
    let first = &sigs[0];
    let merge = |pick: &dyn Fn(&Signature) -> &[SymbolDecl]| -> Result<Vec<SymbolDecl>, IoError> {
        pick(first)
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let mut l = d.lipschitz.clone();
                for s in &sigs {
                    let other = pick(s).get(k).filter(|o| o.name == d.name && o.arity == d.arity);
                    let other = other.ok_or_else(|| shape("structures", "members disagree on symbols"))?;
                    l = l.max(other.lipschitz.clone());
                }
                Ok(SymbolDecl::new(d.name.clone(), d.arity, l))
            })
            .collect()
    };
    if sigs.iter().any(|s| s.consts() != first.consts()) {
        return Err(shape("structures", "members disagree on constants"));
    }
    Ok(Signature::new(merge(&|s| s.preds())?, merge(&|s| s.funcs())?, first.consts().to_vec())?)
}

pub fn family_to_json(fam: &Family) -> Value {
    let structures: Map<String, Value> = fam
        .ideal()
        .omega()
        .iter()
        .zip(fam.members())
        .map(|(l, s)| (l.clone(), structure_to_json(s, false)))
        .collect();
    json!({
        "ideal": ideal_to_json(fam.ideal()),
        "signature": signature_to_json(fam.signature()),
        "structures": structures,
    })
}

/// The quotient as a structure document, plus a `class_map` from each class
/// label to its member tuples (one label per coordinate).
pub fn reduced_product_to_json(rp: &ReducedProduct) -> Value {
    let s = rp.structure();
    let fam = rp.family();
    let mut classes: Vec<Vec<Value>> = vec![Vec::new(); rp.class_count()];
    for (point, &class) in rp.class_map().iter().enumerate() {
        let tuple = fam.decode(point);
        let labels: Vec<Value> = tuple
            .iter()
            .zip(fam.members())
            .map(|(&a, m)| Value::String(m.labels()[a].clone()))
            .collect();
        classes[class].push(Value::Array(labels));
    }
    let class_map: Map<String, Value> = s
        .labels()
        .iter()
        .cloned()
        .zip(classes.into_iter().map(Value::Array))
        .collect();
    let mut out = structure_to_json(s, true);
    out["class_map"] = Value::Object(class_map);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::default_signature;
    use crate::structures::random_structure;

    #[test]
    fn structure_round_trip() {
        let s = random_structure(&default_signature(), 3, 11);
        let v = structure_to_json(&s, true);
        let back = structure_from_json(&v, None).unwrap();
        assert_eq!(back, s);
        let again = structure_from_json(&v, Some(default_signature())).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn inferred_signature_is_satisfied() {
        let s = random_structure(&default_signature(), 4, 3);
        let mut v = structure_to_json(&s, false);
        v.as_object_mut().unwrap().remove("signature");
        let back = structure_from_json(&v, None).unwrap();
        assert!(back.validate().is_ok());
        assert_eq!(back.signature().preds()[0].arity, 1);
        assert_eq!(back.signature().funcs()[0].arity, 2);
    }

    #[test]
    fn hand_written_structure() {
        let v = json!({
            "universe": ["a", "b"],
            "dist": [["0", "1/2"], ["1/2", "0"]],
            "preds": {"P": ["3/4", "1/4"]},
            "funcs": {},
            "consts": {"c": "a"}
        });
        let s = structure_from_json(&v, None).unwrap();
        assert_eq!(s.signature().preds()[0].lipschitz, rational::one());
        let p = crate::syntax::parse("P(c)", s.signature()).unwrap();
        assert_eq!(s.eval_sentence(&p).unwrap(), rational::ratio(3, 4));
        assert!(structure_from_json(&json!({"universe": ["a"], "dist": [["0", "1"]]}), None).is_err());
    }

    #[test]
    fn family_round_trip() {
        let fam = crate::harness::random_family(&default_signature(), 3, 3, 5);
        let v = family_to_json(&fam);
        let back = family_from_json(&v, None).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn dump_has_class_map() {
        let fam = crate::harness::random_family(&default_signature(), 2, 2, 8);
        let rp = crate::reduced::reduced_product(&fam).unwrap();
        let v = reduced_product_to_json(&rp);
        let map = v["class_map"].as_object().unwrap();
        assert_eq!(map.len(), rp.class_count());
        let total: usize = map.values().map(|m| m.as_array().unwrap().len()).sum();
        assert_eq!(total, fam.point_count());
    }
}

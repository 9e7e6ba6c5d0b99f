//! JSON document formats shared by the library and the command line.
//!
//! Every object here has a writer that produces canonical bytes (sorted keys,
//! two-space indentation, one trailing newline) and a reader that names the
//! JSON path of the offending value. Canonical means writer output is a fixed
//! point of parse-then-print, so two documents describe the same object
//! exactly when their bytes agree.
//!
//! Conventions:
//! - rationals are strings `"p/q"`, shortened to `"p"` for integers;
//! - matrices are row-major arrays of arrays of rationals. A matrix without
//!   entries prints as `[]` or `[[], ...]`; readers restore the lost side of
//!   its shape from context;
//! - posets list their elements sorted, with covers as `[lower, upper]` label
//!   pairs, and every other object refers to poset elements by label.

use crate::chain::BddChainComplex;
use crate::cosheaf::{CertificateStep, ClosedImageCertificate, CombinatorialMap};
use crate::derham::{GridBase, GridRegion};
use crate::linalg::{Rat, RatMatrix};
use crate::poset::{FinPoset, MonotoneMap};
use crate::sheaf::{DegreeMaps, PosetRep, PseudoFreeComplex};
use crate::simplicial::AlmostSimplicialComplex;
use crate::stratify::Stratification;
use crate::{Error, Result};
use num::BigInt;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

/// Canonical bytes for a document: keys sorted, pretty-printed, one trailing
/// newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}

pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))
}

fn bad(path: &str, what: impl Display) -> Error {
    Error::invalid(format!("{path}: {what}"))
}

fn as_obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn as_arr<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(path, "expected a string"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| bad(path, "expected an integer"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| bad(path, "expected a nonnegative integer"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(path, "expected a number"))
}

fn get<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| bad(path, format!("missing key {key:?}")))
}

fn only_keys(m: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    for k in m.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(bad(path, format!("unknown key {k:?}")));
        }
    }
    Ok(())
}

fn labels_to_indices(vs: &[Value], poset: &FinPoset, path: &str) -> Result<Vec<usize>> {
    vs.iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{path}[{i}]");
            let l = as_str(v, &p)?;
            poset.index_of(l).ok_or_else(|| bad(&p, format!("unknown element {l:?}")))
        })
        .collect()
}

fn index_set_doc(set: &[usize], poset: &FinPoset) -> Value {
    Value::Array(set.iter().map(|&p| Value::String(poset.label(p).to_string())).collect())
}

pub fn rational_to_string(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rational_from_str(s: &str, path: &str) -> Result<Rat> {
    let (n, d) = match s.split_once('/') {
        None => (s, "1"),
        Some(pair) => pair,
    };
    let n = BigInt::from_str(n.trim())
        .map_err(|_| bad(path, format!("{s:?} is not a rational p/q")))?;
    let d = BigInt::from_str(d.trim())
        .map_err(|_| bad(path, format!("{s:?} is not a rational p/q")))?;
    if d == BigInt::from(0) {
        return Err(bad(path, "rational with denominator zero"));
    }
    Ok(Rat::new(n, d))
}

pub fn matrix_to_doc(m: &RatMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| Value::String(rational_to_string(&m[(i, j)])))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn matrix_from_doc(v: &Value, path: &str) -> Result<RatMatrix> {
    let rows = as_arr(v, path)?;
    let mut data = Vec::with_capacity(rows.len());
    let mut cols = 0;
    for (i, r) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let r = as_arr(r, &rp)?;
        if i == 0 {
            cols = r.len();
        }
        let mut row = Vec::with_capacity(r.len());
        for (j, e) in r.iter().enumerate() {
            let ep = format!("{rp}[{j}]");
            row.push(rational_from_str(as_str(e, &ep)?, &ep)?);
        }
        data.push(row);
    }
    RatMatrix::from_rows(data, cols).map_err(|e| bad(path, e))
}

/// Restore the shape a nested-array encoding cannot carry: a parsed matrix
/// without entries stands for the zero map of the expected shape, provided
/// that shape has no entries either.
fn shaped(m: RatMatrix, rows: usize, cols: usize, path: &str) -> Result<RatMatrix> {
    if (m.rows(), m.cols()) == (rows, cols) {
        return Ok(m);
    }
    if m.rows() * m.cols() == 0 && rows * cols == 0 {
        return Ok(RatMatrix::zeros(rows, cols));
    }
    Err(bad(
        path,
        format!("expected a {rows}x{cols} matrix, got {}x{}", m.rows(), m.cols()),
    ))
}

pub fn poset_to_doc(p: &FinPoset) -> Value {
    let mut elements: Vec<&str> = p.labels().iter().map(String::as_str).collect();
    elements.sort_unstable();
    let mut covers: Vec<[&str; 2]> =
        p.covers().into_iter().map(|(a, b)| [p.label(a), p.label(b)]).collect();
    covers.sort_unstable();
    json!({ "covers": covers, "elements": elements })
}

pub fn poset_from_doc(v: &Value, path: &str) -> Result<FinPoset> {
    let m = as_obj(v, path)?;
    only_keys(m, &["covers", "elements"], path)?;
    let ep = format!("{path}.elements");
    let labels: Vec<String> = as_arr(get(m, "elements", path)?, &ep)?
        .iter()
        .enumerate()
        .map(|(i, e)| as_str(e, &format!("{ep}[{i}]")).map(str::to_string))
        .collect::<Result<_>>()?;
    let cp = format!("{path}.covers");
    let mut covers = Vec::new();
    for (i, c) in as_arr(get(m, "covers", path)?, &cp)?.iter().enumerate() {
        let pp = format!("{cp}[{i}]");
        let pair = as_arr(c, &pp)?;
        if pair.len() != 2 {
            return Err(bad(&pp, "a cover is a [lower, upper] pair"));
        }
        covers.push((
            as_str(&pair[0], &format!("{pp}[0]"))?.to_string(),
            as_str(&pair[1], &format!("{pp}[1]"))?.to_string(),
        ));
    }
    FinPoset::from_covers(labels, &covers).map_err(|e| bad(path, e))
}

pub fn monotone_map_to_doc(f: &MonotoneMap) -> Value {
    let mut map = Map::new();
    for i in 0..f.source().len() {
        map.insert(
            f.source().label(i).to_string(),
            Value::String(f.target().label(f.apply(i)).to_string()),
        );
    }
    json!({ "map": map, "source": poset_to_doc(f.source()), "target": poset_to_doc(f.target()) })
}

pub fn monotone_map_from_doc(v: &Value, path: &str) -> Result<MonotoneMap> {
    let m = as_obj(v, path)?;
    only_keys(m, &["map", "source", "target"], path)?;
    let source = poset_from_doc(get(m, "source", path)?, &format!("{path}.source"))?;
    let target = poset_from_doc(get(m, "target", path)?, &format!("{path}.target"))?;
    let mp = format!("{path}.map");
    let assignment_doc = as_obj(get(m, "map", path)?, &mp)?;
    let mut assignment = Vec::with_capacity(source.len());
    for i in 0..source.len() {
        let p = format!("{mp}.{}", source.label(i));
        let img = get(assignment_doc, source.label(i), &mp)
            .and_then(|v| as_str(v, &p))
            .map_err(|_| bad(&mp, format!("element {:?} has no image", source.label(i))))?;
        assignment.push(
            target.index_of(img).ok_or_else(|| bad(&p, format!("unknown image {img:?}")))?,
        );
    }
    for k in assignment_doc.keys() {
        if source.index_of(k).is_none() {
            return Err(bad(&mp, format!("map defined on unknown element {k:?}")));
        }
    }
    MonotoneMap::new(source, target, assignment).map_err(|e| bad(path, e))
}

pub fn complex_to_doc(c: &BddChainComplex) -> Value {
    let diffs: Vec<Value> = (0..c.dims().len().saturating_sub(1))
        .map(|i| matrix_to_doc(&c.diff_at(c.lo() + i as i64 + 1)))
        .collect();
    json!({ "differentials": diffs, "dims": c.dims(), "lo": c.lo() })
}

pub fn complex_from_doc(v: &Value, path: &str) -> Result<BddChainComplex> {
    let m = as_obj(v, path)?;
    only_keys(m, &["differentials", "dims", "lo"], path)?;
    let lo = as_i64(get(m, "lo", path)?, &format!("{path}.lo"))?;
    let dp = format!("{path}.dims");
    let dims: Vec<usize> = as_arr(get(m, "dims", path)?, &dp)?
        .iter()
        .enumerate()
        .map(|(i, d)| as_usize(d, &format!("{dp}[{i}]")))
        .collect::<Result<_>>()?;
    let mp = format!("{path}.differentials");
    let mats = as_arr(get(m, "differentials", path)?, &mp)?;
    if mats.len() != dims.len().saturating_sub(1) {
        return Err(bad(
            &mp,
            format!("{} degrees need {} differentials", dims.len(), dims.len().saturating_sub(1)),
        ));
    }
    let mut diffs = Vec::with_capacity(mats.len());
    for (i, mv) in mats.iter().enumerate() {
        let p = format!("{mp}[{i}]");
        let raw = matrix_from_doc(mv, &p)?;
        diffs.push(shaped(raw, dims[i], dims[i + 1], &p)?);
    }
    BddChainComplex::new(lo, dims, diffs).map_err(|e| bad(path, e))
}

/// Transitions are listed per Hasse cover as `"lower->upper"`, each an object
/// from degree to matrix; zero transitions and zero degrees are omitted.
pub fn representation_to_doc(f: &PosetRep) -> Value {
    let base = f.base();
    let mut stalks = Map::new();
    for p in 0..base.len() {
        stalks.insert(base.label(p).to_string(), complex_to_doc(f.stalk(p)));
    }
    let (lo, hi) = f.degree_range();
    let mut transitions = Map::new();
    for (p, q) in base.covers() {
        let mut degs = Map::new();
        for k in lo..=hi {
            let t = f.transition_at(p, q, k);
            if !t.is_zero() {
                degs.insert(k.to_string(), matrix_to_doc(&t));
            }
        }
        if !degs.is_empty() {
            let key = format!("{}->{}", base.label(p), base.label(q));
            transitions.insert(key, Value::Object(degs));
        }
    }
    json!({ "base": poset_to_doc(base), "stalks": stalks, "transitions": transitions })
}

pub fn representation_from_doc(v: &Value, path: &str) -> Result<PosetRep> {
    let m = as_obj(v, path)?;
    only_keys(m, &["base", "stalks", "transitions"], path)?;
    let base = poset_from_doc(get(m, "base", path)?, &format!("{path}.base"))?;
    let sp = format!("{path}.stalks");
    let mut stalks = vec![BddChainComplex::zero(); base.len()];
    for (label, sv) in as_obj(get(m, "stalks", path)?, &sp)? {
        let p = format!("{sp}.{label}");
        let e = base
            .index_of(label)
            .ok_or_else(|| bad(&p, "stalk at an element the base does not have"))?;
        stalks[e] = complex_from_doc(sv, &p)?;
    }
    let tp = format!("{path}.transitions");
    let mut cover_maps: BTreeMap<(usize, usize), DegreeMaps> = BTreeMap::new();
    for (key, tv) in as_obj(get(m, "transitions", path)?, &tp)? {
        let p = format!("{tp}.{key}");
        let (a, b) = key
            .split_once("->")
            .ok_or_else(|| bad(&p, "transition keys look like lower->upper"))?;
        let pa = base.index_of(a).ok_or_else(|| bad(&p, format!("unknown element {a:?}")))?;
        let pb = base.index_of(b).ok_or_else(|| bad(&p, format!("unknown element {b:?}")))?;
        let mut dm = DegreeMaps::new();
        for (dk, mv) in as_obj(tv, &p)? {
            let dp = format!("{p}.{dk}");
            let k: i64 = dk.parse().map_err(|_| bad(&dp, "degree keys are integers"))?;
            let raw = matrix_from_doc(mv, &dp)?;
            dm.insert(k, shaped(raw, stalks[pb].dim_at(k), stalks[pa].dim_at(k), &dp)?);
        }
        cover_maps.insert((pa, pb), dm);
    }
    PosetRep::new(base, stalks, &cover_maps).map_err(|e| bad(path, e))
}

/// Terms are keyed by degree, generators in column order; each differential
/// is keyed by the degree it leaves. Zero differentials may be omitted.
pub fn pseudo_free_to_doc(c: &PseudoFreeComplex) -> Value {
    let base = c.base();
    let mut terms = Map::new();
    for (i, t) in c.terms().iter().enumerate() {
        terms.insert((c.lo() + i as i64).to_string(), index_set_doc(t, base));
    }
    let mut diffs = Map::new();
    for i in 0..c.terms().len().saturating_sub(1) {
        diffs.insert((c.lo() + i as i64 + 1).to_string(), matrix_to_doc(c.diff(i)));
    }
    json!({ "base": poset_to_doc(base), "differentials": diffs, "terms": terms })
}

pub fn pseudo_free_from_doc(v: &Value, path: &str) -> Result<PseudoFreeComplex> {
    let m = as_obj(v, path)?;
    only_keys(m, &["base", "differentials", "terms"], path)?;
    let base = poset_from_doc(get(m, "base", path)?, &format!("{path}.base"))?;
    let tp = format!("{path}.terms");
    let mut by_degree = BTreeMap::new();
    for (dk, tv) in as_obj(get(m, "terms", path)?, &tp)? {
        let p = format!("{tp}.{dk}");
        let k: i64 = dk.parse().map_err(|_| bad(&p, "degree keys are integers"))?;
        by_degree.insert(k, labels_to_indices(as_arr(tv, &p)?, &base, &p)?);
    }
    if by_degree.is_empty() {
        return PseudoFreeComplex::new(base, 0, Vec::new(), Vec::new())
            .map_err(|e| bad(path, e));
    }
    let lo = *by_degree.keys().next().expect("nonempty");
    let hi = *by_degree.keys().last().expect("nonempty");
    if by_degree.len() as i64 != hi - lo + 1 {
        return Err(bad(&tp, "generator degrees must be contiguous"));
    }
    let terms: Vec<Vec<usize>> = by_degree.into_values().collect();
    let mp = format!("{path}.differentials");
    let mats = as_obj(get(m, "differentials", path)?, &mp)?;
    for dk in mats.keys() {
        let p = format!("{mp}.{dk}");
        let k: i64 = dk.parse().map_err(|_| bad(&p, "degree keys are integers"))?;
        if k <= lo || k > hi {
            return Err(bad(&p, format!("no differential leaves degree {k}")));
        }
    }
    let mut diffs = Vec::with_capacity(terms.len().saturating_sub(1));
    for i in 0..terms.len().saturating_sub(1) {
        let k = lo + i as i64 + 1;
        let p = format!("{mp}.{k}");
        let raw = match mats.get(&k.to_string()) {
            Some(mv) => matrix_from_doc(mv, &p)?,
            None => RatMatrix::zeros(terms[i].len(), terms[i + 1].len()),
        };
        diffs.push(shaped(raw, terms[i].len(), terms[i + 1].len(), &p)?);
    }
    PseudoFreeComplex::new(base, lo, terms, diffs).map_err(|e| bad(path, e))
}

pub fn simplicial_to_doc(c: &AlmostSimplicialComplex) -> Value {
    let simplices: Vec<Vec<&str>> = c
        .simplices()
        .iter()
        .map(|s| s.iter().map(|&v| c.vertices()[v].as_str()).collect())
        .collect();
    json!({ "simplices": simplices, "vertices": c.vertices() })
}

pub fn simplicial_from_doc(v: &Value, path: &str) -> Result<AlmostSimplicialComplex> {
    let m = as_obj(v, path)?;
    only_keys(m, &["simplices", "vertices"], path)?;
    let vp = format!("{path}.vertices");
    let vertices: Vec<String> = as_arr(get(m, "vertices", path)?, &vp)?
        .iter()
        .enumerate()
        .map(|(i, e)| as_str(e, &format!("{vp}[{i}]")).map(str::to_string))
        .collect::<Result<_>>()?;
    let sp = format!("{path}.simplices");
    let mut simplices = Vec::new();
    for (i, sv) in as_arr(get(m, "simplices", path)?, &sp)?.iter().enumerate() {
        let p = format!("{sp}[{i}]");
        simplices.push(
            as_arr(sv, &p)?
                .iter()
                .enumerate()
                .map(|(j, e)| as_str(e, &format!("{p}[{j}]")).map(str::to_string))
                .collect::<Result<_>>()?,
        );
    }
    AlmostSimplicialComplex::new(vertices, simplices).map_err(|e| bad(path, e))
}

pub fn stratification_to_doc(s: &Stratification) -> Value {
    let space = s.space();
    let strata = s.strata_poset();
    let mut map = Map::new();
    for i in 0..space.len() {
        let img = strata.label(s.map().apply(i));
        map.insert(space.label(i).to_string(), Value::String(img.to_string()));
    }
    json!({ "map": map, "space": poset_to_doc(space), "strata": poset_to_doc(strata) })
}

pub fn stratification_from_doc(v: &Value, path: &str) -> Result<Stratification> {
    let m = as_obj(v, path)?;
    only_keys(m, &["map", "space", "strata"], path)?;
    let space = poset_from_doc(get(m, "space", path)?, &format!("{path}.space"))?;
    let strata = poset_from_doc(get(m, "strata", path)?, &format!("{path}.strata"))?;
    let mp = format!("{path}.map");
    let assignment_doc = as_obj(get(m, "map", path)?, &mp)?;
    let mut assignment = Vec::with_capacity(space.len());
    for i in 0..space.len() {
        let p = format!("{mp}.{}", space.label(i));
        let img = get(assignment_doc, space.label(i), &mp)
            .and_then(|v| as_str(v, &p))
            .map_err(|_| bad(&mp, format!("element {:?} has no stratum", space.label(i))))?;
        assignment.push(
            strata.index_of(img).ok_or_else(|| bad(&p, format!("unknown stratum {img:?}")))?,
        );
    }
    for k in assignment_doc.keys() {
        if space.index_of(k).is_none() {
            return Err(bad(&mp, format!("map defined on unknown element {k:?}")));
        }
    }
    let f = MonotoneMap::new(space, strata, assignment).map_err(|e| bad(path, e))?;
    Ok(Stratification::new(f))
}

/// Sources and targets are ordered lists of up-sets (matrix columns and rows
/// respectively), each an array of element labels.
pub fn combinatorial_map_to_doc(m: &CombinatorialMap) -> Value {
    let x = m.space();
    let family = |sets: &[Vec<usize>]| -> Vec<Value> {
        sets.iter().map(|s| index_set_doc(s, x)).collect()
    };
    json!({
        "matrix": matrix_to_doc(m.matrix()),
        "sources": family(m.sources()),
        "space": poset_to_doc(x),
        "targets": family(m.targets()),
    })
}

pub fn combinatorial_map_from_doc(v: &Value, path: &str) -> Result<CombinatorialMap> {
    let m = as_obj(v, path)?;
    only_keys(m, &["matrix", "sources", "space", "targets"], path)?;
    let space = poset_from_doc(get(m, "space", path)?, &format!("{path}.space"))?;
    let family = |key: &str| -> Result<Vec<Vec<usize>>> {
        let fp = format!("{path}.{key}");
        as_arr(get(m, key, path)?, &fp)?
            .iter()
            .enumerate()
            .map(|(i, sv)| {
                let p = format!("{fp}[{i}]");
                labels_to_indices(as_arr(sv, &p)?, &space, &p)
            })
            .collect()
    };
    let sources = family("sources")?;
    let targets = family("targets")?;
    let mp = format!("{path}.matrix");
    let raw = matrix_from_doc(get(m, "matrix", path)?, &mp)?;
    let matrix = shaped(raw, targets.len(), sources.len(), &mp)?;
    CombinatorialMap::new(space, sources, targets, matrix).map_err(|e| bad(path, e))
}

/// `T1` and `S1` index the sources and targets of the map the certificate is
/// about; `stratum` lists element labels of its space.
pub fn certificate_to_doc(cert: &ClosedImageCertificate, space: &FinPoset) -> Value {
    let steps: Vec<Value> = cert
        .steps
        .iter()
        .map(|s| {
            json!({
                "Mbar": matrix_to_doc(&s.mbar),
                "Nbar": matrix_to_doc(&s.nbar),
                "S1": s.s1,
                "T1": s.t1,
                "stratum": index_set_doc(&s.stratum, space),
            })
        })
        .collect();
    json!({ "steps": steps })
}

pub fn certificate_from_doc(
    v: &Value,
    space: &FinPoset,
    path: &str,
) -> Result<ClosedImageCertificate> {
    let m = as_obj(v, path)?;
    only_keys(m, &["steps"], path)?;
    let sp = format!("{path}.steps");
    let mut steps = Vec::new();
    for (i, sv) in as_arr(get(m, "steps", path)?, &sp)?.iter().enumerate() {
        let p = format!("{sp}[{i}]");
        let s = as_obj(sv, &p)?;
        only_keys(s, &["Mbar", "Nbar", "S1", "T1", "stratum"], &p)?;
        let zp = format!("{p}.stratum");
        let mut stratum = labels_to_indices(as_arr(get(s, "stratum", &p)?, &zp)?, space, &zp)?;
        stratum.sort_unstable();
        let indices = |key: &str| -> Result<Vec<usize>> {
            let ip = format!("{p}.{key}");
            as_arr(get(s, key, &p)?, &ip)?
                .iter()
                .enumerate()
                .map(|(j, e)| as_usize(e, &format!("{ip}[{j}]")))
                .collect()
        };
        let t1 = indices("T1")?;
        let s1 = indices("S1")?;
        let mp = format!("{p}.Mbar");
        let mbar = shaped(matrix_from_doc(get(s, "Mbar", &p)?, &mp)?, s1.len(), t1.len(), &mp)?;
        let np = format!("{p}.Nbar");
        let nbar = shaped(matrix_from_doc(get(s, "Nbar", &p)?, &np)?, t1.len(), s1.len(), &np)?;
        steps.push(CertificateStep { stratum, t1, s1, mbar, nbar });
    }
    Ok(ClosedImageCertificate { steps })
}

/// The mask is stored per base row as `[start, length]` runs of fiber nodes;
/// `steps` counts nodes as `[base, fiber]`.
pub fn region_to_doc(r: &GridRegion) -> Value {
    let base = match r.base() {
        GridBase::Point => Value::String("point".to_string()),
        GridBase::Interval { a, b } => json!([a, b]),
    };
    let mask: Vec<Value> = (0..r.rows())
        .map(|i| {
            Value::Array(r.runs(i).into_iter().map(|(s, e)| json!([s, e - s + 1])).collect())
        })
        .collect();
    json!({ "base": base, "mask": mask, "steps": [r.rows(), r.cols()], "window": r.window() })
}

pub fn region_from_doc(v: &Value, path: &str) -> Result<GridRegion> {
    let m = as_obj(v, path)?;
    only_keys(m, &["base", "mask", "steps", "window"], path)?;
    let bp = format!("{path}.base");
    let base = match get(m, "base", path)? {
        Value::String(s) if s == "point" => GridBase::Point,
        Value::Array(ends) if ends.len() == 2 => GridBase::Interval {
            a: as_f64(&ends[0], &format!("{bp}[0]"))?,
            b: as_f64(&ends[1], &format!("{bp}[1]"))?,
        },
        _ => return Err(bad(&bp, "base is \"point\" or an [a, b] interval")),
    };
    let np = format!("{path}.steps");
    let nodes = as_arr(get(m, "steps", path)?, &np)?;
    if nodes.len() != 2 {
        return Err(bad(&np, "steps is a [base, fiber] node-count pair"));
    }
    let rows = as_usize(&nodes[0], &format!("{np}[0]"))?;
    let cols = as_usize(&nodes[1], &format!("{np}[1]"))?;
    let window = as_f64(get(m, "window", path)?, &format!("{path}.window"))?;
    let kp = format!("{path}.mask");
    let rows_doc = as_arr(get(m, "mask", path)?, &kp)?;
    if rows_doc.len() != rows {
        return Err(bad(&kp, format!("mask needs one run list per base row, {rows} total")));
    }
    let mut mask = vec![false; rows * cols];
    for (i, rv) in rows_doc.iter().enumerate() {
        let rp = format!("{kp}[{i}]");
        for (j, run) in as_arr(rv, &rp)?.iter().enumerate() {
            let up = format!("{rp}[{j}]");
            let pair = as_arr(run, &up)?;
            if pair.len() != 2 {
                return Err(bad(&up, "a run is a [start, length] pair"));
            }
            let start = as_usize(&pair[0], &format!("{up}[0]"))?;
            let len = as_usize(&pair[1], &format!("{up}[1]"))?;
            if len == 0 {
                return Err(bad(&up, "runs are nonempty"));
            }
            if start + len > cols {
                return Err(bad(&up, "run leaves the fiber grid"));
            }
            for k in start..start + len {
                if mask[i * cols + k] {
                    return Err(bad(&up, "mask runs overlap"));
                }
                mask[i * cols + k] = true;
            }
        }
    }
    GridRegion::new(base, rows, window, cols, mask).map_err(|e| bad(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::BddChainComplex;
    use crate::cosheaf::{certify_closed_image, verify_certificate};
    use crate::linalg::{rat, ratio};

    fn roundtrip(doc: &Value, reparse: impl Fn(&Value) -> Value) {
        let text = to_canonical_string(doc);
        let back = parse(&text).unwrap();
        assert_eq!(&back, doc, "canonical text loses structure");
        assert_eq!(to_canonical_string(&reparse(&back)), text, "not a parse-print fixed point");
    }

    fn fence() -> FinPoset {
        FinPoset::from_covers(
            vec!["a".into(), "b".into(), "m".into()],
            &[("a".into(), "m".into()), ("b".into(), "m".into())],
        )
        .unwrap()
    }

    #[test]
    fn monotone_map_doc_roundtrips() {
        let f = MonotoneMap::constant(fence(), FinPoset::singleton("pt"), 0).unwrap();
        let doc = monotone_map_to_doc(&f);
        roundtrip(&doc, |v| {
            monotone_map_to_doc(&monotone_map_from_doc(v, "$").unwrap())
        });
        let broken = json!({
            "map": { "a": "pt", "b": "pt" },
            "source": poset_to_doc(&fence()),
            "target": poset_to_doc(&FinPoset::singleton("pt")),
        });
        let err = monotone_map_from_doc(&broken, "$").unwrap_err();
        assert!(err.to_string().contains("no image"), "got {err}");
    }

    #[test]
    fn rationals_print_reduced_and_parse_back() {
        assert_eq!(rational_to_string(&rat(5)), "5");
        assert_eq!(rational_to_string(&ratio(-3, 6)), "-1/2");
        assert_eq!(rational_from_str("-3/6", "$").unwrap(), ratio(-1, 2));
        assert_eq!(rational_from_str("7", "$").unwrap(), rat(7));
        assert_eq!(rational_from_str("4/-2", "$").unwrap(), rat(-2));
        assert!(rational_from_str("1/0", "$").is_err());
        assert!(rational_from_str("x", "$").is_err());
    }

    #[test]
    fn matrices_roundtrip_including_empty_shapes() {
        let m = RatMatrix::from_ints(&[&[1, -2], &[0, 3]]);
        assert_eq!(matrix_from_doc(&matrix_to_doc(&m), "$").unwrap(), m);

        let tall = RatMatrix::zeros(3, 0);
        let doc = matrix_to_doc(&tall);
        assert_eq!(matrix_from_doc(&doc, "$").unwrap(), tall);

        let wide = matrix_from_doc(&json!([]), "$").unwrap();
        assert_eq!((wide.rows(), wide.cols()), (0, 0));
        assert_eq!(shaped(wide, 0, 4, "$").unwrap(), RatMatrix::zeros(0, 4));
        assert!(shaped(RatMatrix::zeros(0, 0), 2, 2, "$").is_err());
    }

    #[test]
    fn poset_docs_are_canonical() {
        let scrambled = FinPoset::from_covers(
            vec!["z".into(), "a".into(), "k".into()],
            &[("a".into(), "z".into()), ("a".into(), "k".into())],
        )
        .unwrap();
        let doc = poset_to_doc(&scrambled);
        assert_eq!(
            doc,
            json!({ "covers": [["a", "k"], ["a", "z"]], "elements": ["a", "k", "z"] })
        );
        roundtrip(&doc, |v| poset_to_doc(&poset_from_doc(v, "$").unwrap()));
        let back = poset_from_doc(&doc, "$").unwrap();
        for x in scrambled.labels() {
            for y in scrambled.labels() {
                assert_eq!(
                    scrambled.leq(scrambled.index_of(x).unwrap(), scrambled.index_of(y).unwrap()),
                    back.leq(back.index_of(x).unwrap(), back.index_of(y).unwrap()),
                );
            }
        }
    }

    #[test]
    fn complex_docs_roundtrip() {
        let c = BddChainComplex::new(
            -1,
            vec![2, 1],
            vec![RatMatrix::from_ints(&[&[1], &[-1]])],
        )
        .unwrap();
        let doc = complex_to_doc(&c);
        assert_eq!(complex_from_doc(&doc, "$").unwrap(), c);
        roundtrip(&doc, |v| complex_to_doc(&complex_from_doc(v, "$").unwrap()));

        let z = complex_to_doc(&BddChainComplex::zero());
        assert_eq!(complex_from_doc(&z, "$").unwrap(), BddChainComplex::zero());
    }

    #[test]
    fn representation_docs_roundtrip() {
        let base = fence();
        let a = base.index_of("a").unwrap();
        let b = base.index_of("b").unwrap();
        let m = base.index_of("m").unwrap();
        let mut stalks = vec![BddChainComplex::zero(); 3];
        stalks[a] = BddChainComplex::unit();
        stalks[b] = BddChainComplex::concentrated(0, 2);
        stalks[m] = BddChainComplex::unit();
        let mut cover_maps = BTreeMap::new();
        cover_maps.insert((a, m), DegreeMaps::from([(0, RatMatrix::identity(1))]));
        cover_maps.insert((b, m), DegreeMaps::from([(0, RatMatrix::from_ints(&[&[1, -1]]))]));
        let rep = PosetRep::new(base, stalks, &cover_maps).unwrap();

        let doc = representation_to_doc(&rep);
        roundtrip(&doc, |v| representation_to_doc(&representation_from_doc(v, "$").unwrap()));
        let back = representation_from_doc(&doc, "$").unwrap();
        assert_eq!(back.transition_at(b, m, 0), RatMatrix::from_ints(&[&[1, -1]]));
        assert_eq!(back.stalk(b).dim_at(0), 2);
    }

    #[test]
    fn pseudo_free_docs_roundtrip() {
        let base = fence();
        let a = base.index_of("a").unwrap();
        let b = base.index_of("b").unwrap();
        let m = base.index_of("m").unwrap();
        let c = PseudoFreeComplex::new(
            base,
            0,
            vec![vec![a, b], vec![m]],
            vec![RatMatrix::from_ints(&[&[1], &[-1]])],
        )
        .unwrap();
        let doc = pseudo_free_to_doc(&c);
        roundtrip(&doc, |v| pseudo_free_to_doc(&pseudo_free_from_doc(v, "$").unwrap()));
        let back = pseudo_free_from_doc(&doc, "$").unwrap();
        assert_eq!(back.lo(), 0);
        assert_eq!(back.terms(), c.terms());
        assert_eq!(back.diff(0), c.diff(0));
    }

    #[test]
    fn simplicial_docs_roundtrip() {
        let c = AlmostSimplicialComplex::from_named(
            &["p", "q", "r"],
            &[&["p", "q"], &["q", "r"]],
        )
        .unwrap();
        let doc = simplicial_to_doc(&c);
        roundtrip(&doc, |v| simplicial_to_doc(&simplicial_from_doc(v, "$").unwrap()));
        assert_eq!(simplicial_from_doc(&doc, "$").unwrap().simplices(), c.simplices());
    }

    #[test]
    fn stratification_docs_roundtrip() {
        let space = fence();
        let strata = FinPoset::chain(2);
        let assignment = vec![0, 0, 1];
        let f = MonotoneMap::new(space, strata, assignment).unwrap();
        let s = Stratification::new(f);
        let doc = stratification_to_doc(&s);
        roundtrip(&doc, |v| stratification_to_doc(&stratification_from_doc(v, "$").unwrap()));
        let back = stratification_from_doc(&doc, "$").unwrap();
        assert_eq!(back.map().apply(back.space().index_of("m").unwrap()), 1);
    }

    #[test]
    fn combinatorial_map_and_certificate_docs_roundtrip() {
        let x = FinPoset::from_covers(
            vec!["a".into(), "b".into(), "e".into()],
            &[("a".into(), "e".into()), ("b".into(), "e".into())],
        )
        .unwrap();
        let sources = vec![vec![2]];
        let targets = vec![vec![0, 2], vec![1, 2]];
        let matrix = RatMatrix::from_ints(&[&[1], &[-1]]);
        let f = CombinatorialMap::new(x.clone(), sources, targets, matrix).unwrap();

        let mdoc = combinatorial_map_to_doc(&f);
        roundtrip(&mdoc, |v| {
            combinatorial_map_to_doc(&combinatorial_map_from_doc(v, "$").unwrap())
        });
        let fback = combinatorial_map_from_doc(&mdoc, "$").unwrap();
        assert_eq!(fback.matrix(), f.matrix());

        let cert = certify_closed_image(&f).unwrap();
        let cdoc = certificate_to_doc(&cert, &x);
        roundtrip(&cdoc, |v| certificate_to_doc(&certificate_from_doc(v, &x, "$").unwrap(), &x));
        let cback = certificate_from_doc(&cdoc, &x, "$").unwrap();
        assert!(verify_certificate(&fback, &cback));
    }

    #[test]
    fn certificate_docs_restore_empty_matrix_shapes() {
        let x = FinPoset::chain(2);
        let f = CombinatorialMap::new(x.clone(), vec![vec![1], vec![0, 1]], vec![], RatMatrix::zeros(0, 2))
            .unwrap();
        let cert = certify_closed_image(&f).unwrap();
        assert!(cert.steps.iter().any(|s| !s.t1.is_empty() && s.s1.is_empty()));
        let doc = certificate_to_doc(&cert, &x);
        let back = certificate_from_doc(&doc, &x, "$").unwrap();
        for (orig, parsed) in cert.steps.iter().zip(&back.steps) {
            assert_eq!(orig.mbar, parsed.mbar);
            assert_eq!(orig.nbar, parsed.nbar);
        }
        assert!(verify_certificate(&f, &back));
    }

    #[test]
    fn region_docs_roundtrip() {
        let r = GridRegion::from_predicate(
            GridBase::Interval { a: -1.0, b: 1.0 },
            3,
            2.0,
            9,
            |y, t| t.abs() < 1.5 && !(y > 0.0 && t == 0.0),
        )
        .unwrap();
        let doc = region_to_doc(&r);
        roundtrip(&doc, |v| region_to_doc(&region_from_doc(v, "$").unwrap()));
        let back = region_from_doc(&doc, "$").unwrap();
        assert_eq!(back.mask(), r.mask());
        assert_eq!(back.base(), r.base());
        assert_eq!(back.window(), r.window());

        let line = GridRegion::full_line(2.0, 5);
        let ldoc = region_to_doc(&line);
        assert_eq!(region_from_doc(&ldoc, "$").unwrap().mask(), line.mask());
    }

    #[test]
    fn parse_errors_name_the_offending_path() {
        let doc = json!({ "differentials": [], "dims": [1, "x"], "lo": 0 });
        let err = complex_from_doc(&doc, "$").unwrap_err().to_string();
        assert!(err.contains("$.dims[1]"), "got: {err}");

        let doc = json!({ "covers": [["a"]], "elements": ["a"] });
        let err = poset_from_doc(&doc, "$").unwrap_err().to_string();
        assert!(err.contains("$.covers[0]"), "got: {err}");

        let doc = json!({ "covers": [], "elements": ["a"], "extra": 1 });
        let err = poset_from_doc(&doc, "$").unwrap_err().to_string();
        assert!(err.contains("unknown key"), "got: {err}");
    }
}

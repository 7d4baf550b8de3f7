//! Exchange formats: the version-tagged JSON complex file (with optional
//! realization block), the trajectory CSV, and fixed-width float formatting.
//!
//! Floats are written with 17 significant digits so that serialize/parse
//! round-trips are bit exact and identical runs produce identical bytes.

use crate::complex::{Corner, Edge, PeriodicComplex, Triangle};
use crate::flex::FlexPath;
use crate::lattice::LatticeVector;
use crate::realization::{GramMatrix, Realization};
use nalgebra::Vector3;
use serde_json::Value;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("unsupported format version {0}")]
    Version(u64),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// 17-significant-digit decimal form; parses back to the identical bits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_edge_list(out: &mut String, edges: impl Iterator<Item = Edge>) {
    let mut first = true;
    for e in edges {
        if !first {
            out.push(',');
        }
        first = false;
        let s = e.shift();
        let _ = write!(out, "[{},{},{},{}]", e.u(), e.v(), s.m, s.k);
    }
}

fn write_vec3(out: &mut String, v: &Vector3<f64>) {
    let _ = write!(
        out,
        "[{},{},{}]",
        format_f64(v.x),
        format_f64(v.y),
        format_f64(v.z)
    );
}

/// Serializes a complex (and optionally its realization) to the exchange
/// format. Output is deterministic: simplices in canonical order, floats at
/// 17 significant digits.
pub fn write_complex_json(c: &PeriodicComplex, realization: Option<&Realization>) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"version\":1,\"n_orbits\":{}", c.n_orbits());
    out.push_str(",\"edges\":[");
    write_edge_list(&mut out, c.edges().iter().copied());
    out.push_str("],\"triangles\":[");
    let mut first = true;
    for t in c.triangles() {
        if !first {
            out.push(',');
        }
        first = false;
        out.push('[');
        for (i, corner) in t.corners().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "{},{},{}",
                corner.orbit, corner.shift.m, corner.shift.k
            );
        }
        out.push(']');
    }
    out.push_str("],\"aux\":[");
    write_edge_list(&mut out, c.aux_constraints().iter().copied());
    out.push(']');
    if let Some(r) = realization {
        out.push_str(",\"realization\":{\"positions\":[");
        for (i, p) in r.positions.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_vec3(&mut out, p);
        }
        out.push_str("],\"a\":");
        write_vec3(&mut out, &r.a);
        out.push_str(",\"b\":");
        write_vec3(&mut out, &r.b);
        out.push('}');
    }
    out.push('}');
    out
}

fn as_i64(v: &Value, what: &str) -> Result<i64, IoError> {
    v.as_i64()
        .ok_or_else(|| IoError::Parse(format!("{what}: expected integer, got {v}")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64, IoError> {
    v.as_f64()
        .ok_or_else(|| IoError::Parse(format!("{what}: expected number, got {v}")))
}

fn parse_edge_entry(v: &Value) -> Result<Edge, IoError> {
    let arr = v
        .as_array()
        .ok_or_else(|| IoError::Parse("edge entry must be an array".into()))?;
    if arr.len() != 4 {
        return Err(IoError::Parse(format!(
            "edge entry must have 4 integers, got {}",
            arr.len()
        )));
    }
    let u = as_i64(&arr[0], "edge u")?;
    let v_ = as_i64(&arr[1], "edge v")?;
    let m = as_i64(&arr[2], "edge shift m")?;
    let k = as_i64(&arr[3], "edge shift k")?;
    if u < 0 || v_ < 0 {
        return Err(IoError::Parse("edge endpoints must be non-negative".into()));
    }
    Ok(Edge::new(u as usize, v_ as usize, LatticeVector::new(m, k)))
}

fn parse_vec3(v: &Value, what: &str) -> Result<Vector3<f64>, IoError> {
    let arr = v
        .as_array()
        .ok_or_else(|| IoError::Parse(format!("{what} must be an array")))?;
    if arr.len() != 3 {
        return Err(IoError::Parse(format!("{what} must have 3 components")));
    }
    Ok(Vector3::new(
        as_f64(&arr[0], what)?,
        as_f64(&arr[1], what)?,
        as_f64(&arr[2], what)?,
    ))
}

/// Parses the exchange format.
pub fn parse_complex_json(text: &str) -> Result<(PeriodicComplex, Option<Realization>), IoError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| IoError::Parse("top level must be an object".into()))?;
    let version = obj
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| IoError::Parse("missing version".into()))?;
    if version != 1 {
        return Err(IoError::Version(version));
    }
    let n_orbits = obj
        .get("n_orbits")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| IoError::Parse("missing n_orbits".into()))? as usize;
    let edges = obj
        .get("edges")
        .and_then(|v| v.as_array())
        .ok_or_else(|| IoError::Parse("missing edges".into()))?
        .iter()
        .map(parse_edge_entry)
        .collect::<Result<Vec<_>, _>>()?;
    let aux = obj
        .get("aux")
        .and_then(|v| v.as_array())
        .map(|arr| arr.iter().map(parse_edge_entry).collect::<Result<Vec<_>, _>>())
        .transpose()?
        .unwrap_or_default();
    let mut triangles = Vec::new();
    for t in obj
        .get("triangles")
        .and_then(|v| v.as_array())
        .ok_or_else(|| IoError::Parse("missing triangles".into()))?
    {
        let arr = t
            .as_array()
            .ok_or_else(|| IoError::Parse("triangle entry must be an array".into()))?;
        if arr.len() != 9 {
            return Err(IoError::Parse(format!(
                "triangle entry must have 9 integers, got {}",
                arr.len()
            )));
        }
        let mut corners = [Corner::new(0, LatticeVector::ZERO); 3];
        for i in 0..3 {
            let orbit = as_i64(&arr[3 * i], "triangle orbit")?;
            if orbit < 0 {
                return Err(IoError::Parse("triangle orbit must be non-negative".into()));
            }
            corners[i] = Corner::new(
                orbit as usize,
                LatticeVector::new(
                    as_i64(&arr[3 * i + 1], "triangle shift m")?,
                    as_i64(&arr[3 * i + 2], "triangle shift k")?,
                ),
            );
        }
        triangles.push(Triangle::new(corners));
    }
    let complex = PeriodicComplex::new(n_orbits, edges, triangles, aux);
    let realization = match obj.get("realization") {
        None | Some(Value::Null) => None,
        Some(r) => {
            let robj = r
                .as_object()
                .ok_or_else(|| IoError::Parse("realization must be an object".into()))?;
            let positions = robj
                .get("positions")
                .and_then(|v| v.as_array())
                .ok_or_else(|| IoError::Parse("missing positions".into()))?
                .iter()
                .map(|p| parse_vec3(p, "position"))
                .collect::<Result<Vec<_>, _>>()?;
            if positions.len() != n_orbits {
                return Err(IoError::Parse(format!(
                    "expected {n_orbits} positions, got {}",
                    positions.len()
                )));
            }
            let a = parse_vec3(
                robj.get("a")
                    .ok_or_else(|| IoError::Parse("missing period a".into()))?,
                "period a",
            )?;
            let b = parse_vec3(
                robj.get("b")
                    .ok_or_else(|| IoError::Parse("missing period b".into()))?,
                "period b",
            )?;
            Some(Realization::new(positions, a, b))
        }
    };
    Ok((complex, realization))
}

/// CSV header and rows for a traced path: `t,g11,g12,g22,residual_norm`,
/// optionally followed by the flattened chart coordinates.
pub fn path_to_csv(path: &FlexPath, with_coords: bool) -> String {
    let mut out = String::from("t,g11,g12,g22,residual_norm");
    if with_coords {
        if let Some(first) = path.samples.first() {
            for i in 0..first.config.coords().len() {
                let _ = write!(out, ",c{i}");
            }
        }
    }
    out.push('\n');
    for s in &path.samples {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            format_f64(s.t),
            format_f64(s.gram.g11),
            format_f64(s.gram.g12),
            format_f64(s.gram.g22),
            format_f64(s.residual_norm)
        );
        if with_coords {
            for c in s.config.coords().iter() {
                let _ = write!(out, ",{}", format_f64(*c));
            }
        }
        out.push('\n');
    }
    out
}

/// Parses the first five columns of a trajectory CSV back into
/// `(t, gram, residual_norm)` rows. Extra columns are ignored.
pub fn parse_gram_csv(text: &str) -> Result<Vec<(f64, GramMatrix, f64)>, IoError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty CSV".into()))?;
    if !header.starts_with("t,g11,g12,g22,residual_norm") {
        return Err(IoError::Parse(format!("unexpected CSV header: {header}")));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(IoError::Parse(format!(
                "line {}: expected at least 5 fields",
                lineno + 2
            )));
        }
        let mut vals = [0.0f64; 5];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = fields[i].parse::<f64>().map_err(|e| {
                IoError::Parse(format!("line {}: bad number {:?}: {e}", lineno + 2, fields[i]))
            })?;
        }
        out.push((vals[0], GramMatrix::new(vals[1], vals[2], vals[3]), vals[4]));
    }
    Ok(out)
}

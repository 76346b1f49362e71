//! JSON documents: `{kind, payload, meta}` envelopes, canonical encoding and
//! conversion between payloads and matrices, vectors and systems.

use std::io;

use framecast::frames::FrameSystem;
use framecast::{CMat, CVec, FrameError, Tolerances};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Operator,
    Vector,
    System,
    Report,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Operator => "operator",
            Kind::Vector => "vector",
            Kind::System => "system",
            Kind::Report => "report",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "operator" => Kind::Operator,
            "vector" => Kind::Vector,
            "system" => Kind::System,
            "report" => Kind::Report,
            _ => return None,
        })
    }
}

/// Compact JSON with every float written to 17 significant digits.
struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // `-0` and `0` must not produce different bytes.
        let value = if value == 0.0 { 0.0 } else { value };
        write!(writer, "{value:.16e}")
    }
}

/// Canonical bytes of a JSON value: sorted keys, no whitespace, fixed float
/// formatting, trailing newline.
pub fn canonical_bytes(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    serde::Serialize::serialize(value, &mut ser).expect("writing to a Vec cannot fail");
    out.push(b'\n');
    out
}

pub fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A parsed input document together with the digest of its canonical form.
#[derive(Debug, Clone)]
pub struct Input {
    pub kind: Kind,
    pub payload: Value,
    pub digest: String,
}

pub fn parse_document(text: &str, expected: Kind, source: &str) -> Result<Input, CliError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Malformed(format!("{source}: invalid JSON: {e}")))?;
    let digest = digest_hex(&canonical_bytes(&value));
    let Value::Object(mut obj) = value else {
        return Err(CliError::Malformed(format!("{source}: document must be a JSON object")));
    };
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .and_then(Kind::parse)
        .ok_or_else(|| CliError::Malformed(format!("{source}: missing or unknown \"kind\"")))?;
    if kind != expected {
        return Err(CliError::Malformed(format!(
            "{source}: expected a {} document, got {}",
            expected.as_str(),
            kind.as_str()
        )));
    }
    let payload = obj
        .remove("payload")
        .ok_or_else(|| CliError::Malformed(format!("{source}: missing \"payload\"")))?;
    Ok(Input { kind, payload, digest })
}

pub fn envelope(kind: Kind, payload: Value, seed: Option<u64>, tol: &Tolerances) -> Value {
    json!({
        "kind": kind.as_str(),
        "payload": payload,
        "meta": {
            "tool_version": TOOL_VERSION,
            "seed": seed,
            "tolerances": tolerances_value(tol),
        },
    })
}

fn tolerances_value(tol: &Tolerances) -> Value {
    json!({
        "identity": tol.identity,
        "rank": tol.rank,
        "radius_margin": tol.radius_margin,
        "node_merge": tol.node_merge,
    })
}

/// Report payload: command name, input digests and the command's result.
pub fn report(command: &str, inputs: &[(&str, &Input)], result: Value) -> Value {
    let digests: Map<String, Value> = inputs
        .iter()
        .map(|(name, input)| (name.to_string(), Value::String(input.digest.clone())))
        .collect();
    json!({
        "command": command,
        "inputs": digests,
        "result": result,
    })
}

// ---- encoding ----

pub fn complex_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn vector_value(v: &CVec) -> Value {
    Value::Array(v.iter().map(|z| complex_value(*z)).collect())
}

pub fn matrix_value(m: &CMat) -> Value {
    Value::Array(
        m.row_iter()
            .map(|row| Value::Array(row.iter().map(|z| complex_value(*z)).collect()))
            .collect(),
    )
}

pub fn system_value(f: &FrameSystem) -> Value {
    json!({
        "dim": f.dim(),
        "index_origin": f.index_origin(),
        "vectors": f.vectors().iter().map(vector_value).collect::<Vec<_>>(),
    })
}

// ---- decoding ----

fn malformed(what: &str, detail: &str) -> CliError {
    CliError::Malformed(format!("{what}: {detail}"))
}

/// A scalar is either a JSON number (real) or a `[re, im]` pair.
fn complex_from(v: &Value, what: &str) -> Result<Complex64, CliError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(|| malformed(what, "number out of range")),
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64().ok_or_else(|| malformed(what, "real part is not a number"))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| malformed(what, "imaginary part is not a number"))?;
            Ok(Complex64::new(re, im))
        }
        _ => Err(malformed(what, "expected a number or a [re, im] pair")),
    }
}

fn entries(v: &Value, what: &str) -> Result<Vec<Complex64>, CliError> {
    v.as_array()
        .ok_or_else(|| malformed(what, "expected an array"))?
        .iter()
        .map(|x| complex_from(x, what))
        .collect()
}

pub fn vector_from(payload: &Value, what: &str) -> Result<CVec, CliError> {
    let xs = entries(payload, what)?;
    if xs.is_empty() {
        return Err(malformed(what, "vector is empty"));
    }
    Ok(CVec::from_vec(xs))
}

pub fn matrix_from(payload: &Value, what: &str) -> Result<CMat, CliError> {
    let rows = payload
        .as_array()
        .ok_or_else(|| malformed(what, "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(malformed(what, "matrix has no rows"));
    }
    let parsed: Vec<Vec<Complex64>> = rows.iter().map(|r| entries(r, what)).collect::<Result<_, _>>()?;
    let cols = parsed[0].len();
    if cols == 0 || parsed.iter().any(|r| r.len() != cols) {
        return Err(malformed(what, "rows must be nonempty and of equal length"));
    }
    let flat: Vec<Complex64> = parsed.into_iter().flatten().collect();
    Ok(CMat::from_row_slice(rows.len(), cols, &flat))
}

pub fn system_from(payload: &Value, what: &str) -> Result<FrameSystem, CliError> {
    let obj = payload
        .as_object()
        .ok_or_else(|| malformed(what, "expected {dim, index_origin, vectors}"))?;
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .filter(|&d| d > 0)
        .ok_or_else(|| malformed(what, "\"dim\" must be a positive integer"))? as usize;
    let origin = match obj.get("index_origin") {
        None => 0,
        Some(v) => v
            .as_i64()
            .ok_or_else(|| malformed(what, "\"index_origin\" must be an integer"))?,
    };
    let vectors = obj
        .get("vectors")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed(what, "\"vectors\" must be an array"))?;
    let mut out = Vec::with_capacity(vectors.len());
    for v in vectors {
        let x = CVec::from_vec(entries(v, what)?);
        if x.len() != dim {
            return Err(FrameError::DimensionMismatch {
                context: "system vector length",
                expected: dim,
                actual: x.len(),
            }
            .into());
        }
        out.push(x);
    }
    Ok(FrameSystem::new(dim, out, origin)?)
}

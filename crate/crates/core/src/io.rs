//! JSON file formats and deterministic float formatting.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryData, BoundaryLoop};
use crate::infinity::GermAtInfinity;
use crate::scalar::C;

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleJson {
    pub t: f64,
    pub w: [Pair; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dw: Option<[Pair; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopJson {
    pub orientation: i8,
    pub samples: Vec<SampleJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub loops: Vec<LoopJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GermJson {
    pub b: Pair,
    #[serde(default)]
    pub taylor: Vec<Pair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GermsJson {
    pub germs: Vec<GermJson>,
}

pub fn c(p: Pair) -> C<f64> {
    C::new(p[0], p[1])
}

pub fn pair(z: C<f64>) -> Pair {
    [z.re, z.im]
}

impl BoundaryJson {
    pub fn to_boundary(&self) -> Result<BoundaryData<f64>> {
        let loops = self
            .loops
            .iter()
            .map(|l| {
                let t = l.samples.iter().map(|s| s.t).collect();
                let w = l.samples.iter().map(|s| s.w.map(c)).collect();
                let with_dw = l.samples.iter().filter(|s| s.dw.is_some()).count();
                let dw = if with_dw == l.samples.len() && with_dw > 0 {
                    Some(l.samples.iter().map(|s| s.dw.unwrap().map(c)).collect())
                } else if with_dw == 0 {
                    None
                } else {
                    return Err(Error::InvalidInput("velocities given for only some samples".into()));
                };
                BoundaryLoop::new(l.orientation, t, w, dw)
            })
            .collect::<Result<Vec<_>>>()?;
        BoundaryData::new(loops)
    }
}

impl GermsJson {
    pub fn to_germs(&self) -> Vec<GermAtInfinity<f64>> {
        self.germs
            .iter()
            .map(|g| GermAtInfinity {
                b: c(g.b),
                taylor: g.taylor.iter().map(|&p| c(p)).collect(),
            })
            .collect()
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn read_boundary(path: &std::path::Path) -> Result<BoundaryData<f64>> {
    read_json::<BoundaryJson>(path)?.to_boundary()
}

/// Float with 17 significant digits; integers stay integers.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

/// Serializes JSON with every float written to 17 significant digits and
/// object keys in sorted order, so repeated runs are byte-identical.
pub fn to_string_17(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out, 0);
    out.push('\n');
    out
}

fn write_value(v: &Value, out: &mut String, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(a) => {
            let flat = a.iter().all(|x| !x.is_array() && !x.is_object());
            if flat {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, out, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, x) in a.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    write_value(x, out, indent + 1);
                    if i + 1 < a.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad(indent));
                out.push(']');
            }
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&m[*k], out, indent + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

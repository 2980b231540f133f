//! Analytic fixture curves with closed-form answers.
//!
//! * interior line: `Q = {(1 : t : 1 + a t), |t| < 1}`, one sheet, `δ = 1`;
//! * exterior line: the complementary piece `|t| > 1` plus its point at
//!   infinity, reversed boundary, `δ = −1`;
//! * two lines: two interior-line discs meeting at a node, `δ = 2`;
//! * conic: `Q = {(1 : t : t²), |t| < 1}`.

use crate::error::{Error, Result};
use crate::infinity::GermAtInfinity;
use crate::io::{pair, BoundaryJson, LoopJson, SampleJson};
use crate::scalar::C;

pub const DEFAULT_SAMPLES: usize = 1024;

fn circle_loop(n: usize, orientation: i8, f: impl Fn(C<f64>) -> ([C<f64>; 3], [C<f64>; 3])) -> LoopJson {
    let samples = (0..n)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let e = C::new(t.cos(), t.sin());
            let (w, dw) = f(e);
            SampleJson {
                t,
                w: w.map(pair),
                dw: Some(dw.map(pair)),
            }
        })
        .collect();
    LoopJson { orientation, samples }
}

fn line_loop(a: f64, n: usize, orientation: i8) -> LoopJson {
    let one = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    circle_loop(n, orientation, |e| {
        ([one, e, one + e * a], [C::new(0.0, 0.0), i * e, i * e * a])
    })
}

pub fn interior_line(a: f64, n: usize) -> BoundaryJson {
    BoundaryJson {
        loops: vec![line_loop(a, n, 1)],
    }
}

pub fn exterior_line(a: f64, n: usize) -> BoundaryJson {
    BoundaryJson {
        loops: vec![line_loop(a, n, -1)],
    }
}

/// Germ of the exterior line at its point `(0 : 1/a : 1)`: `u1 = (1 − u0)/a`.
pub fn exterior_line_germ(a: f64) -> GermAtInfinity<f64> {
    GermAtInfinity {
        b: C::new(1.0 / a, 0.0),
        taylor: vec![C::new(-1.0 / a, 0.0)],
    }
}

pub fn two_line(a: f64, b: f64, n: usize) -> BoundaryJson {
    BoundaryJson {
        loops: vec![line_loop(a, n, 1), line_loop(b, n, 1)],
    }
}

pub fn conic(n: usize) -> BoundaryJson {
    let one = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    BoundaryJson {
        loops: vec![circle_loop(n, 1, |e| {
            ([one, e, e * e], [C::new(0.0, 0.0), i * e, i * e * e * 2.0])
        })],
    }
}

/// Fixture by name with default parameters `a = ½`, `b = −⅓`.
pub fn by_name(name: &str, a: Option<f64>, b: Option<f64>, n: usize) -> Result<BoundaryJson> {
    let a = a.unwrap_or(0.5);
    let b = b.unwrap_or(-1.0 / 3.0);
    match name {
        "interior-line" => Ok(interior_line(a, n)),
        "exterior-line" => Ok(exterior_line(a, n)),
        "two-line" | "two-line-nodal" => Ok(two_line(a, b, n)),
        "conic" => Ok(conic(n)),
        other => Err(Error::UnknownOracle(other.to_string())),
    }
}

pub const NAMES: [&str; 4] = ["interior-line", "exterior-line", "two-line", "conic"];

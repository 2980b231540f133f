//! Chern-connection boundary integrals on disc and annulus charts.
//!
//! For `ω = f dζ` and `μ = λ (i/2) dζ∧dζ̄`, `h*(ω) = |f|/√λ`. On a circle of
//! radius `r`, `(1/2πi)∮ ∂ ln h*² = (r/4π)∮ ∂_r ln h*² dθ`, the tangential part
//! integrating to zero.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::{cis, from_usize, lit, to_f64, Real, C};

/// Largest `|∂λ/∂r|` on the boundary accepted as tangent.
pub const TANGENCY_TOL: f64 = 1e-6;
/// Distance from an integer accepted by [`q_infinity_estimate`].
pub const Q_GUARD: f64 = 1e-3;

/// Volume density `λ` in `μ = λ (i/2) dζ∧dζ̄`.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda<S: Real> {
    Flat,
    /// `(1 + |ζ|²)^{−2}`.
    FubiniStudy,
    /// `exp(Σ c_k |ζ|^k)`.
    LogRadial(Vec<S>),
    /// `e^{2κ(|ζ|)} λ` with `κ(r) = Σ k_j r^j`.
    Conformal {
        base: Box<Lambda<S>>,
        kappa: Vec<S>,
    },
}

fn radial_poly<S: Real>(c: &[S], r: S) -> S {
    c.iter().rev().fold(S::zero(), |a, &k| a * r + k)
}

impl<S: Real> Lambda<S> {
    pub fn eval(&self, z: C<S>) -> S {
        let r = z.norm();
        match self {
            Lambda::Flat => S::one(),
            Lambda::FubiniStudy => (S::one() + r * r).powi(-2),
            Lambda::LogRadial(c) => radial_poly(c, r).exp(),
            Lambda::Conformal { base, kappa } => base.eval(z) * (radial_poly(kappa, r) * lit(2.0)).exp(),
        }
    }
}

/// JSON form of a `λ` file: `{"log_radial": [c0, c1, …]}`.
#[derive(Debug, Clone, Deserialize)]
pub struct LambdaFile {
    pub log_radial: Vec<f64>,
}

/// `ω = f dζ` with `f(ζ) = Σ c ζ^k` (Laurent exponents allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaForm<S: Real> {
    pub terms: Vec<(i32, C<S>)>,
}

impl<S: Real> OmegaForm<S> {
    /// `ζ^k dζ`.
    pub fn monomial(k: i32) -> Self {
        OmegaForm {
            terms: vec![(k, C::new(S::one(), S::zero()))],
        }
    }

    pub fn eval(&self, z: C<S>) -> C<S> {
        self.terms
            .iter()
            .fold(C::new(S::zero(), S::zero()), |a, &(k, c)| a + c * z.powi(k))
    }

    /// Parses `dz`, `z dz`, `z^k dz` (spaces ignored, `ζ` accepted for `z`).
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .replace('ζ', "z");
        let body = s
            .strip_suffix("dz")
            .ok_or_else(|| Error::InvalidInput(format!("form '{text}' must end in dz")))?;
        let k = match body {
            "" | "1" => 0,
            "z" => 1,
            _ => body
                .strip_prefix("z^")
                .and_then(|e| e.parse::<i32>().ok())
                .ok_or_else(|| Error::InvalidInput(format!("cannot parse form '{text}'")))?,
        };
        Ok(Self::monomial(k))
    }
}

/// Chart shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart<S: Real> {
    Disc { radius: S },
    Annulus { inner: S, outer: S },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel<S: Real> {
    pub chart: Chart<S>,
    pub lambda: Lambda<S>,
    /// Trapezoid nodes per boundary circle.
    pub nodes: usize,
}

/// Per-circle data: radius, orientation, and the inward radial direction.
struct Circle<S> {
    radius: S,
    orient: S,
}

impl<S: Real> SurfaceModel<S> {
    pub fn new(chart: Chart<S>, lambda: Lambda<S>, nodes: usize) -> Result<Self> {
        let ok = match chart {
            Chart::Disc { radius } => radius > S::zero(),
            Chart::Annulus { inner, outer } => inner > S::zero() && outer > inner,
        };
        if !ok || nodes < 8 {
            return Err(Error::InvalidInput("chart radii or node count invalid".into()));
        }
        Ok(SurfaceModel { chart, lambda, nodes })
    }

    fn circles(&self) -> Vec<Circle<S>> {
        match self.chart {
            Chart::Disc { radius } => vec![Circle {
                radius,
                orient: S::one(),
            }],
            Chart::Annulus { inner, outer } => vec![
                Circle {
                    radius: outer,
                    orient: S::one(),
                },
                Circle {
                    radius: inner,
                    orient: -S::one(),
                },
            ],
        }
    }

    fn step(&self) -> S {
        let scale = match self.chart {
            Chart::Disc { radius } => radius,
            Chart::Annulus { inner, outer } => (outer - inner).min(outer),
        };
        scale * lit(1e-3)
    }

    /// Largest `|∂λ/∂r|` over the boundary nodes.
    pub fn tangency_defect(&self) -> S {
        let mut worst = S::zero();
        let h = self.step();
        for c in self.circles() {
            for j in 0..self.nodes {
                let e = cis(self.angle(j));
                let d = radial_derivative(|r| Ok(self.lambda.eval(e * r)), c.radius, -c.orient, h).unwrap_or(S::zero());
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    fn angle(&self, j: usize) -> S {
        (S::PI() + S::PI()) * from_usize::<S>(j) / from_usize::<S>(self.nodes)
    }
}

/// Fourth-order one-sided `d/dr` at `r0`, sampling towards `dir · r`.
fn radial_derivative<S: Real>(f: impl Fn(S) -> Result<S>, r0: S, dir: S, h: S) -> Result<S> {
    const W: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let mut acc = S::zero();
    for (k, w) in W.iter().enumerate() {
        acc = acc + lit::<S>(*w) * f(r0 + dir * h * from_usize::<S>(k))?;
    }
    Ok(dir * acc / (lit::<S>(12.0) * h))
}

/// `h*(ω)` at the given chart points.
pub fn hstar<S: Real>(omega: &OmegaForm<S>, lambda: &Lambda<S>, points: &[C<S>]) -> Vec<S> {
    points
        .iter()
        .map(|&z| omega.eval(z).norm() / lambda.eval(z).sqrt())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChernIntegral<S: Real> {
    pub value: S,
    /// Contribution of each boundary circle, outer first.
    pub per_circle: Vec<S>,
    pub tangency_defect: S,
    pub tangent: bool,
}

/// `(1/2πi)∮_{∂M} ∂ ln h*(ω)²`. Tangency of `λ` is reported, not enforced.
pub fn chern_boundary_integral<S: Real>(omega: &OmegaForm<S>, model: &SurfaceModel<S>) -> Result<ChernIntegral<S>> {
    let h = model.step();
    let four_pi = lit::<S>(4.0) * S::PI();
    let dth = (S::PI() + S::PI()) / from_usize::<S>(model.nodes);
    let mut per_circle = Vec::new();
    for c in model.circles() {
        let mut acc = S::zero();
        for j in 0..model.nodes {
            let e = cis(model.angle(j));
            let u = |r: S| -> Result<S> {
                let z = e * r;
                let f2 = omega.eval(z).norm_sqr();
                if f2.sqrt() <= lit(1e-12) {
                    return Err(Error::ZeroOnBoundary);
                }
                Ok(f2.ln() - model.lambda.eval(z).ln())
            };
            acc = acc + radial_derivative(u, c.radius, -c.orient, h)?;
        }
        per_circle.push(c.orient * c.radius * acc * dth / four_pi);
    }
    let tangency_defect = model.tangency_defect();
    Ok(ChernIntegral {
        value: per_circle.iter().fold(S::zero(), |a, &b| a + b),
        per_circle,
        tangent: to_f64(tangency_defect) < TANGENCY_TOL,
        tangency_defect,
    })
}

/// Genus of the double of a surface of genus `g` with `c` boundary circles.
pub fn genus_of_double(g: u64, c: u64) -> Result<u64> {
    if c == 0 {
        return Err(Error::InvalidInput("a bordered surface needs c ≥ 1".into()));
    }
    Ok(2 * g + c - 1)
}

/// `q∞ = integral + 2g − 2 + c`, rounded with a guard.
pub fn q_infinity_estimate(integral: f64, g: u64, c: u64) -> Result<i64> {
    let v = integral + 2.0 * g as f64 - 2.0 + c as f64;
    let n = v.round();
    if (v - n).abs() > Q_GUARD || !v.is_finite() {
        return Err(Error::RoundingGuard {
            what: "q_infinity",
            value: v,
        });
    }
    Ok(n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(l: Lambda<f64>) -> SurfaceModel<f64> {
        SurfaceModel::new(Chart::Disc { radius: 1.0 }, l, 64).unwrap()
    }

    #[test]
    fn parse_forms() {
        assert_eq!(OmegaForm::<f64>::parse("dz").unwrap(), OmegaForm::monomial(0));
        assert_eq!(OmegaForm::<f64>::parse("z dz").unwrap(), OmegaForm::monomial(1));
        assert_eq!(OmegaForm::<f64>::parse("z^-2 dz").unwrap(), OmegaForm::monomial(-2));
        assert!(OmegaForm::<f64>::parse("z^q dz").is_err());
    }

    #[test]
    fn hstar_examples() {
        let pts: [C<f64>; 2] = [C::new(0.3, 0.4), C::new(-1.0, 0.0)];
        let flat: Vec<f64> = hstar(&OmegaForm::monomial(0), &Lambda::Flat, &pts);
        assert!(flat.iter().all(|h| (h - 1.0).abs() < 1e-15));
        let fs: Vec<f64> = hstar(&OmegaForm::monomial(0), &Lambda::FubiniStudy, &pts);
        for (h, z) in fs.iter().zip(pts) {
            assert!((h * h - (1.0 + z.norm_sqr()).powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn disc_records() {
        let flat = chern_boundary_integral(&OmegaForm::monomial(0), &disc(Lambda::Flat)).unwrap();
        assert!(flat.value.abs() < 1e-9 && flat.tangent);
        let fs = chern_boundary_integral(&OmegaForm::monomial(0), &disc(Lambda::FubiniStudy)).unwrap();
        assert!((fs.value - 1.0).abs() < 1e-9 && !fs.tangent);
    }

    #[test]
    fn zero_on_boundary() {
        let m = SurfaceModel::new(Chart::Annulus { inner: 0.5, outer: 1.0 }, Lambda::Flat, 16).unwrap();
        let om = OmegaForm {
            terms: vec![(1, C::new(1.0, 0.0)), (0, C::new(-0.5, 0.0))],
        };
        assert_eq!(chern_boundary_integral(&om, &m), Err(Error::ZeroOnBoundary));
    }

    #[test]
    fn double_and_q_inf() {
        assert_eq!(genus_of_double(0, 1), Ok(0));
        assert_eq!(genus_of_double(2, 3), Ok(6));
        assert_eq!(q_infinity_estimate(0.0, 1, 1), Ok(1));
        assert!(matches!(
            q_infinity_estimate(0.4, 0, 1),
            Err(Error::RoundingGuard { .. })
        ));
    }
}

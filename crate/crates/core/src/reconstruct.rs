//! Fibers `Q ∩ L_z` from the indicators, the swept point cloud and the
//! rationality test on `G_1`.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{in_z, m_of_y, rho, BoundaryData, LineParam, ProjPoint, M_DEFLATION};
use crate::indicators::{g_many, sheet_count};
use crate::infinity::{pk_family, GermAtInfinity, RationalAffinePoly};
use crate::linalg::{lstsq, vec_norm, Mat};
use crate::linsys::{fit_infinity, FitResult, FitSetup, Solution, DEFAULT_R_MAX};
use crate::poly::Poly;
use crate::scalar::{cis, cone, czero, from_usize, lit, to_f64, Real, C};
use crate::series::Trunc;
use crate::shock::{shock_residual, system_residual, ZGrid};
use crate::symmetric::{discriminant, is_near_degenerate, monic_from_elementary, power_to_elementary, roots};

/// Chordal radius under which two cloud points are merged.
pub const MERGE_EPS: f64 = 1e-6;

fn p_at<S: Real>(pk: Option<&[RationalAffinePoly<S>]>, k: usize, z: &LineParam<S>) -> Result<C<S>> {
    match pk {
        None => Ok(czero()),
        Some(f) => f
            .get(k)
            .map(|p| p.eval(z.x, z.y))
            .ok_or_else(|| Error::InvalidInput(format!("P_{k} missing from the family"))),
    }
}

/// `N_{Q,k}(z) = G_k(z) − P_k(z)`; `pk = None` means `Q` has no points on `{w0 = 0}`.
pub fn n_qk<S: Real>(
    b: &BoundaryData<S>,
    z: &LineParam<S>,
    k: usize,
    pk: Option<&[RationalAffinePoly<S>]>,
) -> Result<C<S>> {
    check_z(b, z)?;
    Ok(g_many(b, z, k)?[k] - p_at(pk, k, z)?)
}

fn check_z<S: Real>(b: &BoundaryData<S>, z: &LineParam<S>) -> Result<()> {
    if !in_z(b, z) {
        let r = rho(b);
        if z.y.norm() <= r {
            return Err(Error::OutsideDomain {
                y_abs: to_f64(z.y.norm()),
                rho: to_f64(r),
            });
        }
        return Err(Error::InvalidInput(format!(
            "|x| = {} outside the admissible disc for this y",
            to_f64(z.x.norm())
        )));
    }
    Ok(())
}

/// Intersection of `Q` with `L_z = {x w0 + y w1 + w2 = 0}`.
#[derive(Debug, Clone)]
pub struct FiberResult<S: Real> {
    pub z: LineParam<S>,
    /// Roots `h_j(z)`: the `w1/w0` coordinates of the intersection points.
    pub roots: Vec<C<S>>,
    pub points: Vec<ProjPoint<S>>,
    pub discriminant: C<S>,
    /// `G_0(z) − P_0(z)`, which must round to `p`.
    pub n0: C<S>,
}

pub fn fiber<S: Real>(
    b: &BoundaryData<S>,
    z: &LineParam<S>,
    p: usize,
    pk: Option<&[RationalAffinePoly<S>]>,
) -> Result<FiberResult<S>> {
    check_z(b, z)?;
    let g = g_many(b, z, p)?;
    let n0 = g[0] - p_at(pk, 0, z)?;
    if p == 0 {
        return Ok(FiberResult {
            z: *z,
            roots: vec![],
            points: vec![],
            discriminant: cone(),
            n0,
        });
    }
    let n: Vec<C<S>> = (1..=p).map(|k| Ok(g[k] - p_at(pk, k, z)?)).collect::<Result<_>>()?;
    let poly = monic_from_elementary(&power_to_elementary(&n));
    let disc = if p >= 2 {
        let d = discriminant(&poly)?;
        if is_near_degenerate(&poly, d) {
            return Err(Error::DegenerateFiber(to_f64(d.norm())));
        }
        d
    } else {
        cone()
    };
    let hs = roots(&poly)?;
    let points = hs
        .iter()
        .map(|&h| ProjPoint::new([cone(), h, -z.x - z.y * h]))
        .collect::<Result<_>>()?;
    Ok(FiberResult {
        z: *z,
        roots: hs,
        points,
        discriminant: disc,
        n0,
    })
}

/// Lines to sweep: `y = R e^{i(2πa/angles + θ)}` for each radius `R > ρ`
/// and `x = f · 0.98 m(y) · e^{i(2πi/n_f + θ)}` for each fraction `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub radii: Vec<f64>,
    pub angles: usize,
    pub xfrac: Vec<f64>,
    pub offset: f64,
}

impl GridSpec {
    /// Radii `2ρ, 3ρ, 4ρ`, 64 angles, five fractions.
    pub fn default_for(rho: f64) -> Self {
        GridSpec {
            radii: vec![2.0 * rho, 3.0 * rho, 4.0 * rho],
            angles: 64,
            xfrac: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            offset: 0.0,
        }
    }

    pub fn lines<S: Real>(&self, b: &BoundaryData<S>) -> Result<Vec<LineParam<S>>> {
        let r = to_f64(rho(b));
        if self.angles == 0 || self.xfrac.is_empty() || self.radii.is_empty() {
            return Err(Error::InvalidInput("empty sweep grid".into()));
        }
        if let Some(&bad) = self.radii.iter().find(|&&v| !(v > r)) {
            return Err(Error::InvalidInput(format!("radius {bad} does not exceed rho = {r}")));
        }
        if let Some(&bad) = self.xfrac.iter().find(|&&f| !(0.0..1.0).contains(&f)) {
            return Err(Error::InvalidInput(format!("x fraction {bad} not in [0, 1)")));
        }
        let two_pi = std::f64::consts::TAU;
        let nf = self.xfrac.len() as f64;
        let mut out = Vec::new();
        for &rad in &self.radii {
            for a in 0..self.angles {
                let y = cis(lit::<S>(two_pi * a as f64 / self.angles as f64 + self.offset)) * lit::<S>(rad);
                let m = m_of_y(b, y)?;
                for (i, &f) in self.xfrac.iter().enumerate() {
                    let th = two_pi * i as f64 / nf + self.offset;
                    let x = cis(lit::<S>(th)) * (lit::<S>(f * M_DEFLATION) * m);
                    out.push(LineParam::new(x, y));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct CloudPoint<S: Real> {
    pub point: ProjPoint<S>,
    pub multiplicity: usize,
    pub sources: Vec<LineParam<S>>,
}

/// A line the sweep could not use, with the error code.
#[derive(Debug, Clone)]
pub struct Skipped<S: Real> {
    pub z: LineParam<S>,
    pub code: &'static str,
}

#[derive(Debug, Clone)]
pub struct PointCloud<S: Real> {
    pub points: Vec<CloudPoint<S>>,
    pub skipped: Vec<Skipped<S>>,
    /// Lines whose `N_0` did not round to `p`.
    pub g0_inconsistent: usize,
}

impl<S: Real> PointCloud<S> {
    fn insert(&mut self, pt: ProjPoint<S>, z: LineParam<S>, eps: S) {
        for c in self.points.iter_mut() {
            if c.point.chordal_distance(&pt) < eps {
                c.multiplicity += 1;
                c.sources.push(z);
                return;
            }
        }
        self.points.push(CloudPoint {
            point: pt,
            multiplicity: 1,
            sources: vec![z],
        });
    }
}

pub fn sweep<S: Real>(
    b: &BoundaryData<S>,
    p: usize,
    pk: Option<&[RationalAffinePoly<S>]>,
    grid: &GridSpec,
) -> Result<PointCloud<S>> {
    let lines = grid.lines(b)?;
    let fibers: Vec<(LineParam<S>, Result<FiberResult<S>>)> =
        lines.par_iter().map(|z| (*z, fiber(b, z, p, pk))).collect();
    let mut cloud = PointCloud {
        points: vec![],
        skipped: vec![],
        g0_inconsistent: 0,
    };
    let eps = lit::<S>(MERGE_EPS);
    for (z, f) in fibers {
        match f {
            Ok(f) => {
                if (f.n0.re - from_usize::<S>(p)).abs() > lit(0.5) {
                    cloud.g0_inconsistent += 1;
                }
                for pt in f.points {
                    cloud.insert(pt, z, eps);
                }
            }
            Err(e) => cloud.skipped.push(Skipped { z, code: e.code() }),
        }
    }
    Ok(cloud)
}

impl PointCloud<f64> {
    pub fn to_json(&self) -> Value {
        let pair = |c: C<f64>| json!([c.re, c.im]);
        json!({
            "points": self.points.iter().map(|c| json!({
                "w": c.point.w().iter().map(|&w| pair(w)).collect::<Vec<_>>(),
                "multiplicity": c.multiplicity,
                "sources": c.sources.iter().map(|z| json!({"x": pair(z.x), "y": pair(z.y)})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "skipped": self.skipped.iter().map(|s| json!({
                "x": pair(s.z.x), "y": pair(s.z.y), "code": s.code,
            })).collect::<Vec<_>>(),
            "g0_inconsistent": self.g0_inconsistent,
        })
    }

    /// One row per point; the source columns hold the first line that produced it.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt_f64;
        let mut s = String::from("w0_re,w0_im,w1_re,w1_im,w2_re,w2_im,src_x_re,src_x_im,src_y_re,src_y_im\n");
        for c in &self.points {
            let z = c.sources[0];
            let mut cells: Vec<String> = c
                .point
                .w()
                .iter()
                .flat_map(|w| [fmt_f64(w.re), fmt_f64(w.im)])
                .collect();
            cells.extend([z.x.re, z.x.im, z.y.re, z.y.im].map(fmt_f64));
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Outcome of [`pipeline`]: `δ`, the fit at infinity, `p = δ + q∞` and the cloud.
#[derive(Debug, Clone)]
pub struct PipelineResult<S: Real> {
    pub delta: i64,
    pub fit: FitResult<S>,
    pub p: usize,
    pub cloud: PointCloud<S>,
}

/// The rational corrections `P_0, …, P_p` implied by a fit and optional germs.
///
/// With `q∞ = 0` there are none. For `p ≤ 1` the fitted `A/B + xB′/B` is
/// enough; more sheets need the germs at infinity.
pub fn corrections<S: Real>(
    fit: &Solution<S>,
    p: usize,
    germs: Option<&[GermAtInfinity<S>]>,
) -> Result<Option<Vec<RationalAffinePoly<S>>>> {
    let q_inf = fit.r;
    if let Some(g) = germs {
        if g.len() != q_inf {
            return Err(Error::InvalidInput(format!(
                "{} germs given but the fit has q∞ = {q_inf}",
                g.len()
            )));
        }
        return Ok(Some(pk_family(g, p.max(1))));
    }
    if q_inf == 0 {
        return Ok(None);
    }
    if p >= 2 {
        return Err(Error::InvalidInput(format!(
            "p = {p} with q∞ = {q_inf} needs germs at infinity"
        )));
    }
    let p0 = RationalAffinePoly::constant(C::new(-from_usize::<S>(q_inf), S::zero()));
    Ok(Some(vec![p0, RationalAffinePoly::from_ab(&fit.a, &fit.b)]))
}

/// `δ` → fit at infinity → `p` → fibers over the sweep grid.
pub fn pipeline<S: Real>(
    b: &BoundaryData<S>,
    grid: &GridSpec,
    germs: Option<&[GermAtInfinity<S>]>,
    trunc: Trunc,
) -> Result<PipelineResult<S>> {
    let setup = FitSetup::from_boundary(b, cone(), trunc)?;
    let fit = fit_infinity(&setup, DEFAULT_R_MAX)?;
    let delta = setup.h.delta;
    let p = sheet_count(delta, fit.solution.r as i64)? as usize;
    let pk = corrections(&fit.solution, p, germs)?;
    let cloud = sweep(b, p, pk.as_deref(), grid)?;
    Ok(PipelineResult { delta, fit, p, cloud })
}

/// Shock-equation residuals of the fibers sampled on a `z`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberFieldCheck<S: Real> {
    /// `max |h_y − h h_x|` for a single sheet (`p = 1`); `None` otherwise,
    /// since individual sheets are not tracked across the grid.
    pub shock: Option<S>,
    /// Chain residual of the elementary symmetric functions of the sheets.
    pub system: S,
}

pub fn fiber_field_residuals<S: Real>(
    b: &BoundaryData<S>,
    p: usize,
    pk: Option<&[RationalAffinePoly<S>]>,
    grid: &ZGrid<S>,
) -> Result<FiberFieldCheck<S>> {
    if p == 0 {
        return Err(Error::InvalidInput("no sheets to check".into()));
    }
    let fibers: Vec<Vec<C<S>>> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = grid.node(idx / grid.ny, idx % grid.ny);
            fiber(b, &LineParam::new(x, y), p, pk).map(|f| f.roots)
        })
        .collect::<Result<_>>()?;
    let sym: Vec<Vec<C<S>>> = (0..p)
        .map(|k| {
            fibers
                .iter()
                .map(|h| {
                    let n: Vec<C<S>> = (1..=p)
                        .map(|e| h.iter().fold(czero(), |a, r| a + r.powu(e as u32)))
                        .collect();
                    power_to_elementary(&n)[k]
                })
                .collect()
        })
        .collect();
    let shock = if p == 1 {
        let h: Vec<C<S>> = fibers.iter().map(|f| f[0]).collect();
        Some(shock_residual(grid, &h)?)
    } else {
        None
    };
    Ok(FiberFieldCheck {
        shock,
        system: system_residual(grid, &sym)?,
    })
}

/// `G_1 = (A_0(y) + x A_1(y)) / B(y)` with `B` monic of degree `r`.
#[derive(Debug, Clone)]
pub struct AlgebraicFit<S: Real> {
    pub algebraic: bool,
    pub r: usize,
    pub b: Poly<S>,
    pub a0: Poly<S>,
    pub a1: Poly<S>,
    /// Best relative fit residual found.
    pub residual: S,
}

/// Sample set for [`detect_algebraic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    /// Radii in units of `ρ`.
    pub radii: Vec<f64>,
    pub angles: usize,
    pub xfrac: Vec<f64>,
    pub r_max: usize,
    pub tol: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            radii: vec![2.0, 3.0, 4.0],
            angles: 16,
            xfrac: vec![0.0, 0.3, 0.6],
            r_max: 6,
            tol: 1e-8,
        }
    }
}

pub fn detect_algebraic<S: Real>(b: &BoundaryData<S>, spec: &SampleSpec) -> Result<AlgebraicFit<S>> {
    let r0 = rho(b);
    let two_pi = S::PI() + S::PI();
    let mut samples: Vec<LineParam<S>> = Vec::new();
    for &rad in &spec.radii {
        for a in 0..spec.angles {
            let y =
                cis(two_pi * (from_usize::<S>(a) + lit(0.37)) / from_usize::<S>(spec.angles)) * (lit::<S>(rad) * r0);
            let m = m_of_y(b, y)?;
            for (i, &f) in spec.xfrac.iter().enumerate() {
                let x = cis(lit::<S>(1.3 * i as f64 + 0.2)) * (lit::<S>(f * M_DEFLATION) * m);
                samples.push(LineParam::new(x, y));
            }
        }
    }
    let g: Vec<C<S>> = samples
        .par_iter()
        .map(|z| g_many(b, z, 1).map(|v| v[1]))
        .collect::<Result<_>>()?;
    let gnorm = vec_norm(&g);
    if gnorm <= lit::<S>(1e-12) * from_usize::<S>(g.len()) {
        return Ok(AlgebraicFit {
            algebraic: true,
            r: 0,
            b: Poly::one(),
            a0: Poly::zero(),
            a1: Poly::zero(),
            residual: gnorm,
        });
    }
    let mut best = AlgebraicFit {
        algebraic: false,
        r: 0,
        b: Poly::one(),
        a0: Poly::zero(),
        a1: Poly::zero(),
        residual: S::one(),
    };
    for r in 1..=spec.r_max {
        // Unknowns: β_0..β_{r−1}, A_0 coefficients, A_1 coefficients; rows scaled by |y|^{−r}.
        let mut mat = Mat::zeros(samples.len(), 3 * r);
        let mut rhs = vec![czero::<S>(); samples.len()];
        for (row, (z, &gv)) in samples.iter().zip(&g).enumerate() {
            let s = S::one() / z.y.norm().powi(r as i32);
            let mut yp = cone::<S>();
            for i in 0..r {
                mat[(row, i)] = gv * yp * s;
                mat[(row, r + i)] = -yp * s;
                mat[(row, 2 * r + i)] = -z.x * yp * s;
                yp = yp * z.y;
            }
            rhs[row] = -gv * yp * s;
        }
        let sol = lstsq(&mat, &rhs);
        let ax = mat.mul_vec(&sol.x);
        let res = vec_norm(&ax.iter().zip(&rhs).map(|(a, b)| *a - *b).collect::<Vec<_>>()) / vec_norm(&rhs);
        let mut bc = sol.x[..r].to_vec();
        bc.push(cone());
        let fit = AlgebraicFit {
            algebraic: res < lit(spec.tol),
            r,
            b: Poly::new(bc),
            a0: Poly::new(sol.x[r..2 * r].to_vec()),
            a1: Poly::new(sol.x[2 * r..].to_vec()),
            residual: res,
        };
        if fit.algebraic {
            return Ok(fit);
        }
        if fit.residual < best.residual {
            best = fit;
        }
    }
    Ok(best)
}

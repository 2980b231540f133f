//! Green functions on a plane-curve patch `{Φ = 0}`: the kernel `k`, the
//! area quadrature for `g`, the boundary operator `T` and the Fredholm step
//! that turns any Green function into the principal one.
//!
//! The quadrature evaluates `g(q*, q) = (1/4π²) Re ∫ k(q′,q) conj(k(q*,q′)) |f|² dA`
//! over the patch, where `ω = f dζ` in the `z1` chart. On `Φ = z2` over the
//! unit disc this equals `(1/2π) ln|ζ − ζ*| − (1/4π) ln|1 − ζ ζ̄*|`.

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Mat};
use crate::scalar::{cis, cone, czero, from_usize, lit, Real, C};

/// `Σ c z1^i z2^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly<S: Real> {
    pub terms: Vec<(usize, usize, C<S>)>,
}

/// JSON term `{"i": …, "j": …, "c": [re, im]}`.
#[derive(Debug, Clone, Deserialize)]
pub struct TermJson {
    pub i: usize,
    pub j: usize,
    pub c: [f64; 2],
}

impl BiPoly<f64> {
    pub fn from_json(terms: &[TermJson]) -> Self {
        BiPoly {
            terms: terms.iter().map(|t| (t.i, t.j, C::new(t.c[0], t.c[1]))).collect(),
        }
    }
}

impl<S: Real> BiPoly<S> {
    pub fn new(terms: Vec<(usize, usize, C<S>)>) -> Self {
        BiPoly { terms }
    }

    pub fn eval(&self, z1: C<S>, z2: C<S>) -> C<S> {
        self.terms
            .iter()
            .fold(czero(), |a, &(i, j, c)| a + c * z1.powu(i as u32) * z2.powu(j as u32))
    }

    pub fn d1(&self, z1: C<S>, z2: C<S>) -> C<S> {
        self.terms.iter().filter(|t| t.0 > 0).fold(czero(), |a, &(i, j, c)| {
            a + c * from_usize::<S>(i) * z1.powu(i as u32 - 1) * z2.powu(j as u32)
        })
    }

    pub fn d2(&self, z1: C<S>, z2: C<S>) -> C<S> {
        self.terms.iter().filter(|t| t.1 > 0).fold(czero(), |a, &(i, j, c)| {
            a + c * from_usize::<S>(j) * z1.powu(i as u32) * z2.powu(j as u32 - 1)
        })
    }
}

/// Symmetric `Ψ(z′, z)` with `Φ(z′) − Φ(z) = Ψ_1 (z1′ − z1) + Ψ_2 (z2′ − z2)`,
/// stored as monomials `c · z1′^a z2′^b z1^c z2^d` per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi<S: Real> {
    pub comp: [Vec<(C<S>, [u32; 4])>; 2],
}

impl<S: Real> Psi<S> {
    pub fn eval(&self, zp: [C<S>; 2], z: [C<S>; 2]) -> [C<S>; 2] {
        let ev = |terms: &Vec<(C<S>, [u32; 4])>| {
            terms.iter().fold(czero::<S>(), |acc, (c, e)| {
                acc + *c * zp[0].powu(e[0]) * zp[1].powu(e[1]) * z[0].powu(e[2]) * z[1].powu(e[3])
            })
        };
        [ev(&self.comp[0]), ev(&self.comp[1])]
    }
}

/// Divided differences of `Φ`, averaged over both variable orders.
pub fn psi_of<S: Real>(phi: &BiPoly<S>) -> Psi<S> {
    let half = C::new(lit::<S>(0.5), S::zero());
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    for &(i, j, c) in &phi.terms {
        let (i, j) = (i as u32, j as u32);
        let c = c * half;
        for s in 0..i {
            // z1 first, z2 frozen at z: z2^j; then z2 step at z1′.
            p1.push((c, [s, 0, i - 1 - s, j]));
            // z2 first at z1, then z1 step with z2′.
            p1.push((c, [s, j, i - 1 - s, 0]));
        }
        for s in 0..j {
            p2.push((c, [i, s, 0, j - 1 - s]));
            p2.push((c, [0, s, i, j - 1 - s]));
        }
    }
    Psi { comp: [p1, p2] }
}

/// `k(z′, z) = det[(z̄′ − z̄)/|z′ − z|², Ψ(z′, z)]`.
pub fn kernel_k<S: Real>(zp: [C<S>; 2], z: [C<S>; 2], psi: &Psi<S>) -> Result<C<S>> {
    let d = [zp[0] - z[0], zp[1] - z[1]];
    let n2 = d[0].norm_sqr() + d[1].norm_sqr();
    if n2.sqrt() <= lit(1e-12) {
        return Err(Error::Coincident);
    }
    let p = psi.eval(zp, z);
    Ok((d[0].conj() * p[1] - d[1].conj() * p[0]) / n2)
}

/// Disc patch `|ζ − center| < radius` of `{Φ = 0}` in the `z1` chart.
#[derive(Debug, Clone)]
pub struct CurveModel<S: Real> {
    pub phi: BiPoly<S>,
    pub psi: Psi<S>,
    pub center: C<S>,
    pub radius: S,
    /// `z2` at the patch centre; other points are reached by continuation.
    pub z2_center: C<S>,
}

const NEWTON_STEPS: usize = 30;

impl<S: Real> CurveModel<S> {
    pub fn new(phi: BiPoly<S>, center: C<S>, radius: S, z2_guess: C<S>) -> Result<Self> {
        if !(radius > S::zero()) {
            return Err(Error::InvalidInput("patch radius must be positive".into()));
        }
        let psi = psi_of(&phi);
        let mut m = CurveModel {
            phi,
            psi,
            center,
            radius,
            z2_center: z2_guess,
        };
        m.z2_center = m.newton(center, z2_guess)?;
        Ok(m)
    }

    fn newton(&self, zeta: C<S>, mut z2: C<S>) -> Result<C<S>> {
        for _ in 0..NEWTON_STEPS {
            let d = self.phi.d2(zeta, z2);
            if d.norm() <= lit(1e-9) {
                return Err(Error::InvalidInput("∂Φ/∂z2 vanishes: z1 is not a chart here".into()));
            }
            let step = self.phi.eval(zeta, z2) / d;
            z2 = z2 - step;
            if step.norm() <= lit::<S>(1e-15) * (S::one() + z2.norm()) {
                return Ok(z2);
            }
        }
        let res = self.phi.eval(zeta, z2).norm();
        if res <= lit(1e-12) {
            Ok(z2)
        } else {
            Err(Error::NoConvergence)
        }
    }

    /// `z2(ζ)` continued from `(from, z2_from)` along the straight segment.
    pub fn lift_from(&self, from: C<S>, z2_from: C<S>, zeta: C<S>) -> Result<C<S>> {
        let len = crate::scalar::to_f64((zeta - from).norm() / self.radius);
        let steps = ((len / 0.05).ceil() as usize).max(1);
        let mut z2 = z2_from;
        for s in 1..=steps {
            let t = from_usize::<S>(s) / from_usize::<S>(steps);
            z2 = self.newton(from + (zeta - from) * t, z2)?;
        }
        Ok(z2)
    }

    pub fn lift(&self, zeta: C<S>) -> Result<C<S>> {
        self.lift_from(self.center, self.z2_center, zeta)
    }

    /// `f` with `ω = f dζ`: `−1/Φ_{z2}` in the `z1` chart.
    pub fn density(&self, zeta: C<S>, z2: C<S>) -> C<S> {
        -cone::<S>() / self.phi.d2(zeta, z2)
    }

    fn contains(&self, zeta: C<S>) -> bool {
        (zeta - self.center).norm() < self.radius
    }

    /// Distance from `a` to the patch edge in direction `e^{iθ}`.
    fn reach(&self, a: C<S>, dir: C<S>) -> S {
        let rel = (a - self.center) * dir.conj();
        let disc = (self.radius * self.radius - rel.im * rel.im).max(S::zero());
        -rel.re + disc.sqrt()
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre<S: Real>(n: usize) -> Vec<(S, S)> {
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((lit::<S>(x), lit::<S>(2.0 / ((1.0 - x * x) * dp * dp))));
    }
    out
}

/// Quadrature resolution for [`green_value`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub angles: usize,
    pub nodes_per_panel: usize,
    /// Exponent `p` of the partition `|ζ−b|ᵖ / (|ζ−a|ᵖ + |ζ−b|ᵖ)`.
    pub pou_power: i32,
    /// Largest accepted change when the angular count is halved.
    pub tolerance: Option<f64>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            angles: 128,
            nodes_per_panel: 16,
            pou_power: 8,
            tolerance: None,
        }
    }
}

fn integrand<S: Real>(m: &CurveModel<S>, qs: [C<S>; 2], q: [C<S>; 2], zp: [C<S>; 2]) -> Result<C<S>> {
    let k1 = kernel_k(zp, q, &m.psi)?;
    let k2 = kernel_k(qs, zp, &m.psi)?;
    Ok(k1 * k2.conj() * m.density(zp[0], zp[1]).norm_sqr())
}

fn polar_part<S: Real>(
    m: &CurveModel<S>,
    a: [C<S>; 2],
    b: [C<S>; 2],
    qs: [C<S>; 2],
    q: [C<S>; 2],
    angles: usize,
    opts: &QuadOptions,
) -> Result<C<S>> {
    let gl = gauss_legendre::<S>(opts.nodes_per_panel);
    let d = (a[0] - b[0]).norm();
    let two_pi = S::PI() + S::PI();
    let dth = two_pi / from_usize::<S>(angles);
    let parts: Vec<C<S>> = (0..angles)
        .into_par_iter()
        .map(|i| {
            let dir = cis(dth * (from_usize::<S>(i) + lit(0.5)));
            let reach = m.reach(a[0], dir);
            let mut edges = vec![S::zero()];
            let mut e = d / lit(2.0);
            while e < reach {
                edges.push(e);
                e = if e < d { d } else { e * lit(2.0) };
            }
            edges.push(reach);
            let mut z2 = a[1];
            let mut prev = a[0];
            let mut acc = czero::<S>();
            for w in edges.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let half = (hi - lo) / lit(2.0);
                let mid = (hi + lo) / lit(2.0);
                for &(x, wt) in gl.iter().rev() {
                    let r = mid + half * x;
                    let zeta = a[0] + dir * r;
                    z2 = m.lift_from(prev, z2, zeta)?;
                    prev = zeta;
                    let da = r.powi(opts.pou_power);
                    let db = (zeta - b[0]).norm().powi(opts.pou_power);
                    let pou = db / (da + db);
                    acc = acc + integrand(m, qs, q, [zeta, z2])? * (wt * half * r * pou);
                }
            }
            Ok(acc * dth)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(czero(), |a, b| a + b))
}

fn green_raw<S: Real>(m: &CurveModel<S>, qs: [C<S>; 2], q: [C<S>; 2], angles: usize, opts: &QuadOptions) -> Result<S> {
    let total = polar_part(m, q, qs, qs, q, angles, opts)? + polar_part(m, qs, q, qs, q, angles, opts)?;
    let four_pi2 = lit::<S>(4.0) * S::PI() * S::PI();
    Ok(total.re / four_pi2)
}

/// `g(q*, q)` by area quadrature over the patch.
pub fn green_value<S: Real>(m: &CurveModel<S>, q_star: C<S>, q: C<S>, opts: &QuadOptions) -> Result<S> {
    if !m.contains(q_star) || !m.contains(q) {
        return Err(Error::InvalidInput("points must lie inside the patch".into()));
    }
    if (q_star - q).norm() <= lit(1e-12) {
        return Err(Error::Coincident);
    }
    let qs = [q_star, m.lift(q_star)?];
    let qq = [q, m.lift(q)?];
    let g = green_raw(m, qs, qq, opts.angles, opts)?;
    if let Some(tol) = opts.tolerance {
        let coarse = green_raw(m, qs, qq, (opts.angles / 2).max(4), opts)?;
        let est = (g - coarse).abs();
        if est > lit(tol) {
            return Err(Error::MeshTooCoarse(crate::scalar::to_f64(est)));
        }
    }
    Ok(g)
}

/// A Green function on a planar chart, `g(q, z) ~ (1/2π) ln|z − q|`.
pub trait GreenFunction<S: Real>: Sync {
    fn value(&self, q: C<S>, z: C<S>) -> Result<S>;

    /// `∇_z g = g_x + i g_y` (equivalently `2 ∂g/∂z̄`).
    fn grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        let h = lit::<S>(1e-5) * (S::one() + z.norm());
        let hx = C::new(h, S::zero());
        let hy = C::new(S::zero(), h);
        let gx = (self.value(q, z + hx)? - self.value(q, z - hx)?) / (h + h);
        let gy = (self.value(q, z + hy)? - self.value(q, z - hy)?) / (h + h);
        Ok(C::new(gx, gy))
    }

    /// Gradient in `z` of `g(q, z) − (1/2π) ln|z − q|`, continuous at `z = q`.
    fn regular_grad(&self, q: C<S>, z: C<S>) -> Result<C<S>>;
}

fn log_grad<S: Real>(q: C<S>, z: C<S>) -> C<S> {
    let d = z - q;
    d / (d.norm_sqr() * (S::PI() + S::PI()))
}

/// `(1/2π) ln|z − q|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeSpaceGreen;

impl<S: Real> GreenFunction<S> for FreeSpaceGreen {
    fn value(&self, q: C<S>, z: C<S>) -> Result<S> {
        Ok((z - q).norm().ln() / (S::PI() + S::PI()))
    }
    fn grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        Ok(log_grad(q, z))
    }
    fn regular_grad(&self, _q: C<S>, _z: C<S>) -> Result<C<S>> {
        Ok(czero())
    }
}

/// Closed form of the patch quadrature for `Φ = z2` on the unit disc:
/// `(1/2π) ln|z − q| − (1/4π) ln|1 − z q̄|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitDiscPatchGreen;

impl<S: Real> GreenFunction<S> for UnitDiscPatchGreen {
    fn value(&self, q: C<S>, z: C<S>) -> Result<S> {
        let two_pi = S::PI() + S::PI();
        Ok((z - q).norm().ln() / two_pi - (cone::<S>() - z * q.conj()).norm().ln() / (two_pi + two_pi))
    }
    fn grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        Ok(log_grad(q, z) + self.regular_grad(q, z)?)
    }
    fn regular_grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        let four_pi = lit::<S>(4.0) * S::PI();
        Ok(q / ((cone::<S>() - z.conj() * q) * four_pi))
    }
}

/// Principal Green function of the disc `|z| < R`:
/// `(1/2π) ln|R (z − q) / (R² − q̄ z)|`.
#[derive(Debug, Clone, Copy)]
pub struct DiscPrincipalGreen<S: Real> {
    pub radius: S,
}

impl<S: Real> GreenFunction<S> for DiscPrincipalGreen<S> {
    fn value(&self, q: C<S>, z: C<S>) -> Result<S> {
        let r = self.radius;
        let v = ((z - q) * r / (C::new(r * r, S::zero()) - q.conj() * z)).norm();
        Ok(v.ln() / (S::PI() + S::PI()))
    }
    fn grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        Ok(log_grad(q, z) + self.regular_grad(q, z)?)
    }
    fn regular_grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        let r2 = C::new(self.radius * self.radius, S::zero());
        let two_pi = S::PI() + S::PI();
        Ok(q / ((r2 - z.conj() * q) * two_pi))
    }
}

/// Green function of a [`CurveModel`] evaluated by quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureGreen<S: Real> {
    pub model: CurveModel<S>,
    pub opts: QuadOptions,
}

impl<S: Real> GreenFunction<S> for QuadratureGreen<S> {
    fn value(&self, q: C<S>, z: C<S>) -> Result<S> {
        green_value(&self.model, q, z, &self.opts)
    }
    fn regular_grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        let h = lit::<S>(1e-3);
        let mut acc = czero::<S>();
        for dir in [C::new(h, S::zero()), C::new(S::zero(), h)] {
            let f = |p: C<S>| -> Result<S> { Ok(self.value(q, p)? - (p - q).norm().ln() / (S::PI() + S::PI())) };
            let z0 = if (z - q).norm() < h * lit(4.0) {
                z + C::new(lit::<S>(4.0) * h, S::zero())
            } else {
                z
            };
            let dv = (f(z0 + dir)? - f(z0 - dir)?) / (h + h);
            acc = acc
                + if dir.re > S::zero() {
                    C::new(dv, S::zero())
                } else {
                    C::new(S::zero(), dv)
                };
        }
        Ok(acc)
    }
}

/// Closed boundary curve sampled uniformly in its parameter, positively oriented.
#[derive(Debug, Clone)]
pub struct BoundaryCurve<S: Real> {
    pub z: Vec<C<S>>,
    pub dz: Vec<C<S>>,
    pub d2z: Vec<C<S>>,
    pub dt: S,
}

impl<S: Real> BoundaryCurve<S> {
    pub fn circle(center: C<S>, radius: S, n: usize) -> Self {
        let two_pi = S::PI() + S::PI();
        let dt = two_pi / from_usize::<S>(n);
        let i = C::new(S::zero(), S::one());
        let e: Vec<C<S>> = (0..n).map(|j| cis(dt * from_usize::<S>(j))).collect();
        BoundaryCurve {
            z: e.iter().map(|&e| center + e * radius).collect(),
            dz: e.iter().map(|&e| i * e * radius).collect(),
            d2z: e.iter().map(|&e| -e * radius).collect(),
            dt,
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    fn curvature(&self, j: usize) -> S {
        (self.dz[j].conj() * self.d2z[j]).im / self.dz[j].norm().powi(3)
    }

    /// Parameter value of node `j`.
    pub fn t(&self, j: usize) -> S {
        self.dt * from_usize::<S>(j)
    }

    /// Trigonometric interpolation of nodal values at parameter `t`.
    pub fn interpolate(&self, v: &[C<S>], t: S) -> C<S> {
        let n = self.len();
        let nf = from_usize::<S>(n);
        let half = n / 2;
        let mut acc = czero::<S>();
        for k in 0..n {
            let kk = if k > half { k as i64 - n as i64 } else { k as i64 };
            let mut ck = czero::<S>();
            for (j, &vj) in v.iter().enumerate() {
                ck = ck + vj * cis(-self.dt * from_usize::<S>(j) * S::from(kk).unwrap());
            }
            let mut w = cis(t * S::from(kk).unwrap());
            if n.is_multiple_of(2) && k == half {
                w = C::new((t * S::from(kk).unwrap()).cos(), S::zero());
            }
            acc = acc + ck * w;
        }
        acc / nf
    }
}

/// `∂g(q, ζ)/∂n_ζ · |ζ′|`, the double-layer density factor at `ζ`.
fn normal_flux<S: Real, G: GreenFunction<S>>(g: &G, q: C<S>, zeta: C<S>, dzeta: C<S>) -> Result<S> {
    let i = C::new(S::zero(), S::one());
    Ok((g.grad(q, zeta)? * i * dzeta.conj()).re)
}

/// `T v(q) = Σ_j v_j ∂_n g(q, ζ_j) |ζ′_j| Δt`, the harmonic extension of `v`
/// when `g` is principal.
pub fn harmonic_extension_t<S: Real, G: GreenFunction<S>>(
    curve: &BoundaryCurve<S>,
    v: &[S],
    g: &G,
    q: C<S>,
) -> Result<S> {
    if v.len() != curve.len() {
        return Err(Error::InvalidInput("boundary data length mismatch".into()));
    }
    let mut acc = S::zero();
    for ((&vj, &z), &dz) in v.iter().zip(&curve.z).zip(&curve.dz) {
        acc = acc + vj * normal_flux(g, q, z, dz)?;
    }
    Ok(acc * curve.dt)
}

/// Nyström matrix of the principal-value double layer `K` on the curve.
pub fn double_layer<S: Real, G: GreenFunction<S>>(curve: &BoundaryCurve<S>, g: &G) -> Result<Mat<S>> {
    let n = curve.len();
    let i = C::new(S::zero(), S::one());
    let four_pi = lit::<S>(4.0) * S::PI();
    let rows: Vec<Vec<C<S>>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (0..n)
                .map(|b| {
                    let v = if a == b {
                        let kap = curve.curvature(a) * curve.dz[a].norm() / four_pi;
                        kap + (g.regular_grad(curve.z[a], curve.z[a])? * i * curve.dz[a].conj()).re
                    } else {
                        normal_flux(g, curve.z[a], curve.z[b], curve.dz[b])?
                    };
                    Ok(C::new(v * curve.dt, S::zero()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Mat::from_rows(&rows))
}

/// `S = K − I/2` restricted to the boundary.
pub fn s_operator<S: Real, G: GreenFunction<S>>(curve: &BoundaryCurve<S>, g: &G) -> Result<Mat<S>> {
    let mut k = double_layer(curve, g)?;
    for a in 0..curve.len() {
        k[(a, a)] = k[(a, a)] - C::new(lit(0.5), S::zero());
    }
    Ok(k)
}

/// Condition number beyond which `I + S` counts as singular.
pub const FREDHOLM_COND_MAX: f64 = 1e12;

/// Factorization of `I + S` with `w = R v` solving `w + S w = v`.
#[derive(Debug, Clone)]
pub struct FredholmSolver<S: Real> {
    lu: Lu<S>,
    pub cond: S,
}

impl<S: Real> FredholmSolver<S> {
    pub fn new(s: &Mat<S>) -> Result<Self> {
        let n = s.rows;
        let mut a = s.clone();
        for i in 0..n {
            a[(i, i)] = a[(i, i)] + cone::<S>();
        }
        let lu = Lu::new(a.clone()).ok_or(Error::SingularFredholm(f64::INFINITY))?;
        let cond = lu.cond1(&a);
        if !(cond <= lit(FREDHOLM_COND_MAX)) {
            return Err(Error::SingularFredholm(crate::scalar::to_f64(cond)));
        }
        Ok(FredholmSolver { lu, cond })
    }

    pub fn solve(&self, v: &[S]) -> Vec<S> {
        let b: Vec<C<S>> = v.iter().map(|&x| C::new(x, S::zero())).collect();
        self.lu.solve(&b).into_iter().map(|c| c.re).collect()
    }
}

/// `R v` for an explicit boundary operator `S`.
pub fn fredholm_solve_r<S: Real>(v: &[S], s: &Mat<S>) -> Result<Vec<S>> {
    if s.rows != v.len() || s.cols != v.len() {
        return Err(Error::InvalidInput("operator and data sizes differ".into()));
    }
    Ok(FredholmSolver::new(s)?.solve(v))
}

/// `G_M(q, z) = g(q, z) − E(g_q|_{bM})(z)` with `E = T R`.
pub struct PrincipalGreen<'a, S: Real, G: GreenFunction<S>> {
    pub g: &'a G,
    pub curve: BoundaryCurve<S>,
    solver: FredholmSolver<S>,
}

impl<'a, S: Real, G: GreenFunction<S>> PrincipalGreen<'a, S, G> {
    pub fn new(g: &'a G, curve: BoundaryCurve<S>) -> Result<Self> {
        let s = s_operator(&curve, g)?;
        let solver = FredholmSolver::new(&s)?;
        Ok(PrincipalGreen { g, curve, solver })
    }

    pub fn cond(&self) -> S {
        self.solver.cond
    }

    fn density(&self, q: C<S>) -> Result<Vec<S>> {
        let v: Vec<S> = self
            .curve
            .z
            .iter()
            .map(|&z| self.g.value(q, z))
            .collect::<Result<_>>()?;
        Ok(self.solver.solve(&v))
    }

    /// Harmonic extension of `v` into the interior point `z`.
    pub fn extend(&self, v: &[S], z: C<S>) -> Result<S> {
        let w = self.solver.solve(v);
        harmonic_extension_t(&self.curve, &w, self.g, z)
    }

    /// Value at the boundary point of parameter `t`, through the jump relation
    /// `E v = w/2 + K w` with `w` interpolated trigonometrically.
    pub fn value_on_boundary(&self, q: C<S>, t: S, z: C<S>, dz: C<S>, d2z: C<S>) -> Result<S> {
        let w = self.density(q)?;
        let wc: Vec<C<S>> = w.iter().map(|&x| C::new(x, S::zero())).collect();
        let wt = self.curve.interpolate(&wc, t).re;
        let i = C::new(S::zero(), S::one());
        let mut acc = S::zero();
        for (j, &wj) in w.iter().enumerate() {
            let k = if (self.curve.z[j] - z).norm() <= lit(1e-13) {
                let kap = (dz.conj() * d2z).im / dz.norm().powi(2) / (lit::<S>(4.0) * S::PI());
                kap + (self.g.regular_grad(z, z)? * i * dz.conj()).re
            } else {
                normal_flux(self.g, z, self.curve.z[j], self.curve.dz[j])?
            };
            acc = acc + k * wj;
        }
        let ev = wt / lit(2.0) + acc * self.curve.dt;
        Ok(self.g.value(q, z)? - ev)
    }
}

impl<'a, S: Real, G: GreenFunction<S>> GreenFunction<S> for PrincipalGreen<'a, S, G> {
    fn value(&self, q: C<S>, z: C<S>) -> Result<S> {
        let w = self.density(q)?;
        Ok(self.g.value(q, z)? - harmonic_extension_t(&self.curve, &w, self.g, z)?)
    }

    fn regular_grad(&self, q: C<S>, z: C<S>) -> Result<C<S>> {
        let w = self.density(q)?;
        let h = lit::<S>(1e-5);
        let mut out = [S::zero(); 2];
        for (k, dir) in [C::new(h, S::zero()), C::new(S::zero(), h)].into_iter().enumerate() {
            let e1 = harmonic_extension_t(&self.curve, &w, self.g, z + dir)?;
            let e0 = harmonic_extension_t(&self.curve, &w, self.g, z - dir)?;
            out[k] = (e1 - e0) / (h + h);
        }
        Ok(self.g.regular_grad(q, z)? - C::new(out[0], out[1]))
    }
}

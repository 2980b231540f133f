//! Shock waves `h_y = h h_x` and the operator calculus built on `H`, `P` and
//! `E = P ∘ (∂x + ∂x H)` acting on [`BiSeries`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indicators::LaurentTable;
use crate::poly::Poly;
use crate::scalar::{cone, cpowi, czero, factorial, from_usize, lit, to_f64, Real, C};
use crate::series::{BiSeries, Trunc};
use crate::symmetric::roots;

/// Base point `ω` and cut direction `τ` of the primitive operator `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaCut<S: Real> {
    pub omega: C<S>,
    pub tau: C<S>,
    pub rho: S,
}

impl<S: Real> OmegaCut<S> {
    /// `ω = −2ρτ`, opposite the cut.
    pub fn new(rho: S, tau: C<S>) -> Result<Self> {
        let tau = tau / tau.norm();
        Self::with_omega(tau * lit::<S>(-2.0) * rho, tau, rho)
    }

    pub fn with_omega(omega: C<S>, tau: C<S>, rho: S) -> Result<Self> {
        if !(tau.norm() > S::zero()) {
            return Err(Error::InvalidOmega("cut direction must be nonzero".into()));
        }
        let tau = tau / tau.norm();
        if omega.norm() <= rho {
            return Err(Error::InvalidOmega(format!(
                "|omega| = {} must exceed rho = {}",
                to_f64(omega.norm()),
                to_f64(rho)
            )));
        }
        let rel = omega / tau;
        if rel.re > S::zero() && rel.im.abs() <= lit::<S>(1e-12) * rel.norm() {
            return Err(Error::InvalidOmega("omega lies on the cut".into()));
        }
        Ok(OmegaCut { omega, tau, rho })
    }
}

/// `H = −δ J + H̃` with `H̃` a pure `1/y` series.
#[derive(Debug, Clone)]
pub struct HData<S: Real> {
    pub delta: i64,
    pub htilde: BiSeries<S>,
    pub cut: OmegaCut<S>,
}

impl<S: Real> HData<S> {
    pub fn new(delta: i64, htilde: BiSeries<S>, cut: OmegaCut<S>) -> Result<Self> {
        if htilde.m_lo() < 1 && htilde.max_abs() > S::zero() {
            let low = (0..=htilde.nx())
                .flat_map(|n| (htilde.m_lo()..1).map(move |m| (n, m)))
                .any(|(n, m)| htilde.get(n, m) != czero());
            if low {
                return Err(Error::InvalidInput("H̃ must be a pure 1/y series".into()));
            }
        }
        Ok(HData { delta, htilde, cut })
    }

    pub fn omega(&self) -> C<S> {
        self.cut.omega
    }

    pub fn trunc(&self) -> Trunc {
        self.htilde.trunc()
    }

    /// `∂H/∂y = −δ/y + ∂H̃/∂y` at a point.
    pub fn dh_dy(&self, x: C<S>, y: C<S>) -> C<S> {
        self.htilde.dy().eval(x, y) - C::new(S::from(self.delta).unwrap(), S::zero()) / y
    }

    /// `e^{−H} = ω^{−δ} y^δ e^{−H̃}` evaluated pointwise.
    pub fn exp_minus_h(&self, x: C<S>, y: C<S>) -> C<S> {
        let d = self.delta as i32;
        cpowi(self.omega(), -d) * cpowi(y, d) * (-self.htilde.eval(x, y)).exp()
    }
}

/// `H̃` from the Laurent coefficients of `G_1`: the coefficient of `xⁿ y⁻ᵐ`
/// is `−(n+1) G_{1,m+1}^{n+1} / m`.
pub fn h_from_laurent<S: Real>(lt: &LaurentTable<S>, delta: i64, cut: OmegaCut<S>, trunc: Trunc) -> Result<HData<S>> {
    if lt.kmax < 1 || lt.mmax < 2 {
        return Err(Error::InvalidInput("Laurent table must cover k = 1 and m ≥ 2".into()));
    }
    let mtop = (lt.mmax - 1) as i32;
    let m_hi = mtop.min(trunc.mhi);
    let nx = (m_hi as usize).min(trunc.nx);
    let h = BiSeries::from_fn(trunc, nx, 1, m_hi, Some(m_hi), |n, m| {
        let m = m as usize;
        lt.get(1, m + 1, n + 1) * -(from_usize::<S>(n + 1) / from_usize::<S>(m))
    });
    let x_cut = (m_hi as usize > trunc.nx).then_some(nx);
    HData::new(delta, h.with_x_valid(x_cut), cut)
}

/// `e^H = ω^δ y^{−δ} e^{H̃}`, the monomial kept exact.
#[derive(Debug, Clone)]
pub struct ExpH<S: Real> {
    pub omega_pow: C<S>,
    pub y_pow: i64,
    pub series: BiSeries<S>,
}

impl<S: Real> ExpH<S> {
    pub fn eval(&self, x: C<S>, y: C<S>) -> C<S> {
        self.omega_pow * cpowi(y, self.y_pow as i32) * self.series.eval(x, y)
    }
}

pub fn exp_h<S: Real>(h: &HData<S>) -> ExpH<S> {
    ExpH {
        omega_pow: cpowi(h.omega(), h.delta as i32),
        y_pow: -h.delta,
        series: h.htilde.exp(),
    }
}

/// `E(s) = P(∂s/∂x + s ∂H̃/∂x)`.
pub fn op_e<S: Real>(s: &BiSeries<S>, h: &HData<S>) -> Result<BiSeries<S>> {
    s.dx().add(&s.mul(&h.htilde.dx())).primitivize(h.omega())
}

/// `(Y − ω)^k / k!` as an exact series.
pub fn y_minus_omega_pow<S: Real>(trunc: Trunc, omega: C<S>, k: usize) -> BiSeries<S> {
    let base = Poly::new(vec![-omega, cone()]);
    let mut p = Poly::one();
    for _ in 0..k {
        p = &p * &base;
    }
    BiSeries::from_y_poly(trunc, &p.scale(C::new(S::one() / factorial::<S>(k), S::zero())))
}

/// Triangular table of `E_{k,j}` with `E^k(f ⊗ 1) = Σ_j f^{(j)} E_{k,j}`.
#[derive(Debug, Clone)]
pub struct ETable<S: Real> {
    pub kmax: usize,
    rows: Vec<Vec<BiSeries<S>>>,
}

impl<S: Real> ETable<S> {
    pub fn get(&self, k: usize, j: usize) -> &BiSeries<S> {
        &self.rows[k][j]
    }
}

pub const E_TABLE_CAP: usize = 8;

pub fn e_decomposition<S: Real>(kmax: usize, h: &HData<S>) -> Result<ETable<S>> {
    if kmax > E_TABLE_CAP {
        return Err(Error::InvalidInput(format!("E table capped at k = {E_TABLE_CAP}")));
    }
    let trunc = h.trunc();
    let omega = h.omega();
    let mut rows = vec![vec![BiSeries::constant(trunc, cone())]];
    for k in 0..kmax {
        let prev = &rows[k];
        let mut next = Vec::with_capacity(k + 2);
        next.push(op_e(&prev[0], h)?);
        for j in 1..=k {
            next.push(prev[j - 1].primitivize(omega)?.add(&op_e(&prev[j], h)?));
        }
        next.push(y_minus_omega_pow(trunc, omega, k + 1));
        rows.push(next);
    }
    Ok(ETable { kmax, rows })
}

/// The series `s_1, …, s_d` generated by `(μ, B)`:
/// `s_k = ω^δ y^{−δ} e^{H̃} B⁻¹ Σ_{j≥k} E^{j−k}(μ_j ⊗ 1)`.
#[derive(Debug, Clone)]
pub struct ShockSeries<S: Real> {
    pub s: Vec<BiSeries<S>>,
}

impl<S: Real> ShockSeries<S> {
    pub fn d(&self) -> usize {
        self.s.len()
    }

    /// `S(μ,B)(T) = T^d + s_1 T^{d−1} + … + s_d` at a point.
    pub fn sigma_poly(&self, x: C<S>, y: C<S>) -> Poly<S> {
        let mut desc = vec![cone()];
        desc.extend(self.s.iter().map(|s| s.eval(x, y)));
        Poly::from_desc(&desc)
    }
}

pub fn s_k_from_mu<S: Real>(mu: &[Vec<C<S>>], b: &Poly<S>, h: &HData<S>) -> Result<ShockSeries<S>> {
    if mu.is_empty() {
        return Err(Error::InvalidInput("need d ≥ 1".into()));
    }
    if b.c[0] != cone() {
        return Err(Error::InvalidInput("B must satisfy B(0) = 1".into()));
    }
    let trunc = h.trunc();
    if b.degree() > 0 {
        let big = roots(b)?.iter().fold(S::zero(), |a, r| a.max(r.norm()));
        if lit::<S>(1.5) * big > h.omega().norm() {
            return Err(Error::BInversionDiverged(format!(
                "largest root of B has modulus {} against |omega| = {}",
                to_f64(big),
                to_f64(h.omega().norm())
            )));
        }
    }
    let pre = h
        .htilde
        .exp()
        .mul(&BiSeries::inv_y_poly(trunc, b))
        .mul_y_pow(-h.delta as i32)
        .scale(cpowi(h.omega(), h.delta as i32));
    let d = mu.len();
    let mut acc: Vec<BiSeries<S>> = vec![BiSeries::zero(trunc); d];
    let mut tail = BiSeries::from_x_poly(trunc, &mu[d - 1]);
    acc[d - 1] = tail.clone();
    for k in (0..d - 1).rev() {
        tail = BiSeries::from_x_poly(trunc, &mu[k]).add(&op_e(&tail, h)?);
        acc[k] = tail.clone();
    }
    Ok(ShockSeries {
        s: acc.iter().map(|t| pre.mul(t)).collect(),
    })
}

/// Rectangular grid `x_i = x0 + i·hx`, `y_j = y0 + j·hy` (complex steps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZGrid<S: Real> {
    pub x0: C<S>,
    pub y0: C<S>,
    pub hx: C<S>,
    pub hy: C<S>,
    pub nx: usize,
    pub ny: usize,
}

impl<S: Real> ZGrid<S> {
    /// Grid of `n × n` nodes centred on `(xc, yc)`.
    pub fn centred(xc: C<S>, yc: C<S>, h: S, n: usize) -> Self {
        let half = from_usize::<S>(n.saturating_sub(1)) / lit(2.0);
        let hc = C::new(h, S::zero());
        ZGrid {
            x0: xc - hc * half,
            y0: yc - hc * half,
            hx: hc,
            hy: hc,
            nx: n,
            ny: n,
        }
    }

    pub fn node(&self, i: usize, j: usize) -> (C<S>, C<S>) {
        (
            self.x0 + self.hx * from_usize::<S>(i),
            self.y0 + self.hy * from_usize::<S>(j),
        )
    }

    /// Values of `f`, row-major in `x`.
    pub fn sample<F>(&self, f: F) -> Vec<C<S>>
    where
        F: Fn(C<S>, C<S>) -> C<S> + Sync,
    {
        (0..self.nx * self.ny)
            .into_par_iter()
            .map(|idx| {
                let (x, y) = self.node(idx / self.ny, idx % self.ny);
                f(x, y)
            })
            .collect()
    }

    fn check(&self, v: &[C<S>]) -> Result<()> {
        if self.nx < 5 || self.ny < 5 {
            return Err(Error::GridTooSmall {
                nx: self.nx,
                ny: self.ny,
            });
        }
        if v.len() != self.nx * self.ny {
            return Err(Error::InvalidInput("grid value count mismatch".into()));
        }
        Ok(())
    }

    fn at(&self, v: &[C<S>], i: usize, j: usize) -> C<S> {
        v[i * self.ny + j]
    }

    fn stencil(f: [C<S>; 4], h: C<S>) -> C<S> {
        (f[0] - f[3] + (f[2] - f[1]) * lit::<S>(8.0)) / (h * lit::<S>(12.0))
    }

    /// Fourth-order `∂/∂x` at an interior node.
    pub fn dx(&self, v: &[C<S>], i: usize, j: usize) -> C<S> {
        Self::stencil(
            [
                self.at(v, i - 2, j),
                self.at(v, i - 1, j),
                self.at(v, i + 1, j),
                self.at(v, i + 2, j),
            ],
            self.hx,
        )
    }

    /// Fourth-order `∂/∂y` at an interior node.
    pub fn dy(&self, v: &[C<S>], i: usize, j: usize) -> C<S> {
        Self::stencil(
            [
                self.at(v, i, j - 2),
                self.at(v, i, j - 1),
                self.at(v, i, j + 1),
                self.at(v, i, j + 2),
            ],
            self.hy,
        )
    }

    fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (2..self.nx - 2).flat_map(move |i| (2..self.ny - 2).map(move |j| (i, j)))
    }
}

/// `sup |∂h/∂y − h ∂h/∂x|` over interior nodes.
pub fn shock_residual<S: Real>(grid: &ZGrid<S>, h: &[C<S>]) -> Result<S> {
    grid.check(h)?;
    Ok(grid.interior().fold(S::zero(), |acc, (i, j)| {
        let r = grid.dy(h, i, j) - grid.at(h, i, j) * grid.dx(h, i, j);
        acc.max(r.norm())
    }))
}

/// Residual of `−s_k N_x + ∂y s_k = ∂x s_{k+1}` (with `s_{d+1} = 0`).
///
/// `n_x` supplies `∂N/∂x` at every node; `None` takes `N = −s_1` and
/// differentiates numerically.
pub fn chain_residual<S: Real>(grid: &ZGrid<S>, s: &[Vec<C<S>>], n_x: Option<&[C<S>]>) -> Result<S> {
    if s.is_empty() {
        return Err(Error::InvalidInput("need at least one function".into()));
    }
    for v in s {
        grid.check(v)?;
    }
    if let Some(n) = n_x {
        grid.check(n)?;
    }
    let d = s.len();
    Ok(grid.interior().fold(S::zero(), |acc, (i, j)| {
        let nx = match n_x {
            Some(n) => grid.at(n, i, j),
            None => -grid.dx(&s[0], i, j),
        };
        (0..d).fold(acc, |acc, k| {
            let mut r = grid.dy(&s[k], i, j) - grid.at(&s[k], i, j) * nx;
            if k + 1 < d {
                r = r - grid.dx(&s[k + 1], i, j);
            }
            acc.max(r.norm())
        })
    }))
}

/// Residual of the symmetric-function system for `S_1, …, S_d`, with
/// `Σ_k = (−1)^k S_k`: `Σ_k ∂xΣ_1 + ∂yΣ_k = ∂xΣ_{k+1}`, `Σ_{d+1} = 0`.
pub fn system_residual<S: Real>(grid: &ZGrid<S>, sym: &[Vec<C<S>>]) -> Result<S> {
    let sigma: Vec<Vec<C<S>>> = sym
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k % 2 == 0 {
                v.iter().map(|a| -*a).collect()
            } else {
                v.clone()
            }
        })
        .collect();
    chain_residual(grid, &sigma, None)
}

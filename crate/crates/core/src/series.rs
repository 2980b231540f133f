//! Truncated series carriers.
//!
//! [`Tps`] is a univariate truncated power series. [`BiSeries`] is a double
//! series `Σ c[n,m] xⁿ y⁻ᵐ`, Taylor in `x` and Laurent in `1/y`, which may also
//! carry finitely many non-negative powers of `y`. Each `BiSeries` records how
//! far its coefficients are exact so that truncation never leaks silently into
//! downstream linear systems.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{cone, cpowi, czero, from_i64, from_usize, lit, to_f64, Real, C};

/// Truncated power series `Σ_{i<len} a_i uⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tps<S: Real> {
    pub a: Vec<C<S>>,
}

impl<S: Real> Tps<S> {
    pub fn new(len: usize, mut a: Vec<C<S>>) -> Self {
        a.resize(len, czero());
        Tps { a }
    }

    pub fn constant(len: usize, c: C<S>) -> Self {
        Tps::new(len, vec![c])
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        Tps {
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Tps {
            a: self.a.iter().zip(&o.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, c: C<S>) -> Self {
        Tps {
            a: self.a.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.len();
        let mut a = vec![czero::<S>(); n];
        for i in 0..n {
            if self.a[i] == czero() {
                continue;
            }
            for j in 0..n - i {
                a[i + j] = a[i + j] + self.a[i] * o.a[j];
            }
        }
        Tps { a }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inv(&self) -> Self {
        let n = self.len();
        let mut b = vec![czero::<S>(); n];
        let a0 = self.a[0];
        b[0] = cone::<S>() / a0;
        for k in 1..n {
            let mut acc = czero::<S>();
            for i in 1..=k {
                acc = acc + self.a[i] * b[k - i];
            }
            b[k] = -acc / a0;
        }
        Tps { a: b }
    }

    pub fn powu(&self, k: usize) -> Self {
        let mut r = Tps::constant(self.len(), cone());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn derivative(&self) -> Self {
        let n = self.len();
        let mut a = vec![czero::<S>(); n];
        for i in 1..n {
            a[i - 1] = self.a[i] * from_usize::<S>(i);
        }
        Tps { a }
    }

    /// Multiplication by `u`, dropping the top coefficient.
    pub fn shift(&self) -> Self {
        let n = self.len();
        let mut a = vec![czero::<S>(); n];
        a[1..n].copy_from_slice(&self.a[..n - 1]);
        Tps { a }
    }
}

/// Truncation orders for [`BiSeries`]: largest `x` power and largest `m` in `y⁻ᵐ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trunc {
    pub nx: usize,
    pub mhi: i32,
}

impl Default for Trunc {
    fn default() -> Self {
        Trunc { nx: 12, mhi: 24 }
    }
}

impl Trunc {
    pub fn doubled(self) -> Self {
        Trunc {
            nx: 2 * self.nx,
            mhi: 2 * self.mhi,
        }
    }
}

/// `Σ c[n,m] xⁿ y⁻ᵐ` for `0 ≤ n ≤ nx`, `m_lo ≤ m ≤ m_hi`.
///
/// `x_valid`/`m_valid` bound the exactly known coefficients; `None` means the
/// series is exact, i.e. every omitted coefficient is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BiSeries<S: Real> {
    trunc: Trunc,
    nx: usize,
    x_valid: Option<usize>,
    m_lo: i32,
    m_hi: i32,
    m_valid: Option<i32>,
    c: Vec<C<S>>,
}

fn opt_min<T: Ord + Copy>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl<S: Real> BiSeries<S> {
    fn alloc(trunc: Trunc, nx: usize, m_lo: i32, m_hi: i32) -> Self {
        let m_hi = m_hi.max(m_lo);
        let width = (m_hi - m_lo + 1) as usize;
        BiSeries {
            trunc,
            nx,
            x_valid: None,
            m_lo,
            m_hi,
            m_valid: None,
            c: vec![czero::<S>(); (nx + 1) * width],
        }
    }

    pub fn zero(trunc: Trunc) -> Self {
        Self::alloc(trunc, 0, 0, 0)
    }

    pub fn constant(trunc: Trunc, a: C<S>) -> Self {
        let mut s = Self::alloc(trunc, 0, 0, 0);
        s.c[0] = a;
        s
    }

    /// `a · xⁿ · yᵉ` (exact).
    pub fn monomial(trunc: Trunc, a: C<S>, n: usize, e: i32) -> Self {
        if n > trunc.nx || -e > trunc.mhi {
            let mut z = Self::zero(trunc);
            z.m_valid = Some(trunc.mhi);
            return z;
        }
        let mut s = Self::alloc(trunc, n, -e, -e);
        s.set(n, -e, a);
        s
    }

    /// Polynomial in `y`, exact.
    pub fn from_y_poly(trunc: Trunc, p: &Poly<S>) -> Self {
        let d = p.degree() as i32;
        let mut s = Self::alloc(trunc, 0, -d, 0);
        for (i, &a) in p.c.iter().enumerate().take(d as usize + 1) {
            s.set(0, -(i as i32), a);
        }
        s
    }

    /// Polynomial in `x` (Taylor coefficients, lowest first) tensored with `1`.
    pub fn from_x_poly(trunc: Trunc, coeffs: &[C<S>]) -> Self {
        let deg = coeffs.len().saturating_sub(1);
        let nx = deg.min(trunc.nx);
        let mut s = Self::alloc(trunc, nx, 0, 0);
        for (n, &a) in coeffs.iter().enumerate().take(nx + 1) {
            s.set(n, 0, a);
        }
        if deg > trunc.nx {
            s.x_valid = Some(trunc.nx);
        }
        s
    }

    /// Builds a series from coefficients `(n, m) ↦ c`, valid up to `m_valid`.
    pub fn from_fn(
        trunc: Trunc,
        nx: usize,
        m_lo: i32,
        m_hi: i32,
        m_valid: Option<i32>,
        f: impl Fn(usize, i32) -> C<S>,
    ) -> Self {
        let nx = nx.min(trunc.nx);
        let m_hi = m_hi.min(trunc.mhi);
        let mut s = Self::alloc(trunc, nx, m_lo, m_hi);
        for n in 0..=nx {
            for m in m_lo..=m_hi {
                s.set(n, m, f(n, m));
            }
        }
        s.m_valid = m_valid.map(|v| v.min(m_hi));
        s
    }

    /// Marks the `x` expansion as cut at `nx` (`Some`) or exact (`None`).
    pub fn with_x_valid(mut self, v: Option<usize>) -> Self {
        self.x_valid = v.map(|v| v.min(self.nx));
        self
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn m_lo(&self) -> i32 {
        self.m_lo
    }

    pub fn m_hi(&self) -> i32 {
        self.m_hi
    }

    /// Largest exactly known `m`, or `None` when the series is exact.
    pub fn m_valid(&self) -> Option<i32> {
        self.m_valid
    }

    pub fn x_valid(&self) -> Option<usize> {
        self.x_valid
    }

    /// Largest `m` whose coefficients are trustworthy.
    pub fn m_trusted(&self) -> i32 {
        self.m_valid.unwrap_or(self.m_hi).min(self.m_hi)
    }

    pub fn x_trusted(&self) -> usize {
        self.x_valid.unwrap_or(self.nx).min(self.nx)
    }

    fn width(&self) -> usize {
        (self.m_hi - self.m_lo + 1) as usize
    }

    fn idx(&self, n: usize, m: i32) -> usize {
        n * self.width() + (m - self.m_lo) as usize
    }

    /// Coefficient of `xⁿ y⁻ᵐ` (zero outside the stored window).
    pub fn get(&self, n: usize, m: i32) -> C<S> {
        if n > self.nx || m < self.m_lo || m > self.m_hi {
            czero()
        } else {
            self.c[self.idx(n, m)]
        }
    }

    fn set(&mut self, n: usize, m: i32, a: C<S>) {
        let i = self.idx(n, m);
        self.c[i] = a;
    }

    fn combine_trunc(&self, o: &Self) -> Trunc {
        Trunc {
            nx: self.trunc.nx.min(o.trunc.nx),
            mhi: self.trunc.mhi.min(o.trunc.mhi),
        }
    }

    pub fn max_abs(&self) -> S {
        self.c.iter().fold(S::zero(), |m, a| m.max(a.norm()))
    }

    pub fn scale(&self, a: C<S>) -> Self {
        let mut s = self.clone();
        for v in &mut s.c {
            *v = *v * a;
        }
        s
    }

    pub fn neg(&self) -> Self {
        self.scale(-cone::<S>())
    }

    fn lin(&self, o: &Self, sign: S) -> Self {
        let trunc = self.combine_trunc(o);
        let m_valid = opt_min(self.m_valid, o.m_valid);
        let x_valid = opt_min(self.x_valid, o.x_valid);
        let m_lo = self.m_lo.min(o.m_lo);
        let mut m_hi = self.m_hi.max(o.m_hi).min(trunc.mhi);
        if let Some(v) = m_valid {
            m_hi = m_hi.min(v);
        }
        let nx = self.nx.max(o.nx).min(trunc.nx).min(x_valid.unwrap_or(usize::MAX));
        let mut s = Self::alloc(trunc, nx, m_lo, m_hi);
        for n in 0..=nx {
            for m in m_lo..=s.m_hi {
                s.set(n, m, self.get(n, m) + o.get(n, m) * sign);
            }
        }
        s.m_valid = m_valid.map(|v| v.min(s.m_hi));
        s.x_valid = x_valid.map(|v| v.min(nx));
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        self.lin(o, S::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.lin(o, -S::one())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let trunc = self.combine_trunc(o);
        let m_lo = self.m_lo + o.m_lo;
        let full_hi = self.m_hi + o.m_hi;
        let av = self.m_valid.map(|v| v + o.m_lo);
        let bv = o.m_valid.map(|v| v + self.m_lo);
        let valid = opt_min(av, bv);
        let mut m_hi = full_hi.min(trunc.mhi);
        if let Some(v) = valid {
            m_hi = m_hi.min(v);
        }
        let m_valid = if valid.is_none() && full_hi <= trunc.mhi {
            None
        } else {
            Some(m_hi)
        };
        let full_nx = self.nx + o.nx;
        let xv = opt_min(self.x_valid, o.x_valid);
        let nx = full_nx.min(trunc.nx).min(xv.unwrap_or(usize::MAX));
        let x_valid = if xv.is_none() && full_nx <= trunc.nx {
            None
        } else {
            Some(nx)
        };
        let mut s = Self::alloc(trunc, nx, m_lo, m_hi);
        if m_hi < m_lo {
            s.m_valid = Some(m_lo - 1);
            return s;
        }
        for n1 in 0..=self.nx.min(nx) {
            for m1 in self.m_lo..=self.m_hi {
                let a = self.get(n1, m1);
                if a == czero() {
                    continue;
                }
                for n2 in 0..=o.nx.min(nx - n1) {
                    for m2 in o.m_lo..=o.m_hi.min(m_hi - m1) {
                        let b = o.get(n2, m2);
                        let i = s.idx(n1 + n2, m1 + m2);
                        s.c[i] = s.c[i] + a * b;
                    }
                }
            }
        }
        s.m_valid = m_valid;
        s.x_valid = x_valid;
        s
    }

    /// `∂/∂x`.
    pub fn dx(&self) -> Self {
        let nx = self.nx.saturating_sub(1);
        let mut s = Self::alloc(self.trunc, nx, self.m_lo, self.m_hi);
        for n in 1..=self.nx {
            for m in self.m_lo..=self.m_hi {
                s.set(n - 1, m, self.get(n, m) * from_usize::<S>(n));
            }
        }
        s.m_valid = self.m_valid;
        s.x_valid = self.x_valid.map(|v| v.saturating_sub(1));
        s
    }

    /// `∂/∂y`.
    pub fn dy(&self) -> Self {
        let m_hi = (self.m_hi + 1).min(self.trunc.mhi);
        let mut s = Self::alloc(self.trunc, self.nx, self.m_lo + 1, m_hi);
        for n in 0..=self.nx {
            for m in self.m_lo..=self.m_hi {
                if m < m_hi {
                    s.set(n, m + 1, self.get(n, m) * -from_i64::<S>(m as i64));
                }
            }
        }
        s.m_valid = match self.m_valid {
            None if self.m_hi < self.trunc.mhi => None,
            v => Some(v.map_or(m_hi, |v| (v + 1).min(m_hi))),
        };
        s.x_valid = self.x_valid;
        s
    }

    /// Multiplication by `yᵏ` (exact shift).
    pub fn mul_y_pow(&self, k: i32) -> Self {
        let m_hi = (self.m_hi - k).min(self.trunc.mhi);
        let mut s = Self::alloc(self.trunc, self.nx, self.m_lo - k, m_hi);
        for n in 0..=self.nx {
            for m in self.m_lo..=self.m_hi {
                if m - k <= m_hi {
                    s.set(n, m - k, self.get(n, m));
                }
            }
        }
        s.m_valid = match self.m_valid {
            None if self.m_hi - k <= self.trunc.mhi => None,
            v => Some(v.map_or(m_hi, |v| (v - k).min(m_hi))),
        };
        s.x_valid = self.x_valid;
        s
    }

    /// Antiderivative in `y` vanishing at `y = ω`.
    ///
    /// A `y⁻¹` term would need a logarithm and is rejected.
    pub fn primitivize(&self, omega: C<S>) -> Result<Self> {
        let thresh = lit::<S>(1e-12) * S::one().max(self.max_abs());
        let residue = (0..=self.nx).fold(S::zero(), |m, n| m.max(self.get(n, 1).norm()));
        if residue > thresh {
            return Err(Error::ResidueObstruction(to_f64(residue)));
        }
        let m_lo = (self.m_lo - 1).min(0);
        let m_hi = (self.m_hi - 1).max(0);
        let mut s = Self::alloc(self.trunc, self.nx, m_lo, m_hi);
        for n in 0..=self.nx {
            let mut base = czero();
            for m in self.m_lo..=self.m_hi {
                if m == 1 {
                    continue;
                }
                let a = self.get(n, m) / from_i64::<S>(1 - m as i64);
                let i = s.idx(n, m - 1);
                s.c[i] = s.c[i] + a;
                base = base + a * cpowi(omega, 1 - m);
            }
            let i = s.idx(n, 0);
            s.c[i] = s.c[i] - base;
        }
        s.m_valid = self.m_valid.map(|v| (v - 1).min(m_hi));
        s.x_valid = self.x_valid;
        Ok(s)
    }

    /// `exp` of a series without constant or polynomial part (`m_lo ≥ 1`).
    pub fn exp(&self) -> Self {
        let trunc = self.trunc;
        let top = self.m_valid.unwrap_or(trunc.mhi).min(trunc.mhi);
        let nx = if self.nx == 0 { 0 } else { trunc.nx };
        let xprod = |a: &[C<S>], b: &[C<S>]| {
            let mut r = vec![czero::<S>(); nx + 1];
            for (i, &ai) in a.iter().enumerate() {
                if ai == czero() {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate().take(nx + 1 - i) {
                    r[i + j] = r[i + j] + ai * bj;
                }
            }
            r
        };
        let h: Vec<Vec<C<S>>> = (0..=top.max(0))
            .map(|m| {
                (0..=nx)
                    .map(|n| if m >= 1 { self.get(n, m) } else { czero() })
                    .collect()
            })
            .collect();
        let mut e: Vec<Vec<C<S>>> = vec![vec![czero::<S>(); nx + 1]; top.max(0) as usize + 1];
        e[0][0] = cone();
        for m in 1..=top.max(0) as usize {
            let mut acc = vec![czero::<S>(); nx + 1];
            for j in 1..=m {
                let t = xprod(&h[j], &e[m - j]);
                let f = from_usize::<S>(j);
                for (a, b) in acc.iter_mut().zip(t) {
                    *a = *a + b * f;
                }
            }
            let inv = S::one() / from_usize::<S>(m);
            e[m] = acc.into_iter().map(|a| a * inv).collect();
        }
        let mut s = Self::alloc(trunc, nx, 0, top.max(0));
        for (m, row) in e.iter().enumerate() {
            for (n, &a) in row.iter().enumerate() {
                s.set(n, m as i32, a);
            }
        }
        let exact = self.m_valid.is_none() && self.m_hi < 1 && self.nx == 0;
        s.m_valid = if exact { None } else { Some(s.m_hi) };
        s.x_valid = match self.x_valid {
            None if self.nx == 0 => None,
            None => Some(nx),
            Some(v) => Some(v.min(nx)),
        };
        s
    }

    /// Laurent expansion of `1/B(y)` at `y = ∞` for a polynomial `B`.
    pub fn inv_y_poly(trunc: Trunc, b: &Poly<S>) -> Self {
        let r = b.degree();
        let br = b.c[r];
        let len = (trunc.mhi - r as i32).max(0) as usize + 1;
        let mut e = vec![czero::<S>(); len];
        e[0] = cone::<S>() / br;
        for j in 1..len {
            let mut acc = czero::<S>();
            for i in 1..=j.min(r) {
                acc = acc + b.c[r - i] * e[j - i];
            }
            e[j] = -acc / br;
        }
        let m_lo = r as i32;
        let mut s = Self::alloc(trunc, 0, m_lo, m_lo + len as i32 - 1);
        for (j, &a) in e.iter().enumerate() {
            s.set(0, m_lo + j as i32, a);
        }
        s.m_valid = if r == 0 { None } else { Some(s.m_hi) };
        s
    }

    /// Coefficient of `yᵉ` as an `x`-Taylor vector of length `nx + 1`.
    pub fn coeff_y(&self, e: i32) -> Result<Vec<C<S>>> {
        let m = -e;
        if m > self.m_trusted() && !(self.m_valid.is_none() && m > self.m_hi) {
            return Err(Error::TruncationExceeded { n: e });
        }
        Ok((0..=self.nx).map(|n| self.get(n, m)).collect())
    }

    pub fn eval(&self, x: C<S>, y: C<S>) -> C<S> {
        let yi = cone::<S>() / y;
        let mut acc = czero::<S>();
        for n in (0..=self.nx).rev() {
            let mut row = czero();
            for m in (self.m_lo..=self.m_hi).rev() {
                row = row * yi + self.get(n, m);
            }
            acc = acc * x + row;
        }
        acc * cpowi(y, -self.m_lo)
    }

    /// Largest coefficient difference over the window where both are trusted.
    pub fn max_diff(&self, o: &Self) -> S {
        let hi = self.m_trusted().min(o.m_trusted());
        let nx = self.x_trusted().min(o.x_trusted());
        let lo = self.m_lo.min(o.m_lo);
        let mut d = S::zero();
        for n in 0..=nx {
            for m in lo..=hi {
                d = d.max((self.get(n, m) - o.get(n, m)).norm());
            }
        }
        d
    }

    /// Debug dump `{"n,m": [re, im]}` of the nonzero coefficients.
    pub fn to_json(&self) -> Value {
        let mut map = BTreeMap::new();
        for n in 0..=self.nx {
            for m in self.m_lo..=self.m_hi {
                let a = self.get(n, m);
                if a != czero() {
                    map.insert(format!("{n},{m}"), json!([to_f64(a.re), to_f64(a.im)]));
                }
            }
        }
        json!(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    fn cr(v: f64) -> crate::scalar::C<f64> {
        crate::scalar::cr(v)
    }

    type B = BiSeries<f64>;

    #[test]
    fn tps_inverse() {
        let t = Tps::<f64>::new(5, vec![cr(1.0), cr(-1.0)]);
        let inv = t.inv();
        assert!(inv.a.iter().all(|a| (a - cr(1.0)).norm() < 1e-15));
    }

    #[test]
    fn primitivize_calculus() {
        let tr = Trunc::default();
        let w = cr(3.0);
        let s = B::monomial(tr, cr(1.0), 0, -2).primitivize(w).unwrap();
        assert!((s.get(0, 1) + cr(1.0)).norm() < 1e-15);
        assert!((s.get(0, 0) - cr(1.0 / 3.0)).norm() < 1e-15);
        let one = B::constant(tr, cr(1.0)).primitivize(w).unwrap();
        assert!((one.get(0, -1) - cr(1.0)).norm() < 1e-15);
        assert!((one.get(0, 0) + w).norm() < 1e-15);
        assert!(matches!(
            B::monomial(tr, cr(1.0), 0, -1).primitivize(w),
            Err(Error::ResidueObstruction(_))
        ));
    }

    #[test]
    fn primitive_of_derivative_is_identity() {
        let tr = Trunc::default();
        let s = B::from_fn(tr, 3, 2, 10, None, |n, m| cr((n + 1) as f64 / (m * m) as f64));
        let w = cr(2.5);
        let back = s.dy().primitivize(w).unwrap();
        assert!(back.dy().max_diff(&s.dy()) < 1e-14);
        for x in [cr(0.0), cr(0.3)] {
            assert!(back.eval(x, w).norm() < 1e-14);
            let y = cr(4.0);
            let want = s.eval(x, y) - s.eval(x, w);
            assert!((back.eval(x, y) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn exp_times_exp_neg_is_one() {
        let tr = Trunc::default();
        let h = B::from_fn(tr, 4, 1, 24, None, |n, m| {
            cr(0.3f64.powi(m) * (1.0 + n as f64) / m as f64)
        });
        let p = h.exp().mul(&h.neg().exp());
        let one = B::constant(tr, cr(1.0));
        assert!(p.max_diff(&one) < 1e-12);
    }

    #[test]
    fn inverse_of_linear_polynomial() {
        let tr = Trunc::default();
        let b = Poly::new(vec![cr(1.0), cr(2.0)]);
        let inv = B::inv_y_poly(tr, &b);
        let prod = inv.mul(&B::from_y_poly(tr, &b));
        assert!(prod.max_diff(&B::constant(tr, cr(1.0))) < 1e-14);
        let y = cr(4.0);
        assert!((inv.eval(cr(0.0), y) - cr(1.0 / 9.0)).norm() < 1e-14);
    }
}

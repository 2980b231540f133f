//! Cauchy–Fantappiè indicators `G_k`, their Laurent data and the winding integer `δ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{raw_m_of_y, rho, BoundaryData, LineParam};
use crate::scalar::{binomial, cis, cone, cpowi, czero, from_usize, lit, to_f64, Real, C};

const INCIDENCE_FLOOR: f64 = 1e-9;

/// `G_0(z), …, G_kmax(z)` by one trapezoid pass over the boundary.
pub fn g_many<S: Real>(b: &BoundaryData<S>, z: &LineParam<S>, kmax: usize) -> Result<Vec<C<S>>> {
    let mut out = vec![czero::<S>(); kmax + 1];
    let two_pi_i = C::new(S::zero(), S::PI() + S::PI());
    let mut closest = S::infinity();
    for l in &b.loops {
        let mut acc = vec![czero::<S>(); kmax + 1];
        for j in 0..l.len() {
            let (z1, z2) = (l.z1()[j], l.z2()[j]);
            let den = z.x + z.y * z1 + z2;
            closest = closest.min(den.norm());
            let mut term = (z.y * l.dz1()[j] + l.dz2()[j]) / den;
            for a in acc.iter_mut() {
                *a = *a + term;
                term = term * z1;
            }
        }
        let f = two_pi_i.inv() * l.step() * lit::<S>(l.orientation as f64);
        for (o, a) in out.iter_mut().zip(acc) {
            *o = *o + a * f;
        }
    }
    if closest <= lit(INCIDENCE_FLOOR) {
        return Err(Error::NearIncidence {
            distance: to_f64(closest),
        });
    }
    Ok(out)
}

/// `G_k(z) = (1/2πi) ∮ z1ᵏ d(x + y z1 + z2)/(x + y z1 + z2)`.
pub fn g_k<S: Real>(b: &BoundaryData<S>, z: &LineParam<S>, k: usize) -> Result<C<S>> {
    Ok(g_many(b, z, k)?[k])
}

/// Winding quadrature `(1/2πi) ∮ dz1/z1` before rounding.
pub fn winding<S: Real>(b: &BoundaryData<S>) -> C<S> {
    b.contour(|z1, _, dz1, _| dz1 / z1)
}

/// `δ`, rounded with a `1e−6` guard.
pub fn delta<S: Real>(b: &BoundaryData<S>) -> Result<i64> {
    let w = winding(b);
    let r = w.re.round();
    if (w - C::new(r, S::zero())).norm() > lit(1e-6) {
        return Err(Error::RoundingGuard {
            what: "delta",
            value: to_f64(w.re),
        });
    }
    Ok(r.to_i64().unwrap_or(0))
}

/// `p = δ + q∞`.
pub fn sheet_count(delta: i64, q_inf: i64) -> Result<i64> {
    let p = delta + q_inf;
    if p < 0 {
        return Err(Error::NegativeSheets(p));
    }
    Ok(p)
}

/// Coefficients `G_{k,m}^n` of `G_k(x, y) = Σ_m Σ_{n≤m} G_{k,m}^n xⁿ y⁻ᵐ`.
#[derive(Debug, Clone)]
pub struct LaurentTable<S: Real> {
    pub kmax: usize,
    pub mmax: usize,
    coeffs: Vec<C<S>>,
    /// Size of the closed-loop term `(1/2πi)∮ z2² dz2` that an alternative
    /// closed form for `G_{1,1}^0` carries; it must vanish.
    pub g110_extra: S,
}

impl<S: Real> LaurentTable<S> {
    fn idx(&self, k: usize, m: usize, n: usize) -> usize {
        (k * (self.mmax + 1) + m) * (self.mmax + 1) + n
    }

    pub fn get(&self, k: usize, m: usize, n: usize) -> C<S> {
        if k > self.kmax || m > self.mmax || n > m {
            return czero();
        }
        self.coeffs[self.idx(k, m, n)]
    }

    /// `G_{k,m}(x)` as Taylor coefficients (length `m + 1`).
    pub fn poly(&self, k: usize, m: usize) -> Vec<C<S>> {
        (0..=m).map(|n| self.get(k, m, n)).collect()
    }

    /// `Σ_{m ≤ mmax} G_{k,m}(x) y⁻ᵐ`.
    pub fn eval(&self, k: usize, x: C<S>, y: C<S>) -> C<S> {
        let yi = cone::<S>() / y;
        let mut acc = czero();
        for m in (0..=self.mmax).rev() {
            let gm = (0..=m).rev().fold(czero(), |a, n| a * x + self.get(k, m, n));
            acc = acc * yi + gm;
        }
        acc
    }
}

/// Largest order accepted by [`laurent_direct`].
pub const DIRECT_CAP: usize = 48;
/// Largest order accepted by [`laurent_extract`], where both routes are compared.
pub const EXTRACT_CAP: usize = 12;

/// Moment `(1/2πi)∮ z1ᵃ z2ᵇ dz1` (`second = false`) or `… dz2` (`second = true`).
fn moment<S: Real>(b: &BoundaryData<S>, a: i32, e: i32, second: bool) -> C<S> {
    b.contour(|z1, z2, dz1, dz2| cpowi(z1, a) * cpowi(z2, e) * if second { dz2 } else { dz1 })
}

/// Closed-form boundary moments for the Laurent coefficients.
pub fn laurent_direct<S: Real>(b: &BoundaryData<S>, kmax: usize, mmax: usize) -> Result<LaurentTable<S>> {
    if kmax > DIRECT_CAP || mmax > DIRECT_CAP {
        return Err(Error::InvalidInput(format!("Laurent orders capped at {DIRECT_CAP}")));
    }
    let mut t = LaurentTable {
        kmax,
        mmax,
        coeffs: vec![czero::<S>(); (kmax + 1) * (mmax + 1) * (mmax + 1)],
        g110_extra: S::zero(),
    };
    let sgn = |e: usize| if e.is_multiple_of(2) { S::one() } else { -S::one() };
    let entries: Vec<(usize, usize, usize)> = (0..=kmax)
        .flat_map(|k| (0..=mmax).flat_map(move |m| (0..=m).map(move |n| (k, m, n))))
        .collect();
    let vals: Vec<C<S>> = entries
        .par_iter()
        .map(|&(k, m, n)| {
            let (ki, mi) = (k as i32, m as i32);
            let j = m - n;
            let mut v = moment(b, ki - mi - 1, j as i32, false) * (sgn(j) * binomial::<S>(m, j));
            if n < m {
                v = v + moment(b, ki - mi, j as i32 - 1, true) * (sgn(j - 1) * binomial::<S>(m - 1, j - 1));
            }
            v * sgn(n)
        })
        .collect();
    for (&(k, m, n), v) in entries.iter().zip(vals) {
        let i = t.idx(k, m, n);
        t.coeffs[i] = v;
    }
    t.g110_extra = b.contour(|_, z2, _, dz2| z2 * z2 * dz2).norm();
    Ok(t)
}

/// Laurent table cross-validated against torus sampling of `G_k`.
///
/// The sampled route evaluates `G_k` on `|y| = 2ρ` (256 points) and on a
/// circle in `x` of half the smallest admissible radius, then reads off the
/// double Fourier coefficients.
pub fn laurent_extract<S: Real>(b: &BoundaryData<S>, kmax: usize, mmax: usize) -> Result<LaurentTable<S>> {
    if kmax > EXTRACT_CAP || mmax > EXTRACT_CAP {
        return Err(Error::InvalidInput(format!(
            "Laurent extraction capped at {EXTRACT_CAP}"
        )));
    }
    let t = laurent_direct(b, kmax, mmax)?;
    if t.g110_extra > lit(1e-10) {
        return Err(Error::TruncationMismatch {
            k: 1,
            m: 1,
            n: 0,
            diff: to_f64(t.g110_extra),
        });
    }
    let sampled = laurent_sampled(b, kmax, mmax, 256, 32)?;
    for k in 0..=kmax {
        for m in 0..=mmax {
            for n in 0..=m {
                let diff = (t.get(k, m, n) - sampled.get(k, m, n)).norm();
                if diff > lit(1e-6) {
                    return Err(Error::TruncationMismatch {
                        k,
                        m,
                        n,
                        diff: to_f64(diff),
                    });
                }
            }
        }
    }
    Ok(t)
}

/// Second extraction route: double discrete Fourier transform on a torus in `Z`.
pub fn laurent_sampled<S: Real>(
    b: &BoundaryData<S>,
    kmax: usize,
    mmax: usize,
    ny: usize,
    nx: usize,
) -> Result<LaurentTable<S>> {
    let big_r = lit::<S>(2.0) * rho(b);
    let two_pi = S::PI() + S::PI();
    let ys: Vec<C<S>> = (0..ny)
        .map(|j| cis(two_pi * from_usize::<S>(j) / from_usize::<S>(ny)) * big_r)
        .collect();
    let m_min = ys.iter().fold(S::infinity(), |a, &y| a.min(raw_m_of_y(b, y)));
    let rx = lit::<S>(0.5) * m_min;
    let xs: Vec<C<S>> = (0..nx)
        .map(|j| cis(two_pi * (from_usize::<S>(j) + lit(0.25)) / from_usize::<S>(nx)) * rx)
        .collect();
    let grid: Vec<(usize, usize)> = (0..nx).flat_map(|a| (0..ny).map(move |c| (a, c))).collect();
    let values: Vec<Vec<C<S>>> = grid
        .par_iter()
        .map(|&(a, c)| g_many(b, &LineParam::new(xs[a], ys[c]), kmax))
        .collect::<Result<_>>()?;
    let mut t = LaurentTable {
        kmax,
        mmax,
        coeffs: vec![czero::<S>(); (kmax + 1) * (mmax + 1) * (mmax + 1)],
        g110_extra: S::zero(),
    };
    let norm = S::one() / from_usize::<S>(nx * ny);
    for k in 0..=kmax {
        for m in 0..=mmax {
            for n in 0..=m {
                let mut acc = czero();
                for (&(a, c), v) in grid.iter().zip(&values) {
                    acc = acc + v[k] * cpowi(xs[a], -(n as i32)) * cpowi(ys[c], m as i32);
                }
                let i = t.idx(k, m, n);
                t.coeffs[i] = acc * norm;
            }
        }
    }
    Ok(t)
}

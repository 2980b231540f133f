//! Linear systems for the Taylor data `μ_j` and the rational part `(A, B)`.
//!
//! Every system is written as `Σ μ_j^{(m)} F_{j,m} + Σ θ_c Φ_c + Φ_const = 0`
//! with `θ = (a_0, …, a_{r−1}, β_1, …, β_r)`, `β_0 = 1`, and is sampled on the
//! coefficients `xᵖ yⁿ` inside the window where every series is trusted.

use crate::error::{Error, Result};
use crate::geometry::{m_of_y, rho, BoundaryData};
use crate::indicators::{delta, laurent_direct, LaurentTable};
use crate::linalg::{lstsq, vec_norm, Mat};
use crate::poly::Poly;
use crate::scalar::{cis, cone, cpowi, czero, factorial, from_usize, lit, to_f64, Real, C};
use crate::series::{BiSeries, Trunc};
use crate::shock::{e_decomposition, h_from_laurent, s_k_from_mu, ETable, HData, OmegaCut, ShockSeries};
use crate::symmetric::roots;

/// Default Taylor degree of each `μ_j`.
pub const DEFAULT_DMU: usize = 10;
/// Largest `r = deg B` tried by [`fit_infinity`].
pub const DEFAULT_R_MAX: usize = 6;
/// Acceptance threshold on the relative E0 residual.
pub const ACCEPT_RESIDUAL: f64 = 1e-6;

/// `G_1 = Σ_m G_{1,m}(x) y⁻ᵐ` from a Laurent table.
pub fn g1_series<S: Real>(lt: &LaurentTable<S>, trunc: Trunc) -> BiSeries<S> {
    let m_hi = (lt.mmax as i32).min(trunc.mhi);
    let nx = (m_hi as usize).min(trunc.nx);
    let s = BiSeries::from_fn(trunc, nx, 0, m_hi, Some(m_hi), |n, m| lt.get(1, m as usize, n));
    s.with_x_valid((m_hi as usize > trunc.nx).then_some(nx))
}

/// Shared inputs of the E0/E1/E2 systems.
#[derive(Debug, Clone)]
pub struct FitSetup<S: Real> {
    pub h: HData<S>,
    pub g1: BiSeries<S>,
    pub rho: S,
    /// Radius of the `x` disc used to weight rows, `min(m(ω)/2, 1)`.
    pub r_x: S,
    pub dmu: usize,
}

impl<S: Real> FitSetup<S> {
    /// Indicators, `H̃` and `G_1` for boundary data, with `ω = −2ρτ`.
    pub fn from_boundary(b: &BoundaryData<S>, tau: C<S>, trunc: Trunc) -> Result<Self> {
        let d = delta(b)?;
        let r = rho(b);
        let lt = laurent_direct(b, 1, trunc.mhi as usize + 1)?;
        let cut = OmegaCut::new(r, tau)?;
        let mw = m_of_y(b, cut.omega)?;
        let h = h_from_laurent(&lt, d, cut, trunc)?;
        Ok(FitSetup::new(h, g1_series(&lt, trunc), r, mw))
    }

    pub fn new(h: HData<S>, g1: BiSeries<S>, rho: S, m_omega: S) -> Self {
        let r_x = (m_omega / lit(2.0)).min(S::one());
        FitSetup {
            h,
            g1,
            rho,
            r_x,
            dmu: DEFAULT_DMU,
        }
    }

    fn delta(&self) -> i64 {
        self.h.delta
    }

    /// `W = ω^{−δ} y^δ e^{−H̃}`.
    fn weight(&self) -> BiSeries<S> {
        let d = self.delta() as i32;
        self.h.htilde.neg().exp().mul_y_pow(d).scale(cpowi(self.h.omega(), -d))
    }

    fn y_pow(&self, e: i32) -> BiSeries<S> {
        BiSeries::monomial(self.h.trunc(), cone(), 0, e)
    }

    fn x_times(&self, s: &BiSeries<S>) -> BiSeries<S> {
        BiSeries::monomial(self.h.trunc(), cone(), 1, 0).mul(s)
    }

    /// `D f = ∂f/∂x + f ∂H̃/∂x`.
    fn op_d(&self, f: &BiSeries<S>) -> BiSeries<S> {
        f.dx().add(&f.mul(&self.h.htilde.dx()))
    }
}

/// Which equation family to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    E0,
    E1,
    E2,
}

/// Unknown or fixed rational part.
#[derive(Debug, Clone)]
pub enum AbSpec<S: Real> {
    Unknown(usize),
    Fixed { a: Poly<S>, b: Poly<S> },
}

impl<S: Real> AbSpec<S> {
    fn r(&self) -> usize {
        match self {
            AbSpec::Unknown(r) => *r,
            AbSpec::Fixed { b, .. } => b.degree(),
        }
    }
}

struct Terms<S: Real> {
    mu: Vec<(usize, usize, BiSeries<S>)>,
    params: Vec<BiSeries<S>>,
    constant: BiSeries<S>,
    order: usize,
}

fn e1_entry<S: Real>(setup: &FitSetup<S>, e: &ETable<S>, j: usize, m: usize) -> BiSeries<S> {
    let tr = setup.h.trunc();
    let mut s = BiSeries::zero(tr);
    if m >= 1 {
        s = s.add(e.get(j - 1, m - 1));
    }
    if m < j {
        s = s.add(&setup.op_d(e.get(j - 1, m)));
    }
    s
}

fn e2_entry<S: Real>(setup: &FitSetup<S>, e: &ETable<S>, j: usize, m: usize) -> BiSeries<S> {
    let tr = setup.h.trunc();
    let mut s = BiSeries::zero(tr);
    if m >= 2 && m - 2 < j {
        s = s.add(e.get(j - 1, m - 2));
    }
    if m >= 1 && m - 1 < j {
        s = s.add(&setup.op_d(e.get(j - 1, m - 1)).scale(C::new(lit(2.0), S::zero())));
    }
    if m < j {
        s = s.add(&setup.op_d(&setup.op_d(e.get(j - 1, m))));
    }
    s
}

/// `sup |∂²G_1/∂x²|` over `|y| = 2ρ` and `|x| = r_x`, from the series.
pub fn second_derivative_sup<S: Real>(setup: &FitSetup<S>) -> S {
    let g2 = setup.g1.dx().dx();
    let two_pi = S::PI() + S::PI();
    let mut sup = S::zero();
    for a in 0..8 {
        let x = cis(two_pi * from_usize::<S>(a) / lit(8.0)) * setup.r_x;
        for c in 0..32 {
            let y = cis(two_pi * from_usize::<S>(c) / lit(32.0)) * (lit::<S>(2.0) * setup.rho);
            sup = sup.max(g2.eval(x, y).norm());
        }
    }
    sup
}

fn terms<S: Real>(setup: &FitSetup<S>, fam: Family, r: usize, e: &ETable<S>) -> Result<Terms<S>> {
    let d = (r as i64 + setup.delta()) as usize;
    let w = setup.weight();
    let tr = setup.h.trunc();
    let g1 = &setup.g1;
    let mut mu = Vec::new();
    let mut params = Vec::new();
    let (constant, order);
    match fam {
        Family::E0 => {
            for j in 1..=d {
                for m in 0..j {
                    mu.push((j, m, e.get(j - 1, m).clone()));
                }
            }
            for i in 0..r {
                params.push(w.mul(&setup.y_pow(i as i32)).neg());
            }
            for i in 1..=r {
                let xi = setup
                    .x_times(&setup.y_pow(i as i32 - 1))
                    .scale(C::new(from_usize(i), S::zero()));
                params.push(w.mul(&xi.sub(&setup.y_pow(i as i32).mul(g1))).neg());
            }
            constant = w.mul(g1);
            order = d.saturating_sub(1);
        }
        Family::E1 => {
            for j in 1..=d {
                for m in 0..=j {
                    mu.push((j, m, e1_entry(setup, e, j, m)));
                }
            }
            let g1x = g1.dx();
            for _ in 0..r {
                params.push(BiSeries::zero(tr));
            }
            for i in 1..=r {
                let yi = setup.y_pow(i as i32 - 1).scale(C::new(from_usize(i), S::zero()));
                params.push(w.mul(&yi.sub(&setup.y_pow(i as i32).mul(&g1x))).neg());
            }
            constant = w.mul(&g1x);
            order = d;
        }
        Family::E2 => {
            if second_derivative_sup(setup) <= lit(1e-8) {
                return Err(Error::E2Degenerate);
            }
            for j in 1..=d {
                for m in 0..=j + 1 {
                    mu.push((j, m, e2_entry(setup, e, j, m)));
                }
            }
            let wg = w.mul(&g1.dx().dx());
            for _ in 0..r {
                params.push(BiSeries::zero(tr));
            }
            for i in 1..=r {
                params.push(wg.mul(&setup.y_pow(i as i32)));
            }
            constant = wg;
            order = d + 1;
        }
    }
    Ok(Terms {
        mu,
        params,
        constant,
        order,
    })
}

/// Dense sampled system `M θ ≈ rhs` together with its layout.
#[derive(Debug, Clone)]
pub struct AffineSystem<S: Real> {
    pub family: Family,
    pub d: usize,
    pub r: usize,
    pub dmu: usize,
    /// Columns: μ Taylor coefficients (`d·(dmu+1)`), then `a_i`, then `β_i`.
    pub matrix: Mat<S>,
    pub rhs: Vec<C<S>>,
    /// `(n, p)` for every row: coefficient of `xᵖ yⁿ`.
    pub rows: Vec<(i32, usize)>,
    /// Fixed `θ` when `(A, B)` was given.
    pub fixed: Option<Vec<C<S>>>,
}

impl<S: Real> AffineSystem<S> {
    pub fn mu_cols(&self) -> usize {
        self.d * (self.dmu + 1)
    }
}

fn theta_of<S: Real>(a: &Poly<S>, b: &Poly<S>) -> Vec<C<S>> {
    let r = b.degree();
    let mut t: Vec<C<S>> = (0..r).map(|i| a.c.get(i).cloned().unwrap_or_else(czero)).collect();
    t.extend((1..=r).map(|i| b.c[i]));
    t
}

fn check_b<S: Real>(b: &Poly<S>) -> Result<()> {
    if (b.c[0] - cone::<S>()).norm() > lit(1e-12) {
        return Err(Error::InvalidInput("B must satisfy B(0) = 1".into()));
    }
    Ok(())
}

/// Samples one family on its trusted window.
pub fn assemble<S: Real>(setup: &FitSetup<S>, fam: Family, ab: &AbSpec<S>) -> Result<AffineSystem<S>> {
    let r = ab.r();
    let d_signed = r as i64 + setup.delta();
    if d_signed < 0 {
        return Err(Error::NegativeSheets(d_signed));
    }
    if let AbSpec::Fixed { a, b } = ab {
        check_b(b)?;
        if !a.is_zero() && a.degree() >= r.max(1) {
            return Err(Error::InvalidInput("deg A must be below deg B".into()));
        }
    }
    let d = d_signed as usize;
    let e = e_decomposition(d, &setup.h)?;
    let t = terms(setup, fam, r, &e)?;
    let all =
        t.mu.iter()
            .map(|x| &x.2)
            .chain(t.params.iter())
            .chain(std::iter::once(&t.constant));
    let mut m_top = i32::MAX;
    let mut x_top = usize::MAX;
    for s in all {
        if let Some(v) = s.m_valid() {
            m_top = m_top.min(v);
        }
        if let Some(v) = s.x_valid() {
            x_top = x_top.min(v);
        }
    }
    let m_top = m_top.min(setup.h.trunc().mhi);
    let x_top = x_top.min(setup.h.trunc().nx);
    let p_max = if d == 0 {
        x_top
    } else {
        x_top.min(setup.dmu.saturating_sub(t.order))
    };
    let n_lo = -m_top;
    let n_hi = d as i32 + 4;
    let rw = lit::<S>(2.0) * setup.rho;
    let rows: Vec<(i32, usize)> = (n_lo..=n_hi).flat_map(|n| (0..=p_max).map(move |p| (n, p))).collect();
    let mu_cols = d * (setup.dmu + 1);
    let cols = mu_cols + 2 * r;
    let mut mat = Mat::zeros(rows.len(), cols);
    let mut rhs = vec![czero::<S>(); rows.len()];
    for (row, &(n, p)) in rows.iter().enumerate() {
        let wgt = rw.powi(n) * setup.r_x.powi(p as i32);
        let m = -n;
        for (j, order, f) in &t.mu {
            for tt in *order..=setup.dmu {
                let shift = tt - order;
                if shift > p {
                    break;
                }
                let fall = factorial::<S>(tt) / factorial::<S>(tt - order);
                let col = (j - 1) * (setup.dmu + 1) + tt;
                mat[(row, col)] = mat[(row, col)] + f.get(p - shift, m) * (fall * wgt);
            }
        }
        for (c, f) in t.params.iter().enumerate() {
            mat[(row, mu_cols + c)] = f.get(p, m) * wgt;
        }
        rhs[row] = -t.constant.get(p, m) * wgt;
    }
    let fixed = match ab {
        AbSpec::Fixed { a, b } => Some(theta_of(a, b)),
        AbSpec::Unknown(_) => None,
    };
    Ok(AffineSystem {
        family: fam,
        d,
        r,
        dmu: setup.dmu,
        matrix: mat,
        rhs,
        rows,
        fixed,
    })
}

/// Stacks systems sharing one layout.
pub fn stack<S: Real>(systems: &[AffineSystem<S>]) -> Result<AffineSystem<S>> {
    let first = systems
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to stack".into()))?;
    let cols = first.matrix.cols;
    let mut rows = Vec::new();
    let mut data = Vec::new();
    let mut rhs = Vec::new();
    for s in systems {
        if s.matrix.cols != cols || s.d != first.d || s.r != first.r {
            return Err(Error::InvalidInput("incompatible systems".into()));
        }
        for i in 0..s.matrix.rows {
            data.push((0..cols).map(|j| s.matrix[(i, j)]).collect::<Vec<_>>());
        }
        rhs.extend(s.rhs.iter().cloned());
        rows.extend(s.rows.iter().cloned());
    }
    let matrix = if data.is_empty() {
        Mat::zeros(0, cols)
    } else {
        Mat::from_rows(&data)
    };
    Ok(AffineSystem {
        matrix,
        rhs,
        rows,
        ..first.clone()
    })
}

/// Least-squares solution of an assembled system.
#[derive(Debug, Clone)]
pub struct Solution<S: Real> {
    pub d: usize,
    pub r: usize,
    pub mu: Vec<Vec<C<S>>>,
    pub a: Poly<S>,
    pub b: Poly<S>,
    /// `‖Mθ − rhs‖` relative to the largest of the cancelling parts.
    pub residual: S,
    pub rank: usize,
    pub cond: S,
    /// The numerical null space is larger than expected; the minimum-norm
    /// solution is returned.
    pub rank_deficient: bool,
}

pub fn solve<S: Real>(sys: &AffineSystem<S>) -> Solution<S> {
    let mu_cols = sys.mu_cols();
    let (ncols_unknown, rhs, param_part) = match &sys.fixed {
        None => (sys.matrix.cols, sys.rhs.clone(), vec![czero::<S>(); sys.rhs.len()]),
        Some(theta) => {
            let mut pp = vec![czero::<S>(); sys.rhs.len()];
            for (i, v) in pp.iter_mut().enumerate() {
                for (c, &th) in theta.iter().enumerate() {
                    *v = *v + sys.matrix[(i, mu_cols + c)] * th;
                }
            }
            let rhs = sys.rhs.iter().zip(&pp).map(|(b, p)| *b - *p).collect();
            (mu_cols, rhs, pp)
        }
    };
    let mut m = Mat::zeros(sys.matrix.rows, ncols_unknown);
    for i in 0..sys.matrix.rows {
        for j in 0..ncols_unknown {
            m[(i, j)] = sys.matrix[(i, j)];
        }
    }
    let (x, rank, cond) = if ncols_unknown == 0 || sys.matrix.rows == 0 {
        (Vec::new(), 0, S::one())
    } else {
        let l = lstsq(&m, &rhs);
        (l.x, l.rank, l.cond)
    };
    let ax = if ncols_unknown == 0 {
        vec![czero::<S>(); rhs.len()]
    } else {
        m.mul_vec(&x)
    };
    let resid: Vec<C<S>> = ax.iter().zip(&rhs).map(|(a, b)| *a - *b).collect();
    let scale = vec_norm(&sys.rhs).max(vec_norm(&ax)).max(vec_norm(&param_part));
    let rn = vec_norm(&resid);
    let residual = if scale > S::zero() { rn / scale } else { rn };
    let theta: Vec<C<S>> = match &sys.fixed {
        Some(t) => t.clone(),
        None => x[mu_cols..].to_vec(),
    };
    let mu = (0..sys.d)
        .map(|j| x[j * (sys.dmu + 1)..(j + 1) * (sys.dmu + 1)].to_vec())
        .collect();
    let r = sys.r;
    let a = Poly::new(theta[..r].to_vec());
    let mut bc = vec![cone::<S>()];
    bc.extend(theta[r..].iter().cloned());
    Solution {
        d: sys.d,
        r,
        mu,
        a,
        b: Poly::new(bc),
        residual,
        rank,
        cond,
        rank_deficient: rank < ncols_unknown,
    }
}

/// `c_{j,m}^{0,n}`: coefficient of `yⁿ` in `E_{j−1,m}` as an `x`-Taylor vector.
pub fn coeff_c0<S: Real>(e: &ETable<S>, j: usize, m: usize, n: i32) -> Result<Vec<C<S>>> {
    if j == 0 || m >= j || j - 1 > e.kmax {
        return Err(Error::InvalidInput(format!("no E_{{{},{}}} in table", j as i64 - 1, m)));
    }
    e.get(j - 1, m).coeff_y(n)
}

/// Coefficient of `xᵖ yⁿ` by trapezoid quadrature on `|y| = ry`, `|x| = rx`.
pub fn laurent_coeff_quadrature<S: Real>(
    s: &BiSeries<S>,
    n: i32,
    p: usize,
    ry: S,
    rx: S,
    ny: usize,
    nx: usize,
) -> C<S> {
    let two_pi = S::PI() + S::PI();
    let mut acc = czero::<S>();
    for a in 0..nx {
        let x = cis(two_pi * from_usize::<S>(a) / from_usize::<S>(nx)) * rx;
        for c in 0..ny {
            let y = cis(two_pi * from_usize::<S>(c) / from_usize::<S>(ny)) * ry;
            acc = acc + s.eval(x, y) * cpowi(x, -(p as i32)) * cpowi(y, -n);
        }
    }
    acc / from_usize::<S>(nx * ny)
}

/// `K^0 = ω^{−δ} y^δ (A + x B′ − B G_1) e^{−H̃}`.
pub fn k0_series<S: Real>(setup: &FitSetup<S>, a: &Poly<S>, b: &Poly<S>) -> BiSeries<S> {
    let tr = setup.h.trunc();
    let ab = BiSeries::from_y_poly(tr, a)
        .add(&setup.x_times(&BiSeries::from_y_poly(tr, &b.derivative())))
        .sub(&BiSeries::from_y_poly(tr, b).mul(&setup.g1));
    setup.weight().mul(&ab)
}

/// `K_n^0` as an `x`-Taylor vector.
pub fn rhs_k0<S: Real>(setup: &FitSetup<S>, a: &Poly<S>, b: &Poly<S>, n: i32) -> Result<Vec<C<S>>> {
    k0_series(setup, a, b).coeff_y(n)
}

/// `K^1 = ω^{−δ} y^δ (B′ − B ∂G_1/∂x) e^{−H̃}`.
pub fn k1_series<S: Real>(setup: &FitSetup<S>, b: &Poly<S>) -> BiSeries<S> {
    let tr = setup.h.trunc();
    let inner = BiSeries::from_y_poly(tr, &b.derivative()).sub(&BiSeries::from_y_poly(tr, b).mul(&setup.g1.dx()));
    setup.weight().mul(&inner)
}

/// Outcome of the degree scan.
#[derive(Debug, Clone)]
pub struct FitResult<S: Real> {
    pub solution: Solution<S>,
    pub confined: bool,
    /// `(r, residual)` for every tried degree.
    pub tried: Vec<(usize, S)>,
}

/// Smallest `r` whose E0 fit has relative residual below [`ACCEPT_RESIDUAL`]
/// and whose `B` has its roots in the closed `ρ`-disc.
pub fn fit_infinity<S: Real>(setup: &FitSetup<S>, r_max: usize) -> Result<FitResult<S>> {
    let mut tried = Vec::new();
    let mut best: Option<Solution<S>> = None;
    for r in 0..=r_max {
        if (r as i64) + setup.delta() < 0 {
            continue;
        }
        if (r as i64) + setup.delta() > crate::shock::E_TABLE_CAP as i64 {
            break;
        }
        let sys = assemble(setup, Family::E0, &AbSpec::Unknown(r))?;
        let sol = solve(&sys);
        tried.push((r, sol.residual));
        let confined = b_confined(&sol.b, setup.rho)?;
        if sol.residual < lit(ACCEPT_RESIDUAL) && confined {
            return Ok(FitResult {
                solution: sol,
                confined,
                tried,
            });
        }
        if best.as_ref().is_none_or(|b| sol.residual < b.residual) {
            best = Some(sol);
        }
    }
    let sol = best.ok_or(Error::NegativeSheets(setup.delta() + r_max as i64))?;
    Err(Error::NoFit(format!(
        "no degree up to {r_max} fits; best residual {:e} at r = {}",
        to_f64(sol.residual),
        sol.r
    )))
}

fn b_confined<S: Real>(b: &Poly<S>, rho: S) -> Result<bool> {
    if b.degree() == 0 {
        return Ok(true);
    }
    let slack = S::one() + lit(1e-6);
    Ok(roots(b)?.iter().all(|z| z.norm() <= rho * slack))
}

/// `s_1, …, s_d` generated by a solution.
pub fn shock_series<S: Real>(setup: &FitSetup<S>, sol: &Solution<S>) -> Result<Option<ShockSeries<S>>> {
    if sol.d == 0 {
        return Ok(None);
    }
    s_k_from_mu(&sol.mu, &sol.b, &setup.h).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shock::OmegaCut;

    fn c(v: f64) -> C<f64> {
        crate::scalar::cr(v)
    }

    #[test]
    fn trivial_data_gives_zero_solution() {
        let tr = Trunc::default();
        let h = HData::new(1, BiSeries::zero(tr), OmegaCut::new(1.0, c(1.0)).unwrap()).unwrap();
        let setup = FitSetup::new(h, BiSeries::zero(tr), 1.0, 1.0);
        let sys = assemble(&setup, Family::E0, &AbSpec::Unknown(0)).unwrap();
        let sol = solve(&sys);
        assert!(sol.residual < 1e-10);
        assert!(sol.mu[0].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn c0_of_small_tables() {
        let tr = Trunc::default();
        let w = c(-2.0);
        let h = HData::new(0, BiSeries::zero(tr), OmegaCut::with_omega(w, c(1.0), 1.0).unwrap()).unwrap();
        let e = e_decomposition(2, &h).unwrap();
        assert_eq!(coeff_c0(&e, 1, 0, 0).unwrap()[0], c(1.0));
        assert_eq!(coeff_c0(&e, 1, 0, -3).unwrap()[0], c(0.0));
        assert_eq!(coeff_c0(&e, 2, 1, 1).unwrap()[0], c(1.0));
        assert_eq!(coeff_c0(&e, 2, 1, 0).unwrap()[0], -w);
    }
}
